"""Finite-measure windows on the real line, evaluable test functions, simple
functions, and adaptive Gauss-Kronrod quadrature with explicit error bounds.

Everything downstream (norms, sampling, dynamics) runs on top of these three
representations:

* ``Window`` -- a finite union of disjoint intervals carrying restricted
  Lebesgue measure; the finite-measure stage on which all sampling happens.
* ``TestFunction`` -- a pointwise-evaluable real function with a declared
  support window and explicit tail bounds.
* ``SimpleFunction`` -- a list of (value, mass) atoms standing for
  sum(v_i * 1_{A_i}) with disjoint A_i; admits exact norm computations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Window",
    "TestFunction",
    "SimpleFunction",
    "Moments",
    "window",
    "window_union",
    "window_intersect",
    "window_translate",
    "window_position",
    "integrate",
    "simple_moments",
    "function_moments",
    "indicator",
    "piecewise_constant",
    "triangular_bump",
    "simple_to_test",
    "piecewise_to_simple",
]


# ---------------------------------------------------------------------------
# Windows


@dataclass(frozen=True)
class Window:
    """Finite union of disjoint, sorted, nonempty intervals (lo, hi)."""

    intervals: tuple[tuple[float, float], ...] = ()

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def contains(self, x) -> np.ndarray:
        """Vectorized membership test (closed intervals)."""
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (x >= lo) & (x <= hi)
        return inside


def _normalize(pairs, gap_tol: float = 0.0) -> tuple[tuple[float, float], ...]:
    cleaned = []
    for lo, hi in pairs:
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval ({lo}, {hi}) is not finite")
        if hi > lo:
            cleaned.append((lo, hi))
    cleaned.sort()
    merged: list[list[float]] = []
    for lo, hi in cleaned:
        if merged and lo <= merged[-1][1] + gap_tol:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


def window(*pairs, gap_tol: float = 0.0) -> Window:
    """Build a canonical Window from (lo, hi) pairs; overlaps are merged.

    ``gap_tol`` > 0 additionally merges intervals separated by gaps smaller
    than the tolerance (used to keep deep preimage unions small; merging only
    ever enlarges the window, which is safe for supersets of supports).
    """
    return Window(_normalize(pairs, gap_tol))


def window_union(a: Window, b: Window, gap_tol: float = 0.0) -> Window:
    """Canonical union of two windows."""
    return Window(_normalize(list(a.intervals) + list(b.intervals), gap_tol))


def window_intersect(a: Window, b: Window) -> Window:
    out = []
    for lo1, hi1 in a.intervals:
        for lo2, hi2 in b.intervals:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi > lo:
                out.append((lo, hi))
    return Window(_normalize(out))


def window_translate(w: Window, dx: float) -> Window:
    return Window(tuple((lo + dx, hi + dx) for lo, hi in w.intervals))


def window_position(w: Window, u) -> np.ndarray:
    """Inverse CDF of the uniform law on ``w``: maps u in [0,1) to points.

    Walks the interval list by cumulative length; vectorized over ``u``.
    """
    if not w:
        raise ValueError("empty window has no uniform law")
    u = np.asarray(u, dtype=float)
    lengths = np.array([hi - lo for lo, hi in w.intervals])
    starts = np.array([lo for lo, _ in w.intervals])
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    target = u * cum[-1]
    idx = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(lengths) - 1)
    return starts[idx] + (target - cum[idx])


# ---------------------------------------------------------------------------
# Function representations


@dataclass(frozen=True)
class TestFunction:
    """Pointwise-evaluable real function with declared support window.

    ``eval`` must accept a float ndarray and return one of equal shape.  It is
    assumed to vanish outside ``support`` except for mass covered by the
    declared tail bounds on the L1 and L2 norms of f restricted to the
    complement of the support.  ``breakpoints`` lists known discontinuities or
    kinks, used as forced quadrature subdivision points.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    support: Window
    sup_bound: float | None = None
    l1_tail_bound: float = 0.0
    l2_tail_bound: float = 0.0
    breakpoints: tuple[float, ...] = ()

    __test__ = False  # keep pytest from collecting the class


@dataclass(frozen=True)
class SimpleFunction:
    """Atoms (value, mass): the function sum(v_i 1_{A_i}), mu(A_i) = m_i."""

    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        for v, m in self.atoms:
            if v == 0:
                raise ValueError("atom values must be nonzero")
            if not m > 0:
                raise ValueError("atom masses must be strictly positive")

    @property
    def total_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def values_masses(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.atoms:
            return np.empty(0), np.empty(0)
        v, m = zip(*self.atoms)
        return np.array(v, dtype=float), np.array(m, dtype=float)


class Moments(NamedTuple):
    l1: float
    l2sq: float
    integral: float


def simple_moments(f: SimpleFunction) -> Moments:
    """Exact (l1, l2sq, integral) = (sum|v|m, sum v^2 m, sum v m)."""
    v, m = f.values_masses()
    return Moments(
        float(np.abs(v) @ m) if len(v) else 0.0,
        float((v * v) @ m) if len(v) else 0.0,
        float(v @ m) if len(v) else 0.0,
    )


def indicator(lo: float, hi: float, scale: float = 1.0) -> TestFunction:
    """scale * 1_{[lo, hi]} as a TestFunction."""
    if not hi > lo:
        raise ValueError("need hi > lo")

    def _eval(x, lo=float(lo), hi=float(hi), s=float(scale)):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), s, 0.0)

    return TestFunction(
        eval=_eval,
        support=window((lo, hi)),
        sup_bound=abs(scale),
        breakpoints=(float(lo), float(hi)),
    )


def piecewise_constant(breaks: Sequence[float], values: Sequence[float]) -> TestFunction:
    """Step function: values[i] on [breaks[i], breaks[i+1]), 0 outside."""
    breaks = np.asarray(breaks, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) != len(breaks) - 1:
        raise ValueError("need len(values) == len(breaks) - 1")
    if np.any(np.diff(breaks) <= 0):
        raise ValueError("breaks must be strictly increasing")

    def _eval(x, breaks=breaks, values=values):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(breaks, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(values))
        return np.where(inside, values[np.clip(idx, 0, len(values) - 1)], 0.0)

    support = window(
        *(
            (breaks[i], breaks[i + 1])
            for i in range(len(values))
            if values[i] != 0.0
        )
    )
    return TestFunction(
        eval=_eval,
        support=support,
        sup_bound=float(np.max(np.abs(values))) if len(values) else 0.0,
        breakpoints=tuple(float(b) for b in breaks),
    )


def triangular_bump(center: float, halfwidth: float, height: float = 1.0) -> TestFunction:
    """Tent function peaking at ``center`` and vanishing at distance halfwidth."""
    if not halfwidth > 0:
        raise ValueError("need halfwidth > 0")

    def _eval(x, c=float(center), h=float(halfwidth), a=float(height)):
        x = np.asarray(x, dtype=float)
        return a * np.maximum(0.0, 1.0 - np.abs(x - c) / h)

    return TestFunction(
        eval=_eval,
        support=window((center - halfwidth, center + halfwidth)),
        sup_bound=abs(height),
        breakpoints=(center - halfwidth, float(center), center + halfwidth),
    )


def simple_to_test(f: SimpleFunction, origin: float = 0.0, gap: float = 0.5) -> TestFunction:
    """Lay the atoms of ``f`` out as consecutive intervals on the line.

    Atom i occupies an interval of length m_i at value v_i, separated by
    ``gap``; any such layout realizes the same law of the stochastic integral.
    """
    breaks = []
    values = []
    x = float(origin)
    for v, m in f.atoms:
        breaks.append((x, x + m))
        values.append(v)
        x += m + gap
    if not breaks:
        return TestFunction(eval=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                            support=Window(), sup_bound=0.0)
    all_breaks = sorted({b for lo, hi in breaks for b in (lo, hi)})

    def _eval(x, breaks=tuple(breaks), values=tuple(values)):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for (lo, hi), v in zip(breaks, values):
            out = np.where((x >= lo) & (x < hi), v, out)
        return out

    return TestFunction(
        eval=_eval,
        support=window(*breaks),
        sup_bound=float(max(abs(v) for v in values)),
        breakpoints=tuple(all_breaks),
    )


def piecewise_to_simple(f: TestFunction, check_points: int = 3) -> SimpleFunction:
    """Exact atom representation of a piecewise-constant TestFunction.

    The cells are the support intervals refined by the declared breakpoints.
    Constancy on each cell is spot-checked at ``check_points`` interior
    points; a non-constant cell raises ValueError.
    """
    if f.l1_tail_bound or f.l2_tail_bound:
        raise ValueError("tail-bounded functions have no exact atom form")
    atoms: dict[float, float] = {}
    for lo, hi in f.support.intervals:
        cuts = sorted({lo, hi, *(b for b in f.breakpoints if lo < b < hi)})
        for a, b in zip(cuts, cuts[1:]):
            probes = np.linspace(a, b, check_points + 2)[1:-1]
            vals = np.asarray(f.eval(probes), dtype=float)
            if np.any(vals != vals[0]):
                raise ValueError(f"cell ({a}, {b}) is not constant")
            v = float(vals[0])
            if v != 0.0:
                atoms[v] = atoms.get(v, 0.0) + (b - a)
    return SimpleFunction(tuple(sorted(atoms.items())))


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature (G7/K15 pair)

# 15 Kronrod nodes on [-1, 1] with Kronrod weights; the embedded Gauss-7
# weights are zero at the Kronrod-only nodes.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.000000000000000, 0.207784955007898,
    0.405845151377397, 0.586087235467691, 0.741531185599394,
    0.864864423359769, 0.949107912342759, 0.991455371120813,
])
_K15_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_G7_WEIGHTS = np.array([
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
])


def _gk_batch(func, los: np.ndarray, his: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K15 values and conservative error estimates for a batch of segments."""
    half = 0.5 * (his - los)
    mid = 0.5 * (his + los)
    x = mid[:, None] + half[:, None] * _GK_NODES[None, :]
    y = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    k15 = (y @ _K15_WEIGHTS) * half
    g7 = (y @ _G7_WEIGHTS) * half
    # |K15 - G7| is a pessimistic bound on the K15 error; keep it conservative
    # rather than applying the usual (200 d)^1.5 sharpening.
    return k15, np.abs(k15 - g7)


def _initial_segments(w: Window, points: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted(set(float(p) for p in points))
    los, his = [], []
    for lo, hi in w.intervals:
        cuts = [lo] + [p for p in pts if lo < p < hi] + [hi]
        for a, b in zip(cuts, cuts[1:]):
            los.append(a)
            his.append(b)
    return np.array(los), np.array(his)


def integrate(
    f: TestFunction,
    w: Window | None = None,
    transform: Callable[[np.ndarray], np.ndarray] | None = None,
    tol: float = 1e-9,
    max_segments: int = 20000,
    extra_breakpoints: Sequence[float] = (),
) -> tuple[float, float]:
    """Adaptive quadrature of transform(f(x)) over ``w``; returns (value, err_bound).

    Declared breakpoints of ``f``, the window's own interval endpoints, and
    ``extra_breakpoints`` are forced subdivision points.  The worst segments
    are bisected until the summed error bound is <= tol; if the segment budget
    runs out first, the returned err_bound exceeds tol (never silent).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if w is None:
        w = f.support
    if not w:
        return 0.0, 0.0

    if transform is None:
        func = lambda x: np.asarray(f.eval(x), dtype=float)
    else:
        func = lambda x: np.asarray(transform(np.asarray(f.eval(x), dtype=float)), dtype=float)

    forced = list(f.breakpoints) + list(extra_breakpoints)
    for lo, hi in f.support.intervals:
        forced += [lo, hi]
    los, his = _initial_segments(w, forced)
    if len(los) == 0:
        return 0.0, 0.0

    vals, errs = _gk_batch(func, los, his)
    heap = [(-errs[i], los[i], his[i], vals[i], errs[i]) for i in range(len(los))]
    heapq.heapify(heap)
    total_val = float(vals.sum())
    total_err = float(errs.sum())

    while total_err > tol and len(heap) < max_segments:
        # split the biggest contributors in one batched evaluation
        batch = []
        budget = max(1, len(heap) // 8)
        while heap and len(batch) < budget and -heap[0][0] > tol / (2 * max(len(heap), 1)):
            batch.append(heapq.heappop(heap))
        if not batch:
            batch.append(heapq.heappop(heap))
        mids = [0.5 * (b[1] + b[2]) for b in batch]
        new_lo = np.array([b[1] for b in batch] + mids)
        new_hi = np.array(mids + [b[2] for b in batch])
        for _, _, _, v, e in batch:
            total_val -= v
            total_err -= e
        nv, ne = _gk_batch(func, new_lo, new_hi)
        for i in range(len(new_lo)):
            heapq.heappush(heap, (-ne[i], new_lo[i], new_hi[i], nv[i], ne[i]))
        total_val += float(nv.sum())
        total_err += float(ne.sum())

    return total_val, max(total_err, 0.0)


def function_moments(f: TestFunction, tol: float = 1e-9) -> tuple[Moments, float]:
    """Quadrature (l1, l2sq, integral) of a TestFunction over its support.

    Declared tail bounds are added to l1 (and l2sq via the square of the L2
    tail); the second return value is the summed quadrature error bound.
    """
    l1, e1 = integrate(f, transform=np.abs, tol=tol)
    l2sq, e2 = integrate(f, transform=np.square, tol=tol)
    mean, e3 = integrate(f, tol=tol)
    m = Moments(
        l1 + f.l1_tail_bound,
        l2sq + f.l2_tail_bound**2,
        mean,
    )
    return m, e1 + e2 + e3
