"""Tests for the measure-preserving systems, Birkhoff averages, and the
transfer operator."""

import math

import numpy as np
import pytest

from poisson_orlicz.dynamics import (
    CIRCLE_OFFSET,
    birkhoff,
    circle_indicator,
    make_boole,
    make_composite,
    make_translation,
    transfer_apply,
)
from poisson_orlicz.measure import (
    TestFunction,
    function_moments,
    indicator,
    integrate,
    triangular_bump,
    window,
)


# ---------------------------------------------------------------------------
# translation

def test_translation_preimages():
    sys = make_translation(1.0)
    pre = sys.preimages(5.0)
    assert len(pre) == 1
    y, j = pre[0]
    assert y == 4.0 and j == 1.0


def test_translation_forward_and_inflate():
    sys = make_translation(1.0)
    assert float(sys.forward(np.array([2.5]))[0]) == 3.5
    w = sys.backward_inflate(window((0.0, 1.0)), 3)
    assert w.intervals == ((-3.0, 1.0),)


def test_translation_rejects_zero_step():
    with pytest.raises(ValueError):
        make_translation(0.0)


def test_translation_transfer_is_exact_shift():
    sys = make_translation(1.0)
    f = indicator(0.0, 1.0)
    g = transfer_apply(f, sys, 3)
    xs = np.linspace(-1.0, 6.0, 101)
    assert np.array_equal(g.eval(xs), f.eval(xs - 3.0))
    assert g.support.intervals == ((3.0, 4.0),)


# ---------------------------------------------------------------------------
# Boole map

def test_boole_forward_values():
    sys = make_boole()
    out = sys.forward(np.array([2.0, 0.0, -1.0]))
    assert out[0] == 1.5
    assert math.isnan(out[1])
    assert out[2] == 0.0


def test_boole_preimages_of_zero():
    sys = make_boole()
    pre = sorted(sys.preimages(0.0))
    assert pre[0][0] == pytest.approx(-1.0, abs=1e-14)
    assert pre[1][0] == pytest.approx(1.0, abs=1e-14)
    assert pre[0][1] == pytest.approx(0.5, abs=1e-14)
    assert pre[1][1] == pytest.approx(0.5, abs=1e-14)


def test_boole_jacobians_sum_to_one_at_example_point():
    sys = make_boole()
    total = sum(j for _, j in sys.preimages(3.7))
    assert abs(total - 1.0) < 1e-12


def test_boole_preimage_identity_and_jacobian_sum():
    sys = make_boole()
    rng = np.random.default_rng(41)
    xs = rng.uniform(-80.0, 80.0, 1000)
    total = np.zeros(xs.shape)
    for ymap, jmap in sys.preimage_maps:
        ys = ymap(xs)
        back = sys.forward(ys)
        assert np.max(np.abs(back - xs)) < 1e-10
        total += jmap(xs)
    assert np.max(np.abs(total - 1.0)) < 1e-12


def test_boole_backward_inflate():
    sys = make_boole()
    w = sys.backward_inflate(window((-2.0, 2.0)), 3)
    assert w.intervals == ((-6.0, 6.0),)


def test_backward_inflate_contains_branch_pullbacks():
    rng = np.random.default_rng(7)
    for sys, w in [
        (make_boole(), window((-1.5, 2.0))),
        (make_translation(0.7), window((0.0, 1.0), (2.0, 2.5))),
    ]:
        n = 4
        big = sys.backward_inflate(w, n)
        for _ in range(50):
            x = rng.uniform(*w.intervals[rng.integers(len(w.intervals))])
            y = x
            for _ in range(rng.integers(1, n + 1)):
                branches = sys.preimages(y)
                y = branches[rng.integers(len(branches))][0]
            assert big.contains(np.array([y]))[0]


# ---------------------------------------------------------------------------
# composite system

def test_composite_rotation_example():
    sys = make_composite(circumference=1.0, angle=0.3, step=1.0)
    x = np.array([CIRCLE_OFFSET + 0.9])
    out = float(sys.forward(x)[0])
    assert abs(out - (CIRCLE_OFFSET + 0.2)) < 1e-9


def test_composite_circle_indicator_invariant():
    sys = make_composite()
    f = circle_indicator(sys)
    rng = np.random.default_rng(3)
    circle_pts = CIRCLE_OFFSET + rng.uniform(0.0, 1.0, 200)
    line_pts = rng.uniform(-50.0, 50.0, 200)
    pts = np.concatenate([circle_pts, line_pts])
    assert np.array_equal(f.eval(sys.forward(pts)), f.eval(pts))


def test_composite_line_part_skips_circle():
    sys = make_composite(step=1.0)
    x = np.array([CIRCLE_OFFSET - 0.25])
    out = float(sys.forward(x)[0])
    assert out == CIRCLE_OFFSET + 1.0 + 0.75
    back = float(sys.preimage_maps[0][0](np.array([out]))[0])
    assert back == x[0]


def test_composite_preimage_round_trip():
    sys = make_composite()
    rng = np.random.default_rng(11)
    pts = np.concatenate([
        rng.uniform(-30.0, 30.0, 100),
        CIRCLE_OFFSET + rng.uniform(0.0, 1.0, 100),
    ])
    ymap, jmap = sys.preimage_maps[0]
    ys = ymap(pts)
    assert np.max(np.abs(sys.forward(ys) - pts)) < 1e-9
    assert np.array_equal(jmap(pts), np.ones(pts.shape))


def test_composite_birkhoff_of_circle_indicator_is_itself():
    sys = make_composite()
    f = circle_indicator(sys)
    g = birkhoff(f, sys, 4)
    rng = np.random.default_rng(5)
    pts = np.concatenate([
        CIRCLE_OFFSET + rng.uniform(0.0, 1.0, 100),
        rng.uniform(-20.0, 20.0, 100),
    ])
    assert np.array_equal(g.eval(pts), f.eval(pts))


def test_composite_identity_map():
    sys = make_composite(angle=0.0, step=0.0)
    pts = np.array([-3.0, 0.5, CIRCLE_OFFSET + 0.4])
    assert np.array_equal(sys.forward(pts), pts)


# ---------------------------------------------------------------------------
# Birkhoff averages

def test_birkhoff_depth_one_is_composition():
    sys = make_translation(1.0)
    f = triangular_bump(0.0, 1.0, 2.0)
    g = birkhoff(f, sys, 1)
    xs = np.linspace(-3.0, 3.0, 301)
    assert np.array_equal(g.eval(xs), f.eval(xs + 1.0))


def test_birkhoff_translation_depth_two_plateau():
    sys = make_translation(1.0)
    f = indicator(0.0, 1.0)
    g = birkhoff(f, sys, 2)
    assert g.support.intervals == ((-2.0, 1.0),)
    xs = np.linspace(-1.95, -0.05, 20)
    assert np.max(np.abs(g.eval(xs) - 0.5)) == 0.0
    assert g.eval(np.array([0.5]))[0] == 0.0


def test_birkhoff_rejects_zero_depth():
    sys = make_translation(1.0)
    with pytest.raises(ValueError):
        birkhoff(indicator(0.0, 1.0), sys, 0)


def test_birkhoff_subsequence():
    sys = make_translation(1.0)
    f = indicator(0.0, 1.0)
    g = birkhoff(f, sys, 3, subsequence=(1, 4, 9))
    xs = np.linspace(-10.0, 1.0, 223)
    manual = (f.eval(xs + 1) + f.eval(xs + 4) + f.eval(xs + 9)) / 3.0
    assert np.array_equal(g.eval(xs), manual)
    assert g.powers == (1, 4, 9)
    with pytest.raises(ValueError):
        birkhoff(f, sys, 3, subsequence=(1, 1, 2))
    with pytest.raises(ValueError):
        birkhoff(f, sys, 2, subsequence=(1, 2, 3))


def test_birkhoff_l1_conservation():
    cases = [
        (make_translation(1.0), indicator(0.0, 1.0), 3),
        (make_boole(), triangular_bump(1.0, 0.5, 2.0), 2),
    ]
    for sys, f, n in cases:
        g = birkhoff(f, sys, n)
        base, _ = integrate(f, f.support, transform=np.abs, tol=1e-10)
        got, err = integrate(g, g.support, transform=np.abs, tol=1e-9)
        assert abs(got - base) < 1e-7 + err


def test_birkhoff_positive_function_stays_nonnegative():
    sys = make_boole()
    f = indicator(1.0, 2.0)
    g = birkhoff(f, sys, 3)
    rng = np.random.default_rng(13)
    xs = rng.uniform(-8.0, 8.0, 500)
    assert np.min(g.eval(xs)) >= 0.0


# ---------------------------------------------------------------------------
# transfer operator

def test_transfer_depth_zero_returns_function():
    sys = make_boole()
    f = indicator(1.0, 2.0)
    assert transfer_apply(f, sys, 0) is f


def test_transfer_boole_of_wide_indicator_is_one_inside():
    sys = make_boole()
    f = indicator(-60.0, 60.0)
    g = transfer_apply(f, sys, 1, tail_tol=0.5)
    xs = np.linspace(-3.0, 3.0, 41)
    assert np.max(np.abs(g.eval(xs) - 1.0)) < 1e-12


def test_transfer_boole_conserves_mass():
    sys = make_boole()
    f = indicator(1.0, 2.0)
    g = transfer_apply(f, sys, 3, tail_tol=1e-4)
    moments, err = function_moments(g, tol=1e-9)
    assert abs(moments.l1 - 1.0) < 2e-4 + err
    assert g.l1_tail_bound <= 1e-4


def test_transfer_boole_duality():
    sys = make_boole()
    f = indicator(1.0, 2.0)
    g = triangular_bump(0.5, 1.5, 1.0)
    for n in (1, 2, 3):
        tf = transfer_apply(f, sys, n, tail_tol=1e-6)

        def _prod(x, tf=tf, g=g):
            return tf.eval(x) * g.eval(x)

        lhs_f = TestFunction(eval=_prod, support=tf.support,
                             breakpoints=tuple(sorted(set(tf.breakpoints) | set(g.breakpoints))))
        lhs, e1 = integrate(lhs_f, tf.support, tol=1e-9)

        def _pull(x, f=f, g=g, sys=sys, n=n):
            y = np.asarray(x, dtype=float)
            for _ in range(n):
                y = sys.forward(y)
            vals = g.eval(y)
            return f.eval(x) * np.where(np.isnan(vals), 0.0, vals)

        kinks = [b for b in _pullback_kinks(sys, g.breakpoints + (0.0,), n) if 1.0 < b < 2.0]
        rhs_f = TestFunction(eval=_pull, support=f.support,
                             breakpoints=tuple(sorted(kinks)))
        rhs, e2 = integrate(rhs_f, f.support, tol=1e-9)
        assert abs(lhs - rhs) < 1e-6 * g.sup_bound + 1e-7 + e1 + e2


def _pullback_kinks(sys, pts, depth):
    level = list(pts)
    out = set(level)
    for _ in range(depth):
        nxt = []
        for p in level:
            for y, _ in sys.preimages(p):
                if math.isfinite(y):
                    nxt.append(y)
        out.update(nxt)
        level = nxt
    return sorted(out)


def test_transfer_boole_positivity():
    sys = make_boole()
    f = indicator(1.0, 2.0)
    g = transfer_apply(f, sys, 2, tail_tol=1e-3)
    rng = np.random.default_rng(17)
    xs = rng.uniform(-10.0, 10.0, 400)
    assert np.min(g.eval(xs)) >= 0.0


def test_transfer_boole_depth_limit():
    sys = make_boole()
    with pytest.raises(ValueError):
        transfer_apply(indicator(1.0, 2.0), sys, 15)


def test_transfer_composite_shifts_line_and_fixes_circle():
    sys = make_composite(step=1.0)
    f = indicator(0.0, 1.0)
    g = transfer_apply(f, sys, 2)
    xs = np.linspace(-1.0, 4.0, 83)
    assert np.array_equal(g.eval(xs), f.eval(xs - 2.0))
    c = circle_indicator(sys)
    tc = transfer_apply(c, sys, 3)
    rng = np.random.default_rng(23)
    pts = np.concatenate([CIRCLE_OFFSET + rng.uniform(0.0, 1.0, 50),
                          rng.uniform(-5.0, 5.0, 50)])
    assert np.array_equal(tc.eval(pts), c.eval(pts))
    assert tc.support.intervals == c.support.intervals


def test_transfer_translation_duality():
    sys = make_translation(0.5)
    f = triangular_bump(0.0, 1.0, 1.0)
    g = indicator(0.5, 2.0)
    tf = transfer_apply(f, sys, 3)

    def _prod(x):
        return tf.eval(x) * g.eval(x)

    lhs, e1 = integrate(
        TestFunction(eval=_prod, support=tf.support,
                     breakpoints=tf.breakpoints + g.breakpoints),
        tf.support, tol=1e-10)

    def _pull(x):
        return f.eval(x) * g.eval(np.asarray(x, dtype=float) + 1.5)

    rhs, e2 = integrate(
        TestFunction(eval=_pull, support=f.support,
                     breakpoints=f.breakpoints + tuple(b - 1.5 for b in g.breakpoints)),
        f.support, tol=1e-10)
    assert abs(lhs - rhs) < 1e-9 + e1 + e2
