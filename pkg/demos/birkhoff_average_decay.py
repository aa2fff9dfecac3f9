"""
Birkhoff averages under an infinite translation
===============================================

Translation by 1 preserves Lebesgue measure on the line and has no finite
invariant probability.  The Birkhoff average of the unit indicator over n
steps spreads mass over n disjoint translates, so its centered Poisson
integral is distributed like (N - n)/n with N Poisson of mean n.  Its star
norm therefore has the closed form

    2 n^n e^(-n) / n!   ~   sqrt(2 / pi) * n^(-1/2),

decaying like n^(-1/2) while the L1 norm stays exactly 1: the averages die
in the Poisson-Orlicz norm but not in L1.
"""

import math

from poisson_orlicz import default_config, run_experiment

cfg = default_config("birkhoff_decay", seed=6301, replicates=20_000)
rows, summary = run_experiment(cfg)

print(f"{'n':>3s} {'star (mc)':>12s} {'se':>9s} {'closed form':>12s} "
      f"{'gauge':>10s} {'l1':>6s}")
for r in rows:
    closed = 2.0 * r.n ** r.n * math.exp(-r.n) / math.factorial(r.n)
    print(f"{r.n:3d} {r.star.mean:12.6f} {r.star.std_error:9.6f} "
          f"{closed:12.6f} {r.gauge:10.6f} {r.l1:6.3f}")

slope = [v for r in rows for v in r.verdicts if v.id == "slope"]
if slope:
    print(f"\nlog-log slope verdict over n >= 8: "
          f"{'pass' if slope[0].passed else 'FAIL'} "
          f"(margin {slope[0].margin:+.4f}, expected -0.5 +- 0.1)")
print(f"all verdicts pass: {summary['all_pass']}")

# the same decay along a sparse subsequence of iterates
cfg = default_config("blum_hanson", seed=6302)
rows, summary = run_experiment(cfg)
print(f"\nsquare subsequence (k^2): depths {[r.n for r in rows]}, "
      f"all_pass={summary['all_pass']}")
