"""Where a restricted hypothesis class sinks the single-stage baseline.

Two parallel point ribbons, one labeled vertex each.  The two-stage cut
pipeline first propagates the labels over the graph (each ribbon becomes
uniformly positive or negative), then fits a max-margin boundary to those
induced labels: a horizontal line that separates the ribbons exactly.  The
single-stage manifold-regularized trainer with a linear kernel cannot do
this for any smoothness weight: its boundary always passes through the
origin between the two antipodal labeled points, so part of each ribbon is
misclassified.  The radial kernel gives both methods enough capacity.
"""

import os

from graphssl import aggregate, run_synthetic_study
from graphssl.harness import save_probe_csv

table, probes = run_synthetic_study(
    gamma_g_values=(1e-4, 1e-2, 1.0, 1e2, 1e12),
    kernels=("linear", "rbf"),
    gamma=0.1,
    epsilon=0.01,
)

print("training error against the true ribbon labels")
print(f"{'kernel':>8} {'gamma_g':>10} {'cut (gc)':>10} {'manifold (mr)':>14}")
rows = {(r.algorithm, r.kernel, r.gamma_g): r for r in table.rows}
for kernel in ("linear", "rbf"):
    for gg in (1e-4, 1e-2, 1.0, 1e2, 1e12):
        gc = rows[("gc", kernel, gg)].test_error
        mr = rows[("mr", kernel, gg)].test_error
        print(f"{kernel:>8} {gg:>10g} {gc:>10.3f} {mr:>14.3f}")

print("\nnotes:")
print(" - gc with small gamma_g reaches error 0: induced labels = ribbon labels")
print(" - gc at gamma_g = 1e12 degenerates to 2-point supervised training")
print(" - mr-linear never reaches 0, at any smoothness weight")

print("\naggregated over the sweep:")
for rec in aggregate(table):
    print(f"  {rec['algorithm']:>3} {rec['kernel']:>7}: "
          f"mean error {rec['mean_test_error']:.3f} over {rec['count']} cells")

os.makedirs("ribbon_probes", exist_ok=True)
for (algo, kernel, gg), scores in sorted(probes["scores"].items()):
    path = os.path.join("ribbon_probes", f"{algo}_{kernel}_gg{gg:g}.csv")
    save_probe_csv(path, probes["x1"], probes["x2"], scores)
print(f"\nwrote {len(probes['scores'])} probe-grid score files to ribbon_probes/ "
      "(x1, x2, score; ready for contour plotting)")
