"""
Accuracy at capacity
====================

Repeat the fill of a 162945-bit filter to s=17000 on independent streams and
tabulate bias, MAE and RMSE of the corrected counter and of the fill-ratio
baseline.  Set BFCE_THREADS to spread trials across processes; the table
does not depend on it.
"""
import sys

from bfce import UniverseSpec, run_experiment

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 100

for p in (1.0, 0.6):
    metrics = run_experiment(162945, 6, UniverseSpec(17000, p), trials, [17000], 17000)
    print(f"\np_smax={p}  ({trials} trials)")
    print(f"{'estimator':>11} {'MBE':>8} {'std':>8} {'MAE':>8} {'RMSE':>8}")
    for est in ("corrected", "papapetrou"):
        r = metrics.row(est, 17000)
        print(f"{est:>11} {r.mbe:8.2f} {r.std_of_bias:8.2f} {r.mae:8.2f} {r.rmse:8.2f}")
    r = metrics.row("corrected", 17000)
    print(f"mean stream length {r.mean_stream_len:.1f}; "
          f"predicted std {r.predicted_std:.2f} vs observed {r.std_true_n:.2f}")
