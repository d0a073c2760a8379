"""
Past capacity, and starting with a batch
========================================

Keep filling beyond the design load and watch the corrected counter lose
its edge over the baseline.  Then compare a batch start of 50 elements with
plain one-by-one filling on the same streams.
"""
import sys

from bfce import overload_sweep, run_batch_experiment
from bfce.fpp import approx_fpp

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 50
m, k = 162945, 6

sweep = overload_sweep(m, k, trials, list(range(15000, 30001, 2500)))
print(f"{'s':>6} {'fpp':>7} {'MAE corr':>9} {'MAE base':>9} {'pred std':>9} {'obs std':>8}")
for s in sweep.checkpoints():
    c, b = sweep.row("corrected", s), sweep.row("papapetrou", s)
    print(f"{s:6d} {approx_fpp(m, k, s):7.4f} {c.mae:9.2f} {b.mae:9.2f} "
          f"{c.predicted_std:9.2f} {c.std_true_n:8.2f}")

# With m this large the first 50 insertions almost never collide, so both
# arms end up with the same counter on every stream.
res = run_batch_experiment(m, k, 50, trials, 16970)
print(f"\nbatch start {res.mean_error_batch:.2f} vs one-by-one {res.mean_error_one_by_one:.2f}")
