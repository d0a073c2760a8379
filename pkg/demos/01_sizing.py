"""
Choosing m and k
================

The textbook rule picks the FPP at capacity. When the filter doubles as a
distinct counter, the quantity that matters is how many elements it misses
on the way to capacity.  Both rules live in ``bfce.sizing``.
"""
from bfce.fpp import approx_fpp
from bfce.sizing import (classical_size, cumulative_error, k_opt_cumulative,
                         mean_error_upper_bound, size_for_error_budget)

s_max = 17000

# Textbook sizing: 1% FPP once s_max elements are in.
m, k = classical_size(s_max, 0.01)
print(f"classical: m={m} k={k} fpp at capacity={approx_fpp(m, k, s_max):.5f}")

# Expected number of elements the counter never sees, per k, for a fixed m.
m_fixed = 160000
print(f"\nexpected misses up to s={s_max} with m={m_fixed}")
for k in range(4, 12):
    print(f"  k={k:2d}  {cumulative_error(m_fixed, k, s_max):8.3f}")
print(f"best k: {k_opt_cumulative(m_fixed, s_max)}")

# The cheap bound s_max * t/(1-t) is loose by a factor of about five here.
print(f"\nbound {mean_error_upper_bound(162945, 6, s_max):.1f} vs "
      f"sum {cumulative_error(162945, 6, s_max):.2f}")

# Inverse problem: smallest m that keeps the expected misses under a budget.
for budget in (100.0, 31.3, 5.0):
    m, k = size_for_error_budget(s_max, budget)
    print(f"budget {budget:6.1f} -> m={m} k={k} misses={cumulative_error(m, k, s_max):.2f}")
