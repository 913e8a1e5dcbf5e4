"""
Covering numbers grow with the diameter
=======================================

Repeat the witness construction on longer and longer unit grids.  The number
of separated witnesses, and hence the covering number of their averages at
half the separation, grows linearly in the length: bounded spaces are the
only ones where the averaging operator can be compact.
"""
from avgcompact import dichotomy_sweep

lengths = [20, 40, 80, 160, 320]
for mode in ("l1", "linf"):
    print(f"\n{mode}:   L  centers  covering  min pairwise  floor(L/5)+1")
    for row in dichotomy_sweep(lengths, 1.0, mode):
        print(f"      {row.length:5.0f}  {row.num_centers:7d}  {row.covering_number:8d}"
              f"  {row.min_pairwise:12.6f}  {int(row.length) // 5 + 1:12d}")
