"""
The 2-SAT scaling window, with and without communities
======================================================

Clause counts m = n + c n^(2/3) sit inside the window where a random 2-SAT
formula is satisfiable with probability strictly between 0 and 1.  Three
models share the same clause length:

* two communities, one variable from each           B=2 | 1,1
* no communities at all                             B=1 | 2
* two communities, both variables from the same one B=2 | 2

The first two behave alike; the third has a lower chance of being
satisfiable because each half sees twice the density.  The full-size run is
``commsat scan --plan plans/table4.plan``; this script uses a smaller n so it
finishes in about a minute.
"""

import sys

from commsat.experiments import WINDOW_MODELS, WINDOW_REFERENCE, scan_window

n = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 200
c_values = [-1, 0, 1, 2]

cells = scan_window(n, c_values, trials=trials, seed=2024)

print(f"n = {n}, {trials} trials per cell; published values are for n = 1e6")
print(f"{'model':>14} " + " ".join(f"{'c=' + str(c):>16}" for c in c_values))
for i, (model, published) in enumerate(zip(WINDOW_MODELS, WINDOW_REFERENCE)):
    row = cells[4 * i: 4 * i + 4]
    shown = [f"{cell.sat_fraction:.3f} ({p:.3f})" for cell, p in zip(row, published)]
    print(f"{model.label():>14} " + " ".join(f"{s:>16}" for s in shown))
