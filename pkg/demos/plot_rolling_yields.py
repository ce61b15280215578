"""
Rolling tests on a yield curve
==============================

The application pipeline: daily yields are reduced to month-end values,
first differenced, and tested in overlapping ten-year blocks. Real data
would come from a CSV via :func:`panelbreak.read_csv`; here a synthetic
curve with a regime change stands in for it.
"""

from datetime import date, timedelta

import numpy as np

from panelbreak import SeriesTable, emit_results, yield_curve_pipeline

# %%
# Business-day yields for eight maturities from 1995 to 2012. The curve's
# slope starts responding to a common shock more strongly in 2008.
rng = np.random.default_rng(0)
maturities = np.array([1, 2, 3, 5, 7, 10, 20, 30])
dates, rows = [], []
level = 5.0
d = date(1995, 1, 2)
while d < date(2012, 12, 31):
    if d.weekday() < 5:
        shock = rng.standard_normal()
        load = 1.0 + (0.1 * maturities if d >= date(2008, 1, 1) else 0.0)
        level += 0.01 * shock
        rows.append(level + 0.05 * np.log(maturities) + 0.02 * load * shock
                    + 0.01 * rng.standard_normal(maturities.size))
        dates.append(d)
    d += timedelta(days=1)
table = SeriesTable(tuple(f"SVENY{m:02d}" for m in maturities), np.array(rows), tuple(dates))
print(len(table), "daily rows")

# %%
# Month-end subsampling, differencing, then 120-month windows with stride 1.
results = yield_curve_pipeline(table, window=120)
print(len(results), "windows")

# %%
# The p-value series is plain CSV, ready for any plotting tool.
text = emit_results(results)
print("\n".join(text.splitlines()[:4]))
low = [r.window_end for r in results if r.p_value < 0.05]
print("windows with p < .05:", len(low), "first:", low[0] if low else None)
