"""Freezes scipy's Tukey HSD on 20 synthetic 4-group problems.

Writes tukey_groups.csv (problem,group,value) and tukey_reference.csv
(problem,group1,group2,meandiff,p_adj,reject) next to the other fixtures.
meandiff follows the mean(group2) - mean(group1) convention.
"""
import csv
import pathlib

import numpy as np
from scipy import stats

out = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
rng = np.random.default_rng(20240611)

with open(out / "tukey_groups.csv", "w", newline="") as fg, open(out / "tukey_reference.csv", "w", newline="") as fr:
    g = csv.writer(fg, lineterminator="\n")
    r = csv.writer(fr, lineterminator="\n")
    g.writerow(["problem", "group", "value"])
    r.writerow(["problem", "group1", "group2", "meandiff", "p_adj", "reject"])
    for p in range(20):
        n = int(rng.integers(8, 40))
        scale = float(rng.uniform(0.5, 2.0))
        means = rng.normal(0.0, 0.6 * scale, size=4)
        groups = [rng.normal(m, scale, size=n) for m in means]
        for k, values in enumerate(groups):
            for v in values:
                g.writerow([p, k, repr(float(v))])
        res = stats.tukey_hsd(*groups)
        for i in range(4):
            for j in range(i + 1, 4):
                diff = float(groups[j].mean() - groups[i].mean())
                pv = float(res.pvalue[i, j])
                r.writerow([p, i, j, repr(diff), repr(pv), "true" if pv < 0.05 else "false"])
