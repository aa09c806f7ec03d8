"""Freezes reference E-optimal values for 20 random rank-one instances (m=3, N=10).

Solved as the semidefinite program max t s.t. sum_i lam_i s_i s_i^T >= t I,
lam in the simplex, with an interior-point SDP solver. Writes
design_atoms.csv (instance,i,s0,s1,s2) and design_reference.csv (instance,t).
"""
import csv
import pathlib

import cvxpy as cp
import numpy as np

out = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
rng = np.random.default_rng(77)

with open(out / "design_atoms.csv", "w", newline="") as fa, open(out / "design_reference.csv", "w", newline="") as fr:
    a = csv.writer(fa, lineterminator="\n")
    r = csv.writer(fr, lineterminator="\n")
    a.writerow(["instance", "i", "s0", "s1", "s2"])
    r.writerow(["instance", "t"])
    for inst in range(20):
        S = rng.normal(size=(10, 3)) / np.sqrt(3.0)
        lam = cp.Variable(10)
        t = cp.Variable()
        A = sum(lam[i] * np.outer(S[i], S[i]) for i in range(10))
        cp.Problem(cp.Maximize(t), [A - t * np.eye(3) >> 0, lam >= 0, cp.sum(lam) == 1]).solve(
            solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
        for i in range(10):
            a.writerow([inst, i] + [repr(float(x)) for x in S[i]])
        r.writerow([inst, repr(float(t.value))])
