"""Exhaustive quantile-regression oracle for small problems.

A minimizer of the check loss interpolates some p observations when the
design has full column rank, so enumerating all p-subsets and keeping the
best interpolant is exact. Only feasible for tiny problems; the solver
tests use this as their independent reference.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..errors import RankDeficiencyError
from .loss import check_loss
from .solver import QuantileFit

MAX_N = 14
MAX_P = 3


def qr_fit_bruteforce(X, y, tau: float) -> QuantileFit:
    """Minimize summed check loss by enumerating basic solutions.

    Subsets are visited in lexicographic index order and ties keep the
    first (smallest) subset, matching the solver's tie-breaking.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n, p = X.shape
    if n > MAX_N or p > MAX_P:
        raise ValueError(f"bruteforce limited to n <= {MAX_N}, p <= {MAX_P}")
    if y.shape[0] != n:
        raise ValueError("X and y lengths differ")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")

    best_obj = np.inf
    best_beta = None
    best_subset = None
    tried = 0
    for subset in combinations(range(n), p):
        Xs = X[list(subset)]
        if np.linalg.matrix_rank(Xs, tol=1e-10) < p:
            continue
        tried += 1
        beta = np.linalg.solve(Xs, y[list(subset)])
        resid = y - X @ beta
        resid[list(subset)] = 0.0  # interpolated by construction
        obj = float(np.sum(check_loss(resid, tau)))
        if obj < best_obj:
            best_obj = obj
            best_beta = beta
            best_subset = subset
    if best_beta is None:
        raise RankDeficiencyError("no nonsingular p-subset of rows exists")

    residuals = y - X @ best_beta
    residuals[list(best_subset)] = 0.0
    return QuantileFit(
        tau=tau,
        beta=best_beta,
        residuals=residuals,
        objective=best_obj,
        basic_indices=tuple(best_subset),
        iterations=tried,
        n=n,
        p=p,
        n_negative=int(np.sum(residuals < 0)),
        n_nonpositive=int(np.sum(residuals <= 0)),
        method="bruteforce",
    )
