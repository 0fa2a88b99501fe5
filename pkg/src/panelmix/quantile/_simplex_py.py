"""Pure numpy fallback for the quantile-regression simplex kernel.

Implements exactly the same exterior-point vertex exchange as the
compiled kernel: at each vertex (a p-subset of interpolated rows) the
2p edge directions are scored by their exact one-sided directional
derivatives, the steepest descent edge is taken (ties broken by the
smallest basis position, relaxing upward before downward), and the step
length comes from walking the breakpoints of the piecewise-linear
objective in (t, row) order. Zero-residual rows off the basis enter the
derivative one-sidedly, so every accepted step strictly decreases the
objective and no anti-cycling device is needed.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def solve(
    X: np.ndarray,
    y: np.ndarray,
    tau: float,
    basis0: np.ndarray,
    max_iter: int,
    zero_tol: float,
    opt_tol: float,
):
    """Run the simplex from an initial nonsingular basis.

    Returns (beta, basis, iterations, status) with status 0 on optimality,
    1 on hitting the iteration cap, 2 on a lost descent direction (only
    reachable through numerically singular bases).
    """
    n, p = X.shape
    basis = np.array(basis0, dtype=np.intp)
    iterations = 0
    omt = 1.0 - tau

    while True:
        B = X[basis]
        try:
            binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return np.zeros(p), basis, iterations, 2
        beta = binv @ y[basis]
        r = y - X @ beta
        r[basis] = 0.0
        S = X @ binv

        nonbasic = np.ones(n, dtype=bool)
        nonbasic[basis] = False
        pos = nonbasic & (r > zero_tol)
        neg = nonbasic & (r < -zero_tol)
        zer = nonbasic & ~pos & ~neg

        w = np.zeros(n)
        w[pos] = -tau
        w[neg] = omt
        G = w @ S
        Sz = S[zer]
        if Sz.size:
            zp = omt * np.maximum(Sz, 0.0).sum(axis=0) + tau * np.maximum(-Sz, 0.0).sum(axis=0)
            zm = omt * np.maximum(-Sz, 0.0).sum(axis=0) + tau * np.maximum(Sz, 0.0).sum(axis=0)
        else:
            zp = zm = np.zeros(p)
        d_plus = G + omt + zp
        d_minus = -G + tau + zm
        colnorm = np.abs(S[nonbasic]).sum(axis=0)
        threshold = -opt_tol * (1.0 + colnorm)

        # interleave so argmin tie-breaks by basis position, + before -
        cand = np.empty(2 * p)
        cand[0::2] = d_plus
        cand[1::2] = d_minus
        idx = int(np.argmin(cand))
        j, sigma = divmod(idx, 2)
        dval = cand[idx]
        if dval >= threshold[j]:
            return beta, basis, iterations, 0
        if iterations >= max_iter:
            return beta, basis, iterations, 1

        sgn = 1.0 if sigma == 0 else -1.0
        s = sgn * S[:, j]
        cross = nonbasic & (np.abs(r) > zero_tol) & (np.abs(s) > 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(cross, r / s, np.inf)
        cross &= t > 0.0
        rows = np.nonzero(cross)[0]
        if rows.size == 0:
            return beta, basis, iterations, 2
        order = np.lexsort((rows, t[rows]))
        rows = rows[order]
        slope = dval
        enter = -1
        weights = np.abs(s[rows])
        cum = slope + np.cumsum(weights)
        hit = np.nonzero(cum >= 0.0)[0]
        if hit.size == 0:
            return beta, basis, iterations, 2
        enter = rows[hit[0]]

        basis[j] = enter
        iterations += 1
