"""Quantile regression via a specialized simplex on basic solutions.

The kernel is selected once at import: the compiled extension when it
built, otherwise the pure numpy twin. Setting ``PANELMIX_PURE_PYTHON=1``
in the environment forces the pure path (used by the benchmark and the
parity tests). Both kernels share pivoting rules, so results agree.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, InsufficientDataError, RankDeficiencyError
from .loss import check_loss

if os.environ.get("PANELMIX_PURE_PYTHON", "") == "1":
    from . import _simplex_py as _kernel
else:
    try:
        from . import _simplex as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _simplex_py as _kernel


def solver_backend() -> str:
    """Which kernel is active: ``"compiled"`` or ``"pure"``."""
    return _kernel.BACKEND


@dataclass
class QuantileFit:
    """One quantile-regression fit.

    ``basic_indices`` are the interpolated rows (their residuals are zero
    by construction and stored as exact zeros); ``n_negative`` and
    ``n_nonpositive`` are the residual sign counts entering the
    subgradient optimality condition
    ``n_negative <= n * tau <= n_nonpositive``.
    """

    tau: float
    beta: np.ndarray
    residuals: np.ndarray
    objective: float
    basic_indices: tuple[int, ...]
    iterations: int
    n: int
    p: int
    n_negative: int
    n_nonpositive: int
    method: str

    def sign_condition_holds(self) -> bool:
        nt = self.n * self.tau
        return self.n_negative <= nt + 1e-9 and self.n_nonpositive >= nt - 1e-9

    def to_json_record(self) -> dict:
        return {
            "tau": self.tau,
            "beta": [float(b) for b in self.beta],
            "objective": self.objective,
            "basic_indices": list(self.basic_indices),
            "iterations": self.iterations,
            "n": self.n,
            "p": self.p,
            "method": self.method,
        }


def _check_design(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("y must be 1-D with one entry per row of X")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("design contains non-finite values")
    if n < p:
        raise InsufficientDataError(f"need at least p={p} rows, got {n}")
    # QR without pivoting: a tiny diagonal names the first dependent column
    R = np.linalg.qr(X, mode="r")
    scale = np.max(np.abs(X), axis=0)
    for j in range(p):
        if abs(R[j, j]) <= 1e-10 * max(1.0, scale[j]):
            raise RankDeficiencyError(
                f"design column {j} is linearly dependent on earlier columns",
                column=j,
            )


def _initial_basis(X: np.ndarray) -> np.ndarray:
    """First p rows (by index) spanning the row space; deterministic."""
    n, p = X.shape
    Q = np.zeros((p, p))
    chosen: list[int] = []
    for i in range(n):
        v = X[i].astype(float)
        if chosen:
            Qc = Q[: len(chosen)]
            v = v - Qc.T @ (Qc @ v)
            v = v - Qc.T @ (Qc @ v)  # second pass keeps orthogonality tight
        norm = np.linalg.norm(v)
        if norm > 1e-10 * (1.0 + np.linalg.norm(X[i])):
            Q[len(chosen)] = v / norm
            chosen.append(i)
            if len(chosen) == p:
                return np.asarray(chosen, dtype=np.int64)
    raise RankDeficiencyError("could not assemble a nonsingular starting basis")


def qr_fit(X, y, tau: float, max_iter: int | None = None) -> QuantileFit:
    """Minimize sum of check losses over coefficients.

    Parameters
    ----------
    X : (n, p) array
        Full column rank design.
    y : (n,) array
        Response.
    tau : float
        Quantile level in (0, 1).
    max_iter : int, optional
        Pivot cap; defaults to 50 * n.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    # the kernel takes writable memoryviews; dataset accessors hand out
    # read-only views, so copy those rather than reject them
    if not X.flags.writeable:
        X = X.copy()
    if not y.flags.writeable:
        y = y.copy()
    _check_design(X, y)
    n, p = X.shape
    if max_iter is None:
        max_iter = 50 * n
    zero_tol = 1e-10 * (1.0 + float(np.max(np.abs(y))))
    basis0 = _initial_basis(X)
    beta, basis, iterations, status = _kernel.solve(
        X, y, tau, basis0, max_iter, zero_tol, 1e-11
    )
    if status == 1:
        raise ConvergenceError(
            f"simplex exceeded the {max_iter} pivot cap (n={n}, p={p}, tau={tau})"
        )
    if status != 0:
        raise ConvergenceError("simplex lost its descent direction; basis became singular")

    residuals = y - X @ beta
    residuals[basis] = 0.0  # interpolated rows are zero by construction
    # rows that duplicate a basic row keep sub-zero_tol float fuzz; snap
    # them so the sign counts match the kernel's zero classification
    residuals[np.abs(residuals) <= zero_tol] = 0.0
    objective = float(np.sum(check_loss(residuals, tau)))
    fit = QuantileFit(
        tau=tau,
        beta=np.asarray(beta, dtype=float),
        residuals=residuals,
        objective=objective,
        basic_indices=tuple(int(b) for b in sorted(basis)),
        iterations=int(iterations),
        n=n,
        p=p,
        n_negative=int(np.sum(residuals < 0)),
        n_nonpositive=int(np.sum(residuals <= 0)),
        method=f"simplex-{_kernel.BACKEND}",
    )
    # the sign condition is implied by vertex optimality whenever the
    # constant vector lies in the column span; verify it there
    ones = np.ones(n)
    coef, _, _, _ = np.linalg.lstsq(X, ones, rcond=None)
    if np.max(np.abs(X @ coef - ones)) < 1e-8 and not fit.sign_condition_holds():
        raise ConvergenceError(
            "optimality certificate violated "
            f"(neg={fit.n_negative}, nonpos={fit.n_nonpositive}, n*tau={n * tau})"
        )
    return fit
