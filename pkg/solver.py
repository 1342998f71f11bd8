"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: CLOSED-FORM SOLVER
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

Learns f(z) ~ E[T ^ tau | Z = z] from current status triplets (Z, C, delta).

OBSERVABLE LOSS (per record):
    L(s) = 2 v (C - s) + s^2,        v = (1 - delta) / g(C|Z)

When g is the true monitoring density on [0, tau], integrating over C gives
2 int_0^tau S(c|z)(c - s) dc = E[(T ^ tau)^2 | z] - 2 s E[T ^ tau | z], so
the expected loss is exactly the quadratic risk E[(T ^ tau - f(Z))^2] and
minimizing it targets the conditional expectation.

DECISION FUNCTION (representer form):
    f(z) = sum_j alpha_j k(z, z_j) + b

minimizes  lambda ||f||_H^2 + (1/n) sum_i L_i(f(z_i)).

LINEAR SYSTEMS (C_lambda = 1 / (n lambda)):
  no intercept    (K + n lambda I) alpha = v                    Cholesky
  intercept       [[K + n lambda I, 1], [1^T, 0]] [alpha; b] = [v; 0]
                                                   symmetric indefinite

The loss is linear in (C - f), so the times C_i enter the solution only
through g(C_i|Z_i). Two datasets that differ only in their times but share
delta and the density values produce bitwise identical coefficients.

`loss_scale` rescales the loss term, e.g. 1 / tau^2 for the normalized
quadratic loss. Fitting with loss_scale = 1/tau^2 and lambda / tau^2
returns the same coefficients as the unnormalized problem.
"""

import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from csd_errors import DataError, NumericalError
from kernel_core import KernelSpec, as_points, cross_kernel, gram_matrix

# ============================================================
# CONFIG
# ============================================================
RESIDUAL_TOL = float(os.environ.get('CSD_SOLVER_RESIDUAL_TOL', '1e-8'))
QUIET        = os.environ.get('CSD_SVM_QUIET', '').lower() in ('1', 'true', 'yes')

LOG_PREFIX = '[CSD Solver]'


def _log(message):
    if not QUIET:
        print(f"{LOG_PREFIX} {message}", file=sys.stderr, flush=True)


# ============================================================
# DATA
# ============================================================
@dataclass(frozen=True, eq=False)
class Dataset:
    """n current status records: covariates Z (n, d), times C, status delta, horizon tau."""

    covariates: np.ndarray
    times: np.ndarray
    status: np.ndarray
    tau: float

    def __post_init__(self):
        Z = as_points(self.covariates, name='covariates')
        c = np.asarray(self.times, dtype=float).ravel()
        s = np.asarray(self.status).ravel()
        n = Z.shape[0]
        if n < 1 or Z.shape[1] < 1:
            raise DataError("dataset needs n >= 1 records with d >= 1 covariates")
        if c.shape[0] != n or s.shape[0] != n:
            raise DataError(f"column lengths differ: covariates {n}, times {c.shape[0]}, status {s.shape[0]}")
        tau = float(self.tau)
        if not np.isfinite(tau) or tau <= 0:
            raise DataError(f"tau must be positive, got {self.tau!r}")
        if not np.all(np.isfinite(c)) or np.any(c < 0) or np.any(c > tau):
            raise DataError(f"monitoring times must lie in [0, {tau:g}]")
        if not np.all(np.isin(s, (0, 1))):
            raise DataError("status entries must be 0 or 1")
        s = s.astype(np.int8)
        for arr in (Z, c, s):
            arr.setflags(write=False)
        object.__setattr__(self, 'covariates', Z)
        object.__setattr__(self, 'times', c)
        object.__setattr__(self, 'status', s)
        object.__setattr__(self, 'tau', tau)

    @property
    def n(self):
        return self.covariates.shape[0]

    @property
    def d(self):
        return self.covariates.shape[1]

    def subset(self, index):
        index = np.asarray(index, dtype=int)
        return Dataset(self.covariates[index], self.times[index], self.status[index], self.tau)


# ============================================================
# FITTED MODEL
# ============================================================
@dataclass(frozen=True, eq=False)
class FittedModel:
    kernel: KernelSpec
    support: np.ndarray
    alpha: np.ndarray
    intercept: Optional[float]
    lam: float
    n_train: int
    censoring: dict = field(default_factory=dict)
    residual: float = 0.0

    def __post_init__(self):
        support = np.array(self.support, dtype=float)
        alpha = np.array(self.alpha, dtype=float).ravel()
        if support.ndim != 2 or support.shape[0] != alpha.shape[0]:
            raise DataError(f"support {support.shape} does not match alpha {alpha.shape}")
        support.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, 'support', support)
        object.__setattr__(self, 'alpha', alpha)

    @property
    def d(self):
        return self.support.shape[1]

    @property
    def c_lambda(self):
        """C_lambda = 1 / (n lambda)."""
        return 1.0 / (self.n_train * self.lam)

    def predict(self, query):
        return predict(self, query)

    def rkhs_norm_sq(self):
        """alpha^T K alpha."""
        K = gram_matrix(self.kernel, self.support)
        return float(self.alpha @ K @ self.alpha)


# ============================================================
# WEIGHTS AND RISKS
# ============================================================
def pseudo_targets(data, cens):
    """v_i = (1 - delta_i) / g(c_i|z_i); exactly 0 when delta_i = 1."""
    g = cens.density_values(data.times, data.covariates)
    return (1 - data.status).astype(float) / g


def _check_predictions(predictions, data):
    f = np.asarray(predictions, dtype=float).ravel()
    if f.shape[0] != data.n:
        raise DataError(f"{f.shape[0]} predictions for {data.n} records")
    return f


def positivity_shift(data, cens):
    """a = max_i (1 - delta_i) / g(c_i|z_i)^2."""
    g = cens.density_values(data.times, data.covariates)
    return float(np.max((1 - data.status) / (g * g)))


def _risk_from_targets(f, v, times):
    return float(np.mean(2.0 * v * (times - f) + f * f))


def censored_empirical_risk(predictions, data, cens, shift=False):
    """
    (1/n) sum [2 v_i (c_i - f_i) + f_i^2], optionally plus the positivity
    shift. The shift is constant on a dataset and never changes a ranking.
    """
    f = _check_predictions(predictions, data)
    risk = _risk_from_targets(f, pseudo_targets(data, cens), data.times)
    if shift:
        risk += positivity_shift(data, cens)
    return risk


def regularized_objective(alpha, b, data, kernel, lam, cens, loss_scale=1.0):
    """lambda alpha^T K alpha + loss_scale * censored risk of K alpha + b."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.shape[0] != data.n:
        raise DataError(f"alpha has {alpha.shape[0]} entries for {data.n} records")
    K = gram_matrix(kernel, data.covariates)
    f = K @ alpha + (0.0 if b is None else float(b))
    return float(lam * alpha @ K @ alpha) + loss_scale * censored_empirical_risk(f, data, cens)


# ============================================================
# FIT
# ============================================================
def _relative_residual(A, x, rhs):
    return float(np.linalg.norm(A @ x - rhs) / max(1.0, np.linalg.norm(rhs)))


def _solve_spd(A, rhs):
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Cholesky factorization failed: {e}", condition=np.linalg.cond(A)) from e
    x = linalg.cho_solve(factor, rhs)
    return x, (lambda r: linalg.cho_solve(factor, r))


def _solve_bordered(M, rhs):
    # assume_a='sym' routes through LAPACK ?sysv (Bunch-Kaufman LDL^T)
    try:
        x = linalg.solve(M, rhs, assume_a='sym')
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"singular bordered system: {e}", condition=np.linalg.cond(M)) from e
    return x, (lambda r: linalg.solve(M, r, assume_a='sym'))


def fit(data, kernel, lam, cens, with_intercept=True, loss_scale=1.0):
    """
    Closed-form CSD-SVM fit.

    Raises NumericalError (with a condition estimate) if the system cannot
    be solved to the relative residual RESIDUAL_TOL after one step of
    iterative refinement.
    """
    if not np.isfinite(lam) or lam <= 0:
        raise DataError(f"lambda must be positive, got {lam!r}")
    if not np.isfinite(loss_scale) or loss_scale <= 0:
        raise DataError(f"loss scale must be positive, got {loss_scale!r}")
    n = data.n
    if with_intercept and n < 2:
        raise DataError("a fit with intercept needs at least 2 records")

    K = gram_matrix(kernel, data.covariates)
    v = pseudo_targets(data, cens)
    A = K + (n * lam / loss_scale) * np.eye(n)

    if with_intercept:
        M = np.empty((n + 1, n + 1))
        M[:n, :n] = A
        M[:n, n] = 1.0
        M[n, :n] = 1.0
        M[n, n] = 0.0
        rhs = np.append(v, 0.0)
        sol, resolve = _solve_bordered(M, rhs)
        system = M
    else:
        rhs = v
        sol, resolve = _solve_spd(A, rhs)
        system = A

    residual = _relative_residual(system, sol, rhs)
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        _log(f"⚠️ residual {residual:.3e} above {RESIDUAL_TOL:g}, refining once")
        sol = sol + resolve(rhs - system @ sol)
        residual = _relative_residual(system, sol, rhs)
        if not np.isfinite(residual) or residual > RESIDUAL_TOL:
            raise NumericalError("linear system missed its residual tolerance",
                                 condition=np.linalg.cond(system), residual=residual)

    if with_intercept:
        alpha, b = sol[:n], float(sol[n])
    else:
        alpha, b = sol, None

    return FittedModel(
        kernel=kernel,
        support=data.covariates,
        alpha=alpha,
        intercept=b,
        lam=float(lam),
        n_train=n,
        censoring=_censoring_metadata(cens),
        residual=residual,
    )


def _censoring_metadata(cens):
    try:
        return cens.descriptor()
    except DataError:
        return {'kind': cens.kind, 'formula': None}


# ============================================================
# PREDICT
# ============================================================
def predict(model, query):
    """f(z) = sum_j alpha_j k(z, support_j) + b for each query row."""
    Kq = cross_kernel(model.kernel, model.support, as_points(query, dim=model.d, name='query'))
    f = Kq @ model.alpha
    if model.intercept is not None:
        f = f + model.intercept
    return f
