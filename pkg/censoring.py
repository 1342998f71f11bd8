"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: CENSORING DENSITY
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

The censoring density g(c|z) weights every observable loss term by
1 / g(C|Z). It is either known analytically or estimated from the
monitoring times with a normal-kernel density estimate:

    g_hat(c) = (1 / (h n)) * sum_i phi((C_i - c) / h)

Evaluation always clamps from below at `floor` (default 1e-3). Without the
floor the weights (1 - delta) / g blow up near the edge of the support.

VARIANTS:
  known   any callable (c, z) -> density; may depend on z.
          Serializable when built from KNOWN_DENSITY_FORMULAS.
  kde     marginal in c, ignores z. Stores the raw samples so evaluation
          after a save/load round trip is exact.

BANDWIDTH:
  silverman_beta   h = 1.06 * s * n^(-1/(2 beta + 1)),
                   s = min(sample std, IQR / 1.34), s := 1e-3 when zero
  fixed            h = fixed_h

The clamp counter is the only mutable state on a model and is guarded by
a lock, so one model can be evaluated from several worker threads.
"""

import math
import os
import sys
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from csd_errors import DataError

# ============================================================
# CONFIG
# ============================================================
DEFAULT_DENSITY_FLOOR = float(os.environ.get('CSD_DENSITY_FLOOR', '1e-3'))
DEFAULT_KDE_BETA      = float(os.environ.get('CSD_KDE_BETA', '2'))
KDE_QUERY_CHUNK       = int(os.environ.get('CSD_KDE_CHUNK', '2048'))
QUIET                 = os.environ.get('CSD_SVM_QUIET', '').lower() in ('1', 'true', 'yes')

SILVERMAN_CONSTANT = 1.06
IQR_TO_SIGMA       = 1.34
DEGENERATE_SCALE   = 1e-3

KIND_KNOWN = 'known'
KIND_KDE   = 'kde'

RULE_SILVERMAN_BETA = 'silverman_beta'
RULE_FIXED          = 'fixed'

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

LOG_PREFIX = '[CSD Censoring]'


def _log(message):
    if not QUIET:
        print(f"{LOG_PREFIX} {message}", file=sys.stderr, flush=True)


# ============================================================
# BANDWIDTH RULES
# ============================================================
@dataclass(frozen=True)
class BandwidthRule:
    kind: str = RULE_SILVERMAN_BETA
    beta: float = DEFAULT_KDE_BETA
    fixed_h: Optional[float] = None

    def __post_init__(self):
        if self.kind == RULE_SILVERMAN_BETA:
            if not np.isfinite(self.beta) or self.beta < 1:
                raise DataError(f"smoothness order beta must be >= 1, got {self.beta!r}")
        elif self.kind == RULE_FIXED:
            if self.fixed_h is None or not np.isfinite(self.fixed_h) or self.fixed_h <= 0:
                raise DataError(f"fixed bandwidth must be positive and finite, got {self.fixed_h!r}")
        else:
            raise DataError(f"unknown bandwidth rule {self.kind!r}")

    @classmethod
    def silverman(cls, beta=DEFAULT_KDE_BETA):
        return cls(RULE_SILVERMAN_BETA, beta=float(beta))

    @classmethod
    def fixed(cls, h):
        return cls(RULE_FIXED, fixed_h=float(h))

    def to_dict(self):
        if self.kind == RULE_FIXED:
            return {'kind': self.kind, 'fixed_h': self.fixed_h}
        return {'kind': self.kind, 'beta': self.beta}

    @classmethod
    def from_dict(cls, payload):
        if payload['kind'] == RULE_FIXED:
            return cls.fixed(payload['fixed_h'])
        return cls.silverman(payload.get('beta', DEFAULT_KDE_BETA))


def robust_scale(samples):
    """min(sample std, IQR / 1.34), replaced by 1e-3 when it is zero."""
    x = np.asarray(samples, dtype=float).ravel()
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    q75, q25 = np.percentile(x, [75, 25])
    scale = min(std, float(q75 - q25) / IQR_TO_SIGMA)
    if not np.isfinite(scale):
        raise DataError("sample standard deviation is not finite")
    return scale if scale > 0 else DEGENERATE_SCALE


def bandwidth_from_scale(scale, n, beta=DEFAULT_KDE_BETA):
    """1.06 * scale * n^(-1/(2 beta + 1))."""
    return SILVERMAN_CONSTANT * scale * float(n) ** (-1.0 / (2.0 * beta + 1.0))


def select_bandwidth(samples, rule):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DataError("cannot select a bandwidth from an empty sample")
    if rule.kind == RULE_FIXED:
        return rule.fixed_h
    h = bandwidth_from_scale(robust_scale(x), x.size, rule.beta)
    if not np.isfinite(h) or h <= 0:
        raise DataError(f"bandwidth rule produced an invalid value {h!r}")
    return h


# ============================================================
# KNOWN DENSITY FORMULAS (serializable known models)
# ============================================================
def _uniform_density(tau):
    if not np.isfinite(tau) or tau <= 0:
        raise DataError(f"uniform censoring needs tau > 0, got {tau!r}")
    value = 1.0 / tau

    def density(c, z):
        return np.full(np.shape(c), value, dtype=float)

    return density


def _constant_density(value):
    if not np.isfinite(value) or value < 0:
        raise DataError(f"constant density must be nonnegative, got {value!r}")

    def density(c, z):
        return np.full(np.shape(c), float(value), dtype=float)

    return density


# formula tag -> (builder taking **params, required parameter names)
KNOWN_DENSITY_FORMULAS = {
    'uniform':  (lambda tau: _uniform_density(float(tau)), ('tau',)),
    'constant': (lambda value: _constant_density(float(value)), ('value',)),
}


# ============================================================
# CENSORING MODEL
# ============================================================
class CensoringModel:
    """
    Known or KDE censoring density with a positivity floor.

    Build through known_censoring / uniform_censoring / fit_kde rather than
    calling the constructor directly.
    """

    def __init__(self, kind, floor, known_density=None, vectorized=False,
                 samples=None, bandwidth=None, rule=None, formula=None,
                 formula_params=None):
        if not np.isfinite(floor) or floor <= 0:
            raise DataError(f"density floor must be positive, got {floor!r}")
        if kind == KIND_KNOWN:
            if known_density is None:
                raise DataError("known censoring model needs a density function")
        elif kind == KIND_KDE:
            samples = np.asarray(samples, dtype=float).ravel()
            if samples.size == 0:
                raise DataError("kde censoring model needs at least one sample")
            if bandwidth is None or not np.isfinite(bandwidth) or bandwidth <= 0:
                raise DataError(f"kde bandwidth must be positive, got {bandwidth!r}")
            samples.setflags(write=False)
        else:
            raise DataError(f"unknown censoring model kind {kind!r}")

        self.kind = kind
        self.floor = float(floor)
        self.known_density = known_density
        self.vectorized = vectorized
        self.samples = samples if kind == KIND_KDE else None
        self.bandwidth = float(bandwidth) if kind == KIND_KDE else None
        self.rule = rule
        self.formula = formula
        self.formula_params = dict(formula_params or {})

        self._clamp_count = 0
        self._clamp_lock = threading.Lock()

    # ---------------------------------------------------------------
    # diagnostics
    # ---------------------------------------------------------------
    @property
    def clamp_count(self):
        with self._clamp_lock:
            return self._clamp_count

    def reset_clamp_count(self):
        with self._clamp_lock:
            self._clamp_count = 0

    def _record_clamps(self, count):
        if count:
            with self._clamp_lock:
                self._clamp_count += int(count)

    # ---------------------------------------------------------------
    # evaluation
    # ---------------------------------------------------------------
    def raw_density(self, times, covariates=None):
        """Unclamped density at each time (vectorized)."""
        c = np.atleast_1d(np.asarray(times, dtype=float))
        if self.kind == KIND_KDE:
            return _kde_values(self.samples, self.bandwidth, c)

        if self.vectorized:
            return np.asarray(self.known_density(c, covariates), dtype=float).reshape(c.shape)
        if covariates is None:
            return np.array([float(self.known_density(ci, None)) for ci in c])
        Z = np.asarray(covariates, dtype=float)
        if Z.ndim == 1:
            Z = Z.reshape(c.shape[0], -1)
        return np.array([float(self.known_density(ci, zi)) for ci, zi in zip(c, Z)])

    def density_values(self, times, covariates=None):
        """Clamped density at each (time, covariate) pair; clamps are counted."""
        raw = self.raw_density(times, covariates)
        clamped = raw < self.floor
        self._record_clamps(np.count_nonzero(clamped))
        return np.where(clamped, self.floor, raw)

    # ---------------------------------------------------------------
    # persistence
    # ---------------------------------------------------------------
    def descriptor(self):
        """JSON-ready description; known models must come from a registered formula."""
        if self.kind == KIND_KDE:
            return {
                'kind':      KIND_KDE,
                'samples':   [float(s) for s in self.samples],
                'bandwidth': self.bandwidth,
                'floor':     self.floor,
                'rule':      self.rule.to_dict() if self.rule else None,
            }
        if self.formula is None:
            raise DataError("known censoring density has no registered formula and cannot be serialized")
        return {
            'kind':    KIND_KNOWN,
            'formula': self.formula,
            'params':  dict(self.formula_params),
            'floor':   self.floor,
        }

    def summary(self):
        if self.kind == KIND_KDE:
            return f"kde(n={self.samples.size}, h={self.bandwidth:.4g}, floor={self.floor:g})"
        tag = self.formula or 'custom'
        return f"known:{tag}({self.formula_params}, floor={self.floor:g})"


def _kde_values(samples, h, queries):
    n = samples.size
    out = np.empty(queries.shape[0], dtype=float)
    for start in range(0, queries.shape[0], KDE_QUERY_CHUNK):
        q = queries[start:start + KDE_QUERY_CHUNK]
        u = (samples[None, :] - q[:, None]) / h
        out[start:start + KDE_QUERY_CHUNK] = np.exp(-0.5 * u * u).sum(axis=1)
    return out * (_INV_SQRT_2PI / (h * n))


# ============================================================
# CONSTRUCTORS
# ============================================================
def known_censoring(density, floor=DEFAULT_DENSITY_FLOOR, vectorized=False):
    """Wrap an arbitrary g(c|z). Not serializable."""
    return CensoringModel(KIND_KNOWN, floor, known_density=density, vectorized=vectorized)


def known_from_formula(formula, params, floor=DEFAULT_DENSITY_FLOOR):
    if formula not in KNOWN_DENSITY_FORMULAS:
        raise DataError(f"unknown known-density formula {formula!r}; "
                        f"expected one of {sorted(KNOWN_DENSITY_FORMULAS)}")
    builder, required = KNOWN_DENSITY_FORMULAS[formula]
    missing = [p for p in required if p not in params]
    if missing:
        raise DataError(f"formula {formula!r} is missing parameter(s) {missing}")
    density = builder(**{p: params[p] for p in required})
    return CensoringModel(KIND_KNOWN, floor, known_density=density, vectorized=True,
                          formula=formula, formula_params={p: float(params[p]) for p in required})


def uniform_censoring(tau, floor=DEFAULT_DENSITY_FLOOR):
    """g(c|z) = 1/tau on [0, tau]: the monitoring law of every simulation setting."""
    return known_from_formula('uniform', {'tau': tau}, floor)


def fit_kde(samples, rule=None, floor=DEFAULT_DENSITY_FLOOR):
    rule = rule or BandwidthRule.silverman()
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DataError("cannot fit a density estimate to an empty sample")
    h = select_bandwidth(x, rule)
    model = CensoringModel(KIND_KDE, floor, samples=x.copy(), bandwidth=h, rule=rule)
    _log(f"KDE fitted: n={x.size}, h={h:.5g}, floor={floor:g}")
    return model


def model_from_descriptor(payload):
    """Inverse of CensoringModel.descriptor()."""
    try:
        kind = payload['kind']
        if kind == KIND_KDE:
            rule = BandwidthRule.from_dict(payload['rule']) if payload.get('rule') else None
            return CensoringModel(KIND_KDE, payload['floor'], samples=payload['samples'],
                                  bandwidth=payload['bandwidth'], rule=rule)
        if kind == KIND_KNOWN:
            return known_from_formula(payload['formula'], payload['params'], payload['floor'])
    except (KeyError, TypeError) as e:
        raise DataError(f"malformed censoring descriptor: {type(e).__name__}: {e}") from e
    raise DataError(f"unknown censoring model kind {payload.get('kind')!r}")


# ============================================================
# EVALUATION
# ============================================================
def density_eval(model, c, z=None):
    """Clamped density at one (c, z) point; always >= model.floor."""
    covariates = None if z is None else np.atleast_2d(np.asarray(z, dtype=float))
    return float(model.density_values(np.array([float(c)]), covariates)[0])


def kde_mean_abs_error(model, true_density=1.0):
    """(1/n) sum |g_hat(C_i) - g(C_i)| over the model's own samples, unclamped."""
    if model.kind != KIND_KDE:
        raise DataError("mean absolute error is defined for kde models only")
    return float(np.mean(np.abs(model.raw_density(model.samples) - true_density)))
