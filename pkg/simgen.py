"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: SIMULATION HARNESS
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

Four data-generating mechanisms with the latent failure times kept, Bayes
oracles for each, and a seeded Monte Carlo experiment runner.

SETTINGS (Z ~ U[0,1]^d, C ~ U[0,tau], T truncated to [0,tau]):
  weibull          d=1,  tau=1   Weibull(scale = exp(-z/2), shape = 2)
  multiweibull     d=10, tau=2   Weibull(scale = -0.5 z1 + 2 z2 - z3, shape = 2)
                                 scale clamped below at 1e-3 (it goes
                                 negative on part of the cube)
  multilognormal   d=10, tau=7   LogNormal(mu = 0.5 (0.3 z1 + 0.5 z2 + 0.2 z3), sigma = 1)
  triangle         d=1,  tau=8   T = 4 + 6z + eps (z <= 0.5), 10 - 6z + eps (z > 0.5),
                                 eps ~ N(0, 1)

delta = 1{T ^ tau <= C}, computed from the truncated time.

ORACLES:
  bayes_predict(z)   E[T ^ tau | z] = int_0^tau S(t|z) dt   (adaptive quadrature)
  bayes_risk         E_Z[Var(T ^ tau | Z)]
                     1 active covariate   nested adaptive quadrature
                     3 active covariates  Gauss-Legendre product rule over the
                                          active cube, closed-form truncated moments

RISK:
  evaluate_risk = test MSE against the latent truncated T. Its minimizer is
  the conditional expectation and its minimum is the Bayes risk.

SEEDS:
  Every draw comes from a Philox (counter-based) stream keyed by
  derive_seed(master_seed, setting, n, rep, tag) with tag in
  {'train', 'test', 'cv'}. Reps and tags never share a stream, so the
  test set can change without touching the training data.
"""

import hashlib
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy import integrate
from scipy.special import erf, ndtr, ndtri

from censoring import DEFAULT_DENSITY_FLOOR, BandwidthRule, fit_kde, uniform_censoring
from csd_errors import DataError
from kernel_core import KIND_LINEAR, KIND_RBF, as_points
from model_select import DEFAULT_FOLDS, default_grid, select_and_refit
from solver import Dataset

# ============================================================
# CONFIG
# ============================================================
TEST_SET_SIZE     = int(os.environ.get('CSD_TEST_SET_SIZE', '10000'))
SIM_WORKERS       = int(os.environ.get('CSD_SIM_WORKERS', '4'))
FAILED_REP_LIMIT  = float(os.environ.get('CSD_FAILED_REP_LIMIT', '0.05'))
QUIET             = os.environ.get('CSD_SVM_QUIET', '').lower() in ('1', 'true', 'yes')

QUAD_TOL          = 1e-9
RISK_QUAD_TOL     = 1e-7
CUBE_NODES        = 24
MIN_WEIBULL_SCALE = 1e-3

CASE_KNOWN     = 'known'
CASE_ESTIMATED = 'estimated'
CENSORING_CASES = (CASE_KNOWN, CASE_ESTIMATED)
METHODS = (KIND_RBF, KIND_LINEAR)

RESULT_COLUMNS = ['setting', 'n', 'rep', 'method', 'kernel', 'censoring_case',
                  'risk', 'bayes_risk', 'sigma', 'lambda', 'seed']

LOG_PREFIX = '[CSD Simgen]'


def _log(message):
    if not QUIET:
        print(f"{LOG_PREFIX} {message}", file=sys.stderr, flush=True)


# ============================================================
# SETTINGS
# ============================================================
@dataclass(frozen=True)
class SimSetting:
    """
    One data-generating mechanism. The failure law depends on the active
    covariates only through a scalar parameter p = param(z_active).
    """

    name: str
    d: int
    tau: float
    active: tuple
    param: Callable           # (m, len(active)) -> (m,)
    survival: Callable        # (t, p) -> P(T > t | p), broadcasting
    inverse_cdf: Callable     # (u, p) -> T, untruncated
    moments: Callable         # p -> (E[T^tau], E[(T^tau)^2])
    z_breakpoints: tuple = ()
    t_breakpoints: Optional[Callable] = None
    description: str = ''

    def param_of(self, Z):
        Z = as_points(Z, dim=self.d, name='covariates')
        return self.param(Z[:, list(self.active)])


# --- Weibull, shape 2 -------------------------------------------------
def _weibull_survival(t, scale):
    return np.exp(-(np.asarray(t) / scale) ** 2)


def _weibull_inverse(u, scale):
    return scale * np.sqrt(-np.log1p(-u))


def _weibull_moments(tau):
    def moments(scale):
        r = tau / scale
        m1 = scale * (math.sqrt(math.pi) / 2.0) * erf(r)
        m2 = scale ** 2 * (1.0 - np.exp(-r * r))
        return m1, m2
    return moments


# --- Log-normal, sigma 1 ------------------------------------------------
def _lognormal_survival(t, mu):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide='ignore'):
        log_t = np.log(t)
    return np.where(t > 0, ndtr(mu - log_t), 1.0)


def _lognormal_inverse(u, mu):
    return np.exp(mu + ndtri(u))


def _lognormal_moments(tau):
    log_tau = math.log(tau)

    def moments(mu):
        tail = 1.0 - ndtr(log_tau - mu)
        m1 = np.exp(mu + 0.5) * ndtr(log_tau - mu - 1.0) + tau * tail
        m2 = np.exp(2.0 * mu + 2.0) * ndtr(log_tau - mu - 2.0) + tau * tau * tail
        return m1, m2
    return moments


# --- Triangle mean + N(0,1) ----------------------------------------------
def _triangle_mean(Z):
    z = Z[:, 0]
    return np.where(z <= 0.5, 4.0 + 6.0 * z, 10.0 - 6.0 * z)


def _normal_survival(t, mean):
    return ndtr(mean - np.asarray(t, dtype=float))


def _normal_inverse(u, mean):
    return mean + ndtri(u)


def _normal_pdf(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _triangle_moments(tau):
    # X = min(max(T, 0), tau), T ~ N(m, 1); antiderivatives of sf and x*sf
    def G(x):
        return x * ndtr(-x) - _normal_pdf(x)

    def H(x):
        return 0.5 * (x * x - 1.0) * ndtr(-x) - 0.5 * x * _normal_pdf(x)

    def moments(mean):
        a, b = -mean, tau - mean
        m1 = G(b) - G(a)
        m2 = 2.0 * (H(b) - H(a)) + 2.0 * mean * m1
        return m1, m2
    return moments


# --- degenerate diagnostic: T is a deterministic function of Z ----------
def _step_survival(t, threshold):
    return (np.asarray(t) < threshold).astype(float)


SIM_SETTINGS = {
    'weibull': SimSetting(
        name='weibull', d=1, tau=1.0, active=(0,),
        param=lambda Za: np.exp(-0.5 * Za[:, 0]),
        survival=_weibull_survival,
        inverse_cdf=_weibull_inverse,
        moments=_weibull_moments(1.0),
        description='Weibull(scale=exp(-z/2), shape=2), tau=1',
    ),
    'multiweibull': SimSetting(
        name='multiweibull', d=10, tau=2.0, active=(0, 1, 2),
        param=lambda Za: np.maximum(-0.5 * Za[:, 0] + 2.0 * Za[:, 1] - Za[:, 2], MIN_WEIBULL_SCALE),
        survival=_weibull_survival,
        inverse_cdf=_weibull_inverse,
        moments=_weibull_moments(2.0),
        description='Weibull(scale=max(-0.5z1+2z2-z3, 1e-3), shape=2), tau=2',
    ),
    'multilognormal': SimSetting(
        name='multilognormal', d=10, tau=7.0, active=(0, 1, 2),
        param=lambda Za: 0.5 * (0.3 * Za[:, 0] + 0.5 * Za[:, 1] + 0.2 * Za[:, 2]),
        survival=_lognormal_survival,
        inverse_cdf=_lognormal_inverse,
        moments=_lognormal_moments(7.0),
        description='LogNormal(mu=0.5(0.3z1+0.5z2+0.2z3), sigma=1), tau=7',
    ),
    'triangle': SimSetting(
        name='triangle', d=1, tau=8.0, active=(0,),
        param=_triangle_mean,
        survival=_normal_survival,
        inverse_cdf=_normal_inverse,
        moments=_triangle_moments(8.0),
        z_breakpoints=(0.5,),
        description='T = triangle(z) + N(0,1), peak 7 at z=0.5, tau=8',
    ),
}

# Settings used only to check the oracles; not offered on the command line.
DIAGNOSTIC_SETTINGS = {
    'degenerate': SimSetting(
        name='degenerate', d=1, tau=1.0, active=(0,),
        param=lambda Za: 0.25 + 0.5 * Za[:, 0],
        survival=_step_survival,
        inverse_cdf=lambda u, m: np.broadcast_to(m, np.shape(u)).astype(float),
        moments=lambda m: (m, m * m),
        t_breakpoints=lambda m: [float(m)],
        description='T = 0.25 + 0.5 z exactly (zero conditional variance)',
    ),
}


def get_setting(name):
    setting = SIM_SETTINGS.get(name) or DIAGNOSTIC_SETTINGS.get(name)
    if setting is None:
        raise DataError(f"unknown simulation setting {name!r}; expected one of {sorted(SIM_SETTINGS)}")
    return setting


# ============================================================
# SEEDS
# ============================================================
def derive_seed(master_seed, setting_name, n, rep, tag):
    """Stable 63-bit seed for one (setting, n, rep, tag) substream."""
    key = f"{int(master_seed)}|{setting_name}|{int(n)}|{int(rep)}|{tag}".encode('utf-8')
    return int.from_bytes(hashlib.sha256(key).digest()[:8], 'big') >> 1


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


# ============================================================
# DATA GENERATION
# ============================================================
@dataclass(frozen=True, eq=False)
class LatentDataset:
    data: Dataset
    latent_times: np.ndarray

    @property
    def n(self):
        return self.data.n


def generate(setting, n, seed):
    """Draw n records; T by inverse-CDF from the same Philox stream as Z and C."""
    if n < 1:
        raise DataError(f"need n >= 1 records, got {n}")
    rng = make_rng(seed)
    Z = rng.random((n, setting.d))
    C = setting.tau * rng.random(n)
    U = rng.random(n)
    T = np.clip(setting.inverse_cdf(U, setting.param_of(Z)), 0.0, setting.tau)
    delta = (T <= C).astype(np.int8)
    T = np.array(T, dtype=float)
    T.setflags(write=False)
    return LatentDataset(Dataset(Z, C, delta, setting.tau), T)


# ============================================================
# BAYES ORACLES
# ============================================================
def _check_unit_cube(setting, z):
    z = np.asarray(z, dtype=float).ravel()
    if z.shape[0] != setting.d:
        raise DataError(f"{setting.name} expects {setting.d} covariates, got {z.shape[0]}")
    if np.any(z < 0) or np.any(z > 1):
        raise DataError("covariates must lie in the unit cube")
    return z


def _quad_moments(setting, p):
    points = setting.t_breakpoints(p) if setting.t_breakpoints else None
    kwargs = dict(epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    if points:
        kwargs['points'] = [x for x in points if 0 < x < setting.tau]
    m1, _ = integrate.quad(lambda t: float(setting.survival(t, p)), 0.0, setting.tau, **kwargs)
    m2, _ = integrate.quad(lambda t: 2.0 * t * float(setting.survival(t, p)), 0.0, setting.tau, **kwargs)
    return m1, m2


def bayes_predict(setting, z):
    """E[T ^ tau | Z = z] by adaptive quadrature of the survival function."""
    z = _check_unit_cube(setting, z)
    p = float(setting.param_of(z.reshape(1, -1))[0])
    return _quad_moments(setting, p)[0]


def conditional_moments(setting, Z):
    """Closed-form (E[T^tau|z], E[(T^tau)^2|z]) for many covariate rows."""
    return setting.moments(setting.param_of(Z))


@lru_cache(maxsize=None)
def bayes_risk(setting):
    """E_Z[Var(T ^ tau | Z)]."""
    if len(setting.active) == 1:
        def conditional_variance(z):
            z_full = np.zeros((1, setting.d))
            z_full[0, setting.active[0]] = z
            m1, m2 = _quad_moments(setting, float(setting.param_of(z_full)[0]))
            return m2 - m1 * m1

        kwargs = dict(epsabs=RISK_QUAD_TOL, epsrel=RISK_QUAD_TOL, limit=200)
        if setting.z_breakpoints:
            kwargs['points'] = list(setting.z_breakpoints)
        risk, _ = integrate.quad(conditional_variance, 0.0, 1.0, **kwargs)
        return float(risk)

    # Gauss-Legendre product rule over the active unit cube
    nodes, weights = np.polynomial.legendre.leggauss(CUBE_NODES)
    nodes, weights = 0.5 * (nodes + 1.0), 0.5 * weights
    k = len(setting.active)
    grids = np.meshgrid(*([nodes] * k), indexing='ij')
    wgrid = np.ones([CUBE_NODES] * k)
    for axis in range(k):
        shape = [1] * k
        shape[axis] = CUBE_NODES
        wgrid = wgrid * weights.reshape(shape)
    Z = np.zeros((CUBE_NODES ** k, setting.d))
    for axis, col in enumerate(setting.active):
        Z[:, col] = grids[axis].ravel()
    m1, m2 = conditional_moments(setting, Z)
    return float(np.sum(wgrid.ravel() * (m2 - m1 * m1)))


class BayesPredictor:
    """The conditional expectation wrapped with the FittedModel predict interface."""

    def __init__(self, setting):
        self.setting = setting

    def predict(self, query):
        return np.asarray(conditional_moments(self.setting, query)[0], dtype=float)


# ============================================================
# EVALUATION
# ============================================================
def evaluate_risk(model, test):
    """(1/m) sum (T_i ^ tau - f(z_i))^2 over the latent test set."""
    predictions = np.asarray(model.predict(test.data.covariates), dtype=float)
    return float(np.mean((test.latent_times - predictions) ** 2))


def monte_carlo_bayes_risk(setting, n, seed):
    """(estimate, standard error) of E[(T ^ tau - f*(Z))^2] from n fresh draws."""
    sample = generate(setting, n, seed)
    sq = (sample.latent_times - BayesPredictor(setting).predict(sample.data.covariates)) ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(n))


# ============================================================
# EXPERIMENTS
# ============================================================
@dataclass(frozen=True)
class ExperimentConfig:
    method: str = KIND_RBF
    censoring_case: str = CASE_KNOWN
    grid: Optional[object] = None
    folds: int = DEFAULT_FOLDS
    with_intercept: bool = True
    test_size: int = TEST_SET_SIZE
    bandwidth_rule: BandwidthRule = field(default_factory=BandwidthRule.silverman)
    floor: float = DEFAULT_DENSITY_FLOOR

    def __post_init__(self):
        if self.method not in METHODS:
            raise DataError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.censoring_case not in CENSORING_CASES:
            raise DataError(f"unknown censoring case {self.censoring_case!r}; expected one of {CENSORING_CASES}")
        if self.grid is not None and self.grid.kernel_kind != self.method:
            raise DataError(f"grid kernel {self.grid.kernel_kind!r} does not match method {self.method!r}")

    @property
    def method_label(self):
        return f"csd-svm-{self.method}"

    def grid_for(self, d):
        return self.grid or default_grid(self.method, d)

    def censoring_for(self, data):
        if self.censoring_case == CASE_KNOWN:
            return uniform_censoring(data.tau, self.floor)
        return fit_kde(data.times, self.bandwidth_rule, self.floor)


@dataclass
class ExperimentResult:
    setting: str
    bayes_risk: float
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def failed_fraction(self):
        return len(self.failures) / len(self.rows) if self.rows else 0.0

    @property
    def flagged(self):
        return self.failed_fraction > FAILED_REP_LIMIT

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=RESULT_COLUMNS)


def _fit_and_score(setting, train, test, config, n, rep, master_seed, train_seed):
    row = {
        'setting': setting.name, 'n': n, 'rep': rep,
        'method': config.method_label, 'kernel': config.method,
        'censoring_case': config.censoring_case,
        'risk': float('nan'), 'bayes_risk': bayes_risk(setting),
        'sigma': None, 'lambda': None, 'seed': train_seed,
    }
    try:
        cens = config.censoring_for(train.data)
        cv_seed = derive_seed(master_seed, setting.name, n, rep, 'cv')
        model, _ = select_and_refit(train.data, config.grid_for(setting.d), config.folds,
                                    cens, cv_seed, with_intercept=config.with_intercept, workers=1)
        row['risk'] = evaluate_risk(model, test)
        row['sigma'] = model.kernel.sigma
        row['lambda'] = model.lam
        return row, None
    except Exception as e:
        error = f"{type(e).__name__}: {str(e)[:160]}"
        _log(f"✗ {setting.name} n={n} rep={rep} {config.method}/{config.censoring_case} failed: {error}")
        return row, error


def _run_rep(setting, n, rep, configs, master_seed):
    train_seed = derive_seed(master_seed, setting.name, n, rep, 'train')
    test_seed = derive_seed(master_seed, setting.name, n, rep, 'test')
    train = generate(setting, n, train_seed)
    test = generate(setting, max(config.test_size for config in configs), test_seed)
    return [_fit_and_score(setting, train, test, config, n, rep, master_seed, train_seed)
            for config in configs]


def run_experiments(setting, sizes, reps, configs, master_seed, workers=None):
    """
    Every config is fitted on the same per-rep training sample, so methods
    and censoring cases are compared on identical data. Rows come back
    ordered by (n, rep, config) whatever order the workers finish in.
    """
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise DataError("need at least one sample size")
    if reps < 1:
        raise DataError(f"need reps >= 1, got {reps}")
    if not configs:
        raise DataError("need at least one experiment configuration")

    result = ExperimentResult(setting=setting.name, bayes_risk=bayes_risk(setting))
    _log(f"{setting.name}: sizes={sizes} reps={reps} configs={len(configs)} "
         f"bayes_risk={result.bayes_risk:.6g}")

    with ThreadPoolExecutor(max_workers=workers or SIM_WORKERS) as pool:
        futures = {(n, rep): pool.submit(_run_rep, setting, n, rep, configs, master_seed)
                   for n in sizes for rep in range(reps)}
        for n in sizes:
            for rep in range(reps):
                for row, error in futures[(n, rep)].result():
                    result.rows.append(row)
                    if error:
                        result.failures.append({'n': n, 'rep': rep, 'method': row['method'],
                                                'censoring_case': row['censoring_case'], 'error': error})

    if result.flagged:
        _log(f"⚠️ {len(result.failures)}/{len(result.rows)} fits failed "
             f"(limit {FAILED_REP_LIMIT:.0%}); result flagged")
    else:
        _log(f"✅ {setting.name}: {len(result.rows)} rows, {len(result.failures)} failed")
    return result


def run_experiment(setting, sizes, reps, config, master_seed, workers=None):
    return run_experiments(setting, sizes, reps, [config], master_seed, workers=workers)


# ============================================================
# SUMMARIES AND CURVES
# ============================================================
def summarize_results(frame):
    """Per (setting, method, censoring_case, n): count, median, quartiles (type 7), Bayes risk."""
    if frame.empty:
        raise DataError("no result rows to summarize")
    keys = ['setting', 'method', 'censoring_case', 'n']
    grouped = frame.dropna(subset=['risk']).groupby(keys, sort=True)
    summary = grouped['risk'].agg(
        count='count',
        median='median',
        q1=lambda r: r.quantile(0.25),
        q3=lambda r: r.quantile(0.75),
    )
    summary['bayes_risk'] = grouped['bayes_risk'].first()
    return summary.reset_index()


def expectation_curve(setting, n, config, seed, grid_points=101):
    """
    Fit once on a fresh sample and tabulate the true conditional expectation
    next to the estimate over a z-grid. One-dimensional settings only.
    """
    if setting.d != 1:
        raise DataError(f"expectation curves need a one-dimensional setting, {setting.name} has d={setting.d}")
    train = generate(setting, n, derive_seed(seed, setting.name, n, 0, 'train'))
    cens = config.censoring_for(train.data)
    model, _ = select_and_refit(train.data, config.grid_for(1), config.folds, cens,
                                derive_seed(seed, setting.name, n, 0, 'cv'),
                                with_intercept=config.with_intercept)
    z = np.linspace(0.0, 1.0, grid_points).reshape(-1, 1)
    return pd.DataFrame({
        'z': z[:, 0],
        'true_expectation': BayesPredictor(setting).predict(z),
        'estimate': model.predict(z),
    })


# ============================================================
# CLI REGISTRATION
# ============================================================
def _split_list(text, cast=str):
    items = [item.strip() for item in str(text).split(',') if item.strip()]
    try:
        return [cast(item) for item in items]
    except ValueError as e:
        raise DataError(f"cannot parse list {text!r}: {e}") from e


def cmd_simulate(args):
    from csd_errors import EXIT_NUMERICAL_ERROR, EXIT_OK
    from csv_io import write_frame_atomic

    setting = get_setting(args.setting)
    sizes = _split_list(args.sizes, int)
    if not sizes or any(s < 1 for s in sizes):
        raise DataError(f"--sizes must list positive counts, got {args.sizes!r}")
    configs = [ExperimentConfig(method=method, censoring_case=case, folds=args.folds,
                                test_size=args.test_size)
               for method in _split_list(args.method)
               for case in _split_list(args.censoring_case)]

    result = run_experiments(setting, sizes, args.reps, configs, args.seed, workers=args.workers)
    frame = result.to_frame()
    write_frame_atomic(frame, args.out)

    print(f"setting={setting.name} bayes_risk={result.bayes_risk:.6g}")
    for (method, case, n), part in frame.groupby(['method', 'censoring_case', 'n'], sort=False):
        risks = part['risk'].dropna()
        median = f"{risks.median():.6g}" if len(risks) else 'nan'
        print(f"  {method} {case} n={n}: median_risk={median} ({len(risks)}/{len(part)} reps)")
    if result.flagged:
        print(f"WARNING: {len(result.failures)} of {len(result.rows)} fits failed; result flagged")
        return EXIT_NUMERICAL_ERROR
    return EXIT_OK


def cmd_summarize(args):
    from csd_errors import EXIT_OK
    from csv_io import read_frame, require_columns, write_frame_atomic

    raw = read_frame(args.input)
    require_columns(raw, RESULT_COLUMNS, args.input)
    frame = raw.copy()
    frame['n'] = pd.to_numeric(frame['n'])
    for col in ('risk', 'bayes_risk'):
        frame[col] = pd.to_numeric(frame[col].replace('', np.nan), errors='coerce')
    summary = summarize_results(frame)
    write_frame_atomic(summary, args.out)
    print(summary.to_string(index=False))
    return EXIT_OK


def cmd_curve(args):
    from csd_errors import EXIT_OK
    from csv_io import write_frame_atomic

    setting = get_setting(args.setting)
    config = ExperimentConfig(method=args.method, censoring_case=args.censoring_case, folds=args.folds)
    curve = expectation_curve(setting, args.n, config, args.seed, grid_points=args.grid_points)
    write_frame_atomic(curve, args.out)
    gap = float(np.mean((curve['true_expectation'] - curve['estimate']) ** 2))
    print(f"setting={setting.name} n={args.n} mean_sq_gap={gap:.6g}")
    return EXIT_OK


def register_simulation_commands(subparsers):
    """
    Register `simulate`, `summarize` and `curve` on the CLI parser.

    Usage in app.py:
        from simgen import register_simulation_commands
        register_simulation_commands(subparsers)
    """
    p = subparsers.add_parser('simulate', help='run a seeded simulation study')
    p.add_argument('--setting', required=True, choices=sorted(SIM_SETTINGS))
    p.add_argument('--sizes', default='50,100,200,400,800')
    p.add_argument('--reps', type=int, default=100)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--method', default=KIND_RBF, help='rbf, linear or a comma list of both')
    p.add_argument('--censoring-case', dest='censoring_case', default=CASE_KNOWN,
                   help='known, estimated or a comma list of both')
    p.add_argument('--folds', type=int, default=DEFAULT_FOLDS)
    p.add_argument('--test-size', dest='test_size', type=int, default=TEST_SET_SIZE)
    p.add_argument('--workers', type=int, default=SIM_WORKERS)
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_simulate)

    p = subparsers.add_parser('summarize', help='median and quartiles per group of a results CSV')
    p.add_argument('--in', dest='input', required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_summarize)

    p = subparsers.add_parser('curve', help='true vs. estimated conditional expectation (1-D settings)')
    p.add_argument('--setting', required=True, choices=sorted(s for s in SIM_SETTINGS if SIM_SETTINGS[s].d == 1))
    p.add_argument('--n', type=int, default=400)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--method', default=KIND_RBF, choices=METHODS)
    p.add_argument('--censoring-case', dest='censoring_case', default=CASE_KNOWN, choices=CENSORING_CASES)
    p.add_argument('--folds', type=int, default=DEFAULT_FOLDS)
    p.add_argument('--grid-points', dest='grid_points', type=int, default=101)
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_curve)


# ============================================================
# STANDALONE TEST
# ============================================================
if __name__ == '__main__':
    print("[CSD Simgen] Bayes risks of the built-in settings")
    for name, setting in SIM_SETTINGS.items():
        est, se = monte_carlo_bayes_risk(setting, 20000, derive_seed(0, name, 20000, 0, 'test'))
        print(f"  {name:<16} oracle={bayes_risk(setting):.6g}  monte_carlo={est:.6g} ± {se:.2g}")
