"""Latent-process generators, named settings and the Monte Carlo harness.

All randomness flows through numpy SeedSequence entropy lists, so a table
regenerated with the same master seed is bit-identical regardless of the
worker count: replicate (n, rep) always draws from entropy
[master_seed, n, rep].
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from . import presets
from .bss import LAG_PRESETS
from .dimtest import bootstrap_noise_test, estimate_dimension, noise_test
from .errors import InvalidInputError
from .series import LagSet, MultiSeries

_MAX_MIX_CONDITION = 1e8
_PSI_TERMS = 4096


@dataclass(frozen=True)
class ProcessSpec:
    """Declarative recipe for one latent univariate process."""

    kind: str  # "ar" | "ma" | "arma" | "white"
    ar: tuple = ()
    ma: tuple = ()
    innovation: str = "gaussian"  # "gaussian" | "t"
    t_df: float = 5.0
    normalize: bool = True  # rescale to unit theoretical variance

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(b) for b in self.ma))
        if self.kind not in ("ar", "ma", "arma", "white"):
            raise InvalidInputError(f"unknown process kind: {self.kind!r}")
        if self.kind == "white" and (self.ar or self.ma):
            raise InvalidInputError("white noise takes no coefficients")
        if self.kind == "ar" and self.ma:
            raise InvalidInputError("ar process takes no ma coefficients")
        if self.kind == "ma" and self.ar:
            raise InvalidInputError("ma process takes no ar coefficients")
        if self.innovation not in ("gaussian", "t"):
            raise InvalidInputError(f"unknown innovation: {self.innovation!r}")
        if self.innovation == "t" and self.t_df <= 2:
            raise InvalidInputError("t innovations need df > 2 for finite variance")
        if self.ar:
            roots = np.roots([1.0] + [-a for a in self.ar])
            radius = np.abs(roots).max()
            if radius >= 1.0:
                raise InvalidInputError(
                    f"non-stationary AR part: companion spectral radius {radius:.4f}"
                )

    @property
    def order(self) -> int:
        return max(len(self.ar), len(self.ma))

    @property
    def is_noise(self) -> bool:
        return self.kind == "white"


def psi_weights(spec: ProcessSpec, n_terms: int = _PSI_TERMS) -> np.ndarray:
    """Impulse-response (moving-average) weights of the process."""
    impulse = np.zeros(n_terms)
    impulse[0] = 1.0
    return lfilter([1.0, *spec.ma], [1.0, *(-a for a in spec.ar)], impulse)


def theoretical_variance(spec: ProcessSpec) -> float:
    """Process variance under unit innovation variance."""
    psi = psi_weights(spec)
    return float(psi @ psi)


def theoretical_autocov(spec: ProcessSpec, lag: int) -> float:
    """Lag autocovariance of the (possibly normalized) process."""
    psi = psi_weights(spec)
    g = float(psi[: len(psi) - lag] @ psi[lag:])
    return g / theoretical_variance(spec) if spec.normalize else g


def generate(spec: ProcessSpec, n: int, seed) -> np.ndarray:
    """Simulate n samples by innovation recursion with burn-in."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = np.random.default_rng(seed)
    burn = 1000 + 10 * spec.order
    total = n + burn
    if spec.innovation == "gaussian":
        eps = rng.standard_normal(total)
    else:
        eps = rng.standard_t(spec.t_df, size=total)
        eps *= np.sqrt((spec.t_df - 2.0) / spec.t_df)
    if spec.kind == "white":
        return eps[burn:]
    x = lfilter([1.0, *spec.ma], [1.0, *(-a for a in spec.ar)], eps)[burn:]
    if spec.normalize:
        x = x / np.sqrt(theoretical_variance(spec))
    return x


@dataclass(frozen=True)
class SimSetting:
    """A named recipe: latent processes (signals then noise) plus mixing."""

    name: str
    processes: tuple
    mixing: str = "identity"  # "identity" | "uniform" | "fixed"
    fixed_matrix: tuple = None

    def __post_init__(self):
        if self.mixing not in ("identity", "uniform", "fixed"):
            raise InvalidInputError(f"unknown mixing: {self.mixing!r}")
        if self.mixing == "fixed":
            m = np.asarray(self.fixed_matrix, dtype=float)
            if m.shape != (self.p, self.p):
                raise InvalidInputError("fixed mixing matrix has the wrong shape")
            if np.linalg.cond(m) >= _MAX_MIX_CONDITION:
                raise InvalidInputError("fixed mixing matrix is (near) singular")
            object.__setattr__(self, "fixed_matrix", tuple(map(tuple, m)))

    @property
    def p(self) -> int:
        return len(self.processes)

    @property
    def d(self) -> int:
        return sum(not s.is_noise for s in self.processes)


def _gauss_white():
    return ProcessSpec("white")


def make_setting(name: str) -> SimSetting:
    """The named simulation settings (see presets for the coefficients)."""
    ps = ProcessSpec
    if name == "H1":
        procs = (
            ps("ma", ma=presets.MA3),
            ps("ar", ar=presets.AR2),
            ps("arma", ar=presets.ARMA11_AR, ma=presets.ARMA11_MA),
            _gauss_white(),
            _gauss_white(),
        )
    elif name == "H2":
        procs = (
            ps("ma", ma=presets.MA10_EVEN),
            ps("ma", ma=presets.MA15_EVEN),
            ps("ma", ma=presets.MA20_EVEN),
            _gauss_white(),
            _gauss_white(),
        )
    elif name == "H3":
        procs = tuple(ps("ma", ma=presets.MA3) for _ in range(3)) + (
            _gauss_white(),
            _gauss_white(),
        )
    elif name in ("D1", "D2"):
        last = ps("ma", ma=presets.MA3) if name == "D1" else ps(
            "ma", ma=presets.MA1_WEAK
        )
        procs = (
            ps("ar", ar=presets.AR2),
            ps("ar", ar=presets.AR3),
            ps("arma", ar=presets.ARMA11_AR, ma=presets.ARMA11_MA),
            ps("arma", ar=presets.ARMA32_AR, ma=presets.ARMA32_MA),
            last,
        ) + tuple(_gauss_white() for _ in range(5))
    elif name == "D3":
        procs = tuple(ps("ma", ma=presets.MA2_WEAK) for _ in range(5)) + tuple(
            _gauss_white() for _ in range(5)
        )
    elif name == "S5":
        # Synthetic stand-in for the 20-channel sound-recording example:
        # three autocorrelated signals plus 17 heavy-tailed noise channels,
        # mixed by a random uniform [0, 1] matrix.
        procs = (
            ps("ma", ma=presets.MA3),
            ps("ar", ar=presets.AR2),
            ps("arma", ar=presets.ARMA11_AR, ma=presets.ARMA11_MA),
        ) + tuple(ProcessSpec("white", innovation="t", t_df=5.0) for _ in range(17))
        return SimSetting("S5", procs, mixing="uniform")
    else:
        raise InvalidInputError(f"unknown setting: {name!r}")
    return SimSetting(name, procs)


SETTING_NAMES = ("H1", "H2", "H3", "D1", "D2", "D3", "S5")


def mix(sources: MultiSeries, mixing, seed=None):
    """Apply the mixing x_t = Omega z_t; returns (mixed, Omega).

    mixing is "identity", "uniform" (redrawn until the condition number is
    below 1e8) or an explicit p x p matrix.
    """
    p = sources.p
    if isinstance(mixing, str) and mixing == "identity":
        omega = np.eye(p)
    elif isinstance(mixing, str) and mixing == "uniform":
        rng = np.random.default_rng(seed)
        while True:
            omega = rng.uniform(0.0, 1.0, size=(p, p))
            if np.linalg.cond(omega) < _MAX_MIX_CONDITION:
                break
    else:
        omega = np.asarray(mixing, dtype=float)
        if omega.shape != (p, p):
            raise InvalidInputError(f"mixing matrix must be {p} x {p}")
        if np.linalg.cond(omega) >= _MAX_MIX_CONDITION:
            raise InvalidInputError("mixing matrix is (near) singular")
    return MultiSeries(sources.values @ omega.T), omega


def simulate_setting(setting: SimSetting, n: int, seed):
    """Draw one replicate: returns (mixed series, Omega, sources)."""
    children = np.random.SeedSequence(seed).spawn(setting.p + 1)
    z = np.column_stack(
        [generate(spec, n, children[j]) for j, spec in enumerate(setting.processes)]
    )
    sources = MultiSeries(z)
    mixing = setting.mixing if setting.mixing != "fixed" else np.asarray(
        setting.fixed_matrix
    )
    x, omega = mix(sources, mixing, children[setting.p])
    return x, omega, sources


@dataclass
class FrequencyTable:
    """Rejection frequencies: rows = sample sizes, columns = methods."""

    rows: tuple  # n values
    cols: tuple  # method labels
    values: np.ndarray  # len(rows) x len(cols)
    timings: dict = field(default_factory=dict)  # method -> seconds

    def to_csv(self) -> str:
        lines = ["n," + ",".join(self.cols)]
        for i, n in enumerate(self.rows):
            lines.append(
                f"{n}," + ",".join(f"{v:.6f}" for v in self.values[i])
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "values": [[float(v) for v in row] for row in self.values],
            "timings": {k: float(v) for k, v in self.timings.items()},
        }


@dataclass
class DimensionTable:
    """Empirical distribution of the estimated dimension per (n, method)."""

    rows: tuple  # n values
    cols: tuple  # method labels
    p: int
    freq: np.ndarray  # len(rows) x len(cols) x (p + 1)
    timings: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["n,method,d_hat,frequency"]
        for i, n in enumerate(self.rows):
            for j, m in enumerate(self.cols):
                for d in range(self.p + 1):
                    lines.append(f"{n},{m},{d},{self.freq[i, j, d]:.6f}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "p": self.p,
            "freq": self.freq.tolist(),
            "timings": {k: float(v) for k, v in self.timings.items()},
        }


def _method_lags(method: str):
    if method not in LAG_PRESETS:
        raise InvalidInputError(
            f"unknown estimator preset: {method!r}; expected one of "
            f"{sorted(LAG_PRESETS)}"
        )
    kind = "amuse" if method == "amuse" else "sobi"
    return LagSet(LAG_PRESETS[method]), kind


def _rejection_rep(args):
    setting, n, rep, seed, method, q, alpha, test_kind, b_reps = args
    x, _, _ = simulate_setting(setting, n, [seed, n, rep])
    lags, kind = _method_lags(method)
    if test_kind == "asymptotic":
        ts = noise_test(x, lags, q, kind)
    else:
        ts = bootstrap_noise_test(x, lags, q, kind, b_reps, seed=[seed, n, rep, 1])
    return float(ts.p_value < alpha)


def _dimension_rep(args):
    setting, n, rep, seed, method, alpha, strategy, test_kind, b_reps = args
    x, _, _ = simulate_setting(setting, n, [seed, n, rep])
    lags, kind = _method_lags(method)
    est = estimate_dimension(
        x,
        lags,
        alpha=alpha,
        strategy=strategy,
        method=kind,
        test_kind=test_kind,
        b_reps=b_reps,
        seed=[seed, n, rep, 2],
    )
    return est.d_hat


def _run_reps(fn, tasks, n_jobs):
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chunk = max(1, len(tasks) // (4 * n_jobs))
            return list(pool.map(fn, tasks, chunksize=chunk))
    return [fn(t) for t in tasks]


def _check_reps(reps):
    if reps < 1:
        raise InvalidInputError("reps must be >= 1")


def rejection_table(
    setting: SimSetting,
    n_list,
    methods,
    q: int,
    alpha: float = 0.05,
    reps: int = 100,
    seed: int = 0,
    test_kind: str = "asymptotic",
    b_reps: int = 200,
    n_jobs: int = 1,
) -> FrequencyTable:
    """Fraction of replicates rejecting H_{0q} per (n, method) cell."""
    _check_reps(reps)
    n_list = tuple(int(n) for n in n_list)
    methods = tuple(methods)
    values = np.zeros((len(n_list), len(methods)))
    timings = {}
    for j, method in enumerate(methods):
        start = time.perf_counter()
        for i, n in enumerate(n_list):
            tasks = [
                (setting, n, rep, seed, method, q, alpha, test_kind, b_reps)
                for rep in range(reps)
            ]
            values[i, j] = np.mean(_run_reps(_rejection_rep, tasks, n_jobs))
        timings[method] = time.perf_counter() - start
    return FrequencyTable(n_list, methods, values, timings)


def dimension_table(
    setting: SimSetting,
    n_list,
    methods,
    alpha: float = 0.05,
    strategy: str = "divide_and_conquer",
    reps: int = 100,
    seed: int = 0,
    estimator_kind: str = "asymptotic",
    b_reps: int = 200,
    n_jobs: int = 1,
) -> DimensionTable:
    """Empirical distribution of the estimated dimension per (n, method)."""
    _check_reps(reps)
    n_list = tuple(int(n) for n in n_list)
    methods = tuple(methods)
    p = setting.p
    freq = np.zeros((len(n_list), len(methods), p + 1))
    timings = {}
    for j, method in enumerate(methods):
        start = time.perf_counter()
        for i, n in enumerate(n_list):
            tasks = [
                (setting, n, rep, seed, method, alpha, strategy,
                 estimator_kind, b_reps)
                for rep in range(reps)
            ]
            for d_hat in _run_reps(_dimension_rep, tasks, n_jobs):
                freq[i, j, min(d_hat, p)] += 1
            freq[i, j] /= reps
        timings[method] = time.perf_counter() - start
    return DimensionTable(n_list, methods, p, freq, timings)
