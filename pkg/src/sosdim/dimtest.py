"""White-noise subspace tests and sequential dimension estimation.

The statistic for the hypothesis "the last p - q sources are white noise"
is the mean squared element of the noise blocks W_q^T H_tau W_q over the
lag set. Scaled by T * |lags| * (p - q)^2 it is asymptotically chi-square
with |lags| * (p - q) * (p - q + 1) / 2 degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bss import UnmixingResult, estimated_sources, unmix
from .errors import InvalidInputError
from .series import LagSet, MultiSeries, symmetrize


@dataclass(frozen=True)
class TestResult:
    q: int
    r: int
    m_hat: float
    scaled_stat: float
    df: int
    p_value: float | None
    lags: LagSet
    method: str
    converged: bool


@dataclass(frozen=True)
class DimensionEstimate:
    d_hat: int
    strategy: str
    alpha: float
    trace: tuple  # TestResult, in evaluation order
    method: str
    lags: LagSet
    converged: bool
    monotone: bool  # False if divide-and-conquer hit a non-monotone trace


STRATEGIES = ("forward", "backward", "divide_and_conquer")


def chisq_sf(x: float, df) -> float:
    """Survival function P(chi2_df > x) via the regularized upper
    incomplete gamma function Q(df/2, x/2).

    Series expansion for x < df + 1, Lentz continued fraction otherwise;
    self-contained so the test path has no statistical-library dependency.
    """
    if df <= 0:
        raise InvalidInputError("degrees of freedom must be positive")
    if not np.isfinite(x) or x < 0:
        raise InvalidInputError(f"statistic must be finite and nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    a = 0.5 * float(df)
    z = 0.5 * float(x)
    log_front = -z + a * math.log(z) - math.lgamma(a)
    if z < a + 1.0:
        # Lower series: P(a, z), then Q = 1 - P.
        ap = a
        total = 1.0 / a
        term = total
        for _ in range(10000):
            ap += 1.0
            term *= z / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        p = total * math.exp(log_front)
        return min(max(1.0 - p, 0.0), 1.0)
    # Upper continued fraction (modified Lentz).
    fpmin = 1e-300
    b = z + 1.0 - a
    c = 1.0 / fpmin
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < fpmin:
            d = fpmin
        c = b + an / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    if log_front < -700.0:
        return 0.0
    return min(max(math.exp(log_front) * h, 0.0), 1.0)


def _check_q(q: int, p: int) -> int:
    q = int(q)
    if not 0 <= q <= p - 1:
        raise InvalidInputError(f"q must be in [0, {p - 1}], got {q}")
    return q


def noise_submatrices(r: UnmixingResult, q: int):
    """Conjugations of each H_tau by the trailing p - q columns of U."""
    q = _check_q(q, r.p)
    w = r.U[:, q:]
    return [symmetrize(w.T @ h @ w) for h in r.H]


def test_statistic(fit: UnmixingResult, q: int, T: int) -> TestResult:
    """Statistic, scaling and degrees of freedom; p-value left unset."""
    q = _check_q(q, fit.p)
    rr = fit.p - q
    k = len(fit.lags)
    blocks = noise_submatrices(fit, q)
    m_hat = float(sum(np.sum(b**2) for b in blocks)) / (k * rr * rr)
    return TestResult(
        q=q,
        r=rr,
        m_hat=m_hat,
        scaled_stat=T * k * rr * rr * m_hat,
        df=k * rr * (rr + 1) // 2,
        p_value=None,
        lags=fit.lags,
        method=fit.method,
        converged=fit.converged,
    )


def _asymptotic_from_fit(fit: UnmixingResult, q: int, T: int) -> TestResult:
    ts = test_statistic(fit, q, T)
    return replace(ts, p_value=chisq_sf(ts.scaled_stat, ts.df))


def noise_test(x: MultiSeries, lags, q: int, method: str = "sobi") -> TestResult:
    """Asymptotic chi-square test of the null "p - q trailing sources are noise"."""
    fit = unmix(x, lags, method)
    return _asymptotic_from_fit(fit, q, x.T)


def _bootstrap_from_fit(
    x: MultiSeries,
    fit: UnmixingResult,
    q: int,
    b_reps: int,
    seed,
) -> TestResult:
    base = test_statistic(fit, q, x.T)
    z = estimated_sources(x, fit).values
    ginv = np.linalg.inv(fit.gamma)
    children = np.random.SeedSequence(seed).spawn(b_reps)
    count = 0
    n = x.T
    for child in children:
        rng = np.random.default_rng(child)
        idx = rng.integers(0, n, size=n)
        z_star = z.copy()
        z_star[:, q:] = z[idx, q:]
        x_star = MultiSeries(z_star @ ginv.T)
        fit_star = unmix(x_star, fit.lags, fit.method)
        if test_statistic(fit_star, q, n).m_hat >= base.m_hat:
            count += 1
    return replace(base, p_value=(1 + count) / (b_reps + 1))


def bootstrap_noise_test(
    x: MultiSeries,
    lags,
    q: int,
    method: str = "sobi",
    b_reps: int = 200,
    seed=0,
) -> TestResult:
    """Nonparametric bootstrap test: the trailing p - q estimated sources
    are resampled jointly over time with replacement, remixed with the
    inverse unmixing matrix, and the statistic is recomputed per replicate.

    p-value uses the (1 + count) / (B + 1) convention.
    """
    if b_reps < 1:
        raise InvalidInputError("bootstrap replicate count must be >= 1")
    fit = unmix(x, lags, method)
    _check_q(q, fit.p)
    return _bootstrap_from_fit(x, fit, q, b_reps, seed)


def _is_monotone(trace, alpha: float) -> bool:
    """True if, sorted by q, rejections form a prefix and acceptances a suffix."""
    seen_accept = False
    for t in sorted(trace, key=lambda t: t.q):
        if t.p_value >= alpha:
            seen_accept = True
        elif seen_accept:
            return False
    return True


def estimate_dimension(
    x: MultiSeries,
    lags,
    alpha: float = 0.05,
    strategy: str = "divide_and_conquer",
    method: str = "sobi",
    test_kind: str = "asymptotic",
    b_reps: int = 200,
    seed=0,
) -> DimensionEstimate:
    """Sequence the subspace tests into a single dimension estimate.

    forward: smallest q with p_q >= alpha (p if none).
    backward: q + 1 for the largest q with p_q < alpha (0 if none).
    divide_and_conquer: binary search for the change point, assuming the
    rejection pattern is monotone in q; a violated pattern falls back to
    the forward rule over the evaluated trace.
    """
    fit = unmix(x, lags, method)
    return estimate_dimension_from_fit(
        x, fit, alpha=alpha, strategy=strategy, test_kind=test_kind,
        b_reps=b_reps, seed=seed,
    )


def estimate_dimension_from_fit(
    x: MultiSeries,
    fit: UnmixingResult,
    alpha: float = 0.05,
    strategy: str = "divide_and_conquer",
    test_kind: str = "asymptotic",
    b_reps: int = 200,
    seed=0,
) -> DimensionEstimate:
    """estimate_dimension on a precomputed unmixing fit.

    Lets several strategies share one fit of the same data instead of
    re-estimating the unmixing per call.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha must be in (0, 1), got {alpha}")
    if strategy not in STRATEGIES:
        raise InvalidInputError(f"unknown strategy: {strategy!r}")
    if test_kind not in ("asymptotic", "bootstrap"):
        raise InvalidInputError(f"unknown test kind: {test_kind!r}")
    if fit.p != x.p:
        raise InvalidInputError("fit and series dimensions disagree")
    p = fit.p
    trace = []
    cache = {}

    def eval_q(q: int) -> TestResult:
        if q not in cache:
            if test_kind == "asymptotic":
                ts = _asymptotic_from_fit(fit, q, x.T)
            else:
                ts = _bootstrap_from_fit(x, fit, q, b_reps, [_seed_int(seed), q])
            cache[q] = ts
            trace.append(ts)
        return cache[q]

    monotone = True
    if strategy == "forward":
        d_hat = p
        for q in range(p):
            if eval_q(q).p_value >= alpha:
                d_hat = q
                break
    elif strategy == "backward":
        d_hat = 0
        for q in range(p - 1, -1, -1):
            if eval_q(q).p_value < alpha:
                d_hat = q + 1
                break
    else:
        lo, hi = 0, p
        while lo < hi:
            mid = (lo + hi) // 2
            if eval_q(mid).p_value >= alpha:
                hi = mid
            else:
                lo = mid + 1
        d_hat = lo
        if not _is_monotone(trace, alpha):
            monotone = False
            accepted = sorted(t.q for t in trace if t.p_value >= alpha)
            d_hat = accepted[0] if accepted else p
    return DimensionEstimate(
        d_hat=d_hat,
        strategy=strategy,
        alpha=alpha,
        trace=tuple(trace),
        method=fit.method,
        lags=fit.lags,
        converged=all(t.converged for t in trace),
        monotone=monotone,
    )


def _seed_int(seed) -> int:
    if seed is None:
        return 0
    if isinstance(seed, (list, tuple)):
        # Fold a composite seed into one entropy word.
        return int(np.random.SeedSequence(list(seed)).generate_state(1)[0])
    return int(seed)


#: Stable JSON report schema for dimension estimates.
REPORT_SCHEMA = {
    "type": "object",
    "required": ["method", "lags", "alpha", "strategy", "d_hat", "trace"],
    "properties": {
        "method": {"type": "string", "enum": ["amuse", "sobi"]},
        "lags": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "strategy": {"type": "string", "enum": list(STRATEGIES)},
        "d_hat": {"type": "integer", "minimum": 0},
        "trace": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["q", "stat", "df", "p_value", "converged"],
                "properties": {
                    "q": {"type": "integer", "minimum": 0},
                    "stat": {"type": "number", "minimum": 0},
                    "df": {"type": "integer", "minimum": 1},
                    "p_value": {"type": "number", "minimum": 0, "maximum": 1},
                    "converged": {"type": "boolean"},
                },
            },
        },
    },
}

#: Stable JSON report schema for a single test.
TEST_SCHEMA = {
    "type": "object",
    "required": ["method", "lags", "q", "stat", "df", "p_value", "converged"],
    "properties": {
        "method": {"type": "string", "enum": ["amuse", "sobi"]},
        "lags": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "q": {"type": "integer", "minimum": 0},
        "stat": {"type": "number", "minimum": 0},
        "df": {"type": "integer", "minimum": 1},
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "converged": {"type": "boolean"},
    },
}


def test_report(ts: TestResult) -> dict:
    return {
        "method": ts.method,
        "lags": list(ts.lags),
        "q": ts.q,
        "stat": ts.scaled_stat,
        "df": ts.df,
        "p_value": ts.p_value,
        "converged": ts.converged,
    }


def dimension_report(est: DimensionEstimate) -> dict:
    return {
        "method": est.method,
        "lags": list(est.lags),
        "alpha": est.alpha,
        "strategy": est.strategy,
        "d_hat": est.d_hat,
        "trace": [
            {
                "q": t.q,
                "stat": t.scaled_stat,
                "df": t.df,
                "p_value": t.p_value,
                "converged": t.converged,
            }
            for t in est.trace
        ],
    }
