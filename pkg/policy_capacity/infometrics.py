"""
Information metrics over a return matrix

PIC is the plug-in mutual information between the discretized return and the
parameter particle. POIC replaces the return with a binary optimality
variable, p(O=1 | r) = exp((r - r_max) / eta), and searches eta for the
maximum. All logarithms are natural. Every reduction is either over sorted
data or an exactly rounded fsum, so permuting episodes or particles leaves
every metric bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple

import numpy as np
from loguru import logger
from scipy.optimize import golden
from scipy.special import entr, logsumexp

from policy_capacity.errors import EstimationError
from policy_capacity.rollout import ReturnMatrix

DEFAULT_BINS = 100_000
GRID_SIZE = 128
GRID_LOG10_LOW = -6.0
GRID_LOG10_HIGH = 3.0
UNIMODAL_TOL = 1e-12


class PicEstimate(NamedTuple):
    pic: float
    h_r: float
    h_r_given_theta: float


class PoicEstimate(NamedTuple):
    poic: float
    h_o: float
    h_o_given_theta: float


class Prop1Check(NamedTuple):
    empirical_misorder_rate: float
    bound: float
    trials: int = 0

    @property
    def standard_error(self) -> float:
        if self.trials == 0:
            return 0.0
        p = self.empirical_misorder_rate
        return math.sqrt(max(p * (1 - p), 1.0 / self.trials) / self.trials)

    def holds(self, n_se: float = 3.0) -> bool:
        return self.empirical_misorder_rate <= self.bound + n_se * self.standard_error


@dataclass(frozen=True)
class TemperatureSearch:
    grid: tuple[float, ...]
    evaluated: tuple[tuple[float, float], ...]
    eta_star: float
    poic_star: float
    refined: bool = False


@dataclass
class MetricsReport:
    pic: float
    h_r: float
    h_r_given_theta: float
    poic: float
    h_o: float
    h_o_given_theta: float
    eta_star: float
    normalized_variance: float
    r_min: float
    r_max: float
    bins: int
    n: int
    m: int
    r_max_ref: float
    eta_fixed: bool = False
    provenance: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


# ===== HISTOGRAMS =====


def _bin_indices(values: np.ndarray, r_min: float, r_max: float, bins: int) -> np.ndarray:
    """Equal-width bin index; r_max falls in the last bin"""
    if r_max == r_min:
        return np.zeros(values.shape, dtype=np.int64)
    scaled = (values - r_min) / (r_max - r_min) * bins
    return np.clip(np.floor(scaled).astype(np.int64), 0, bins - 1)


def histogram(values: Any, r_min: float, r_max: float, bins: int) -> np.ndarray:
    """Probability vector of length `bins` over [r_min, r_max]"""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise EstimationError("histogram of an empty value list")
    if bins < 2:
        raise EstimationError(f"need at least 2 bins, got {bins}")
    if r_min > r_max:
        raise EstimationError(f"r_min {r_min} exceeds r_max {r_max}")
    idx = _bin_indices(values, r_min, r_max, bins)
    return np.bincount(idx, minlength=bins) / values.size


def entropy(probs: Any) -> float:
    """Shannon entropy in nats with 0 log 0 = 0"""
    return math.fsum(entr(np.asarray(probs, dtype=np.float64)).tolist())


def bernoulli_entropy(p: Any) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    return entr(p) + entr(1.0 - p)


# ===== PIC =====


def check_bins(bins: int, m: int, strict: bool = True) -> None:
    if bins < 2:
        raise EstimationError(f"need at least 2 bins, got {bins}")
    if bins <= m:
        if strict:
            raise EstimationError(f"B={bins} must exceed M={m} episodes per particle")
        logger.warning("B={} does not exceed M={}; PIC will be biased downward", bins, m)


def estimate_pic(m: ReturnMatrix, bins: int = DEFAULT_BINS, strict: bool = True) -> PicEstimate:
    """PIC with shared bin edges for the marginal and every per-particle histogram"""
    check_bins(bins, m.m, strict)
    if m.r_max == m.r_min:
        return PicEstimate(0.0, 0.0, 0.0)

    idx = _bin_indices(m.returns, m.r_min, m.r_max, bins)
    _, counts = np.unique(idx, return_counts=True)
    h_r = entropy(counts / idx.size)

    # per-(particle, bin) counts; keys are sorted so each particle's bins are contiguous
    rows = np.repeat(np.arange(m.n, dtype=np.int64), m.m)
    keys, cell_counts = np.unique(rows * bins + idx.ravel(), return_counts=True)
    starts = np.flatnonzero(np.r_[True, np.diff(keys // bins) != 0])
    row_entropies = np.add.reduceat(entr(cell_counts / m.m), starts)
    h_cond = math.fsum(row_entropies.tolist()) / m.n

    return PicEstimate(max(0.0, h_r - h_cond), h_r, h_cond)


# ===== POIC =====


def _check_ref(m: ReturnMatrix, r_max_ref: float | None) -> float:
    if r_max_ref is None:
        return m.r_max
    if r_max_ref < m.r_max:
        raise EstimationError(f"r_max_ref {r_max_ref} is below the observed maximum {m.r_max}")
    return float(r_max_ref)


def _poic_sorted(sorted_returns: np.ndarray, eta: float, r_max_ref: float) -> PoicEstimate:
    n, m = sorted_returns.shape
    exponents = (sorted_returns - r_max_ref) / eta
    p_rows = np.exp(logsumexp(exponents, axis=1) - math.log(m))
    p_rows = np.clip(p_rows, 0.0, 1.0)
    p_bar = math.fsum(p_rows.tolist()) / n
    h_o = float(bernoulli_entropy(p_bar))
    h_cond = math.fsum(bernoulli_entropy(p_rows).tolist()) / n
    return PoicEstimate(max(0.0, h_o - h_cond), h_o, h_cond)


def estimate_poic_at(
    m: ReturnMatrix, eta: float, r_max_ref: float | None = None
) -> PoicEstimate:
    """POIC at a fixed temperature; r_max_ref defaults to the observed maximum"""
    if not eta > 0:
        raise EstimationError(f"temperature must be > 0, got {eta}")
    ref = _check_ref(m, r_max_ref)
    return _poic_sorted(np.sort(m.returns, axis=1), float(eta), ref)


def poic_curve(m: ReturnMatrix, etas: Any, r_max_ref: float | None = None) -> np.ndarray:
    """POIC evaluated at each temperature in `etas`"""
    ref = _check_ref(m, r_max_ref)
    sorted_returns = np.sort(m.returns, axis=1)
    out = []
    for eta in np.asarray(etas, dtype=np.float64):
        if not eta > 0:
            raise EstimationError(f"temperature must be > 0, got {eta}")
        out.append(_poic_sorted(sorted_returns, float(eta), ref).poic)
    return np.asarray(out)


def temperature_grid(
    r_range: float,
    size: int = GRID_SIZE,
    log10_low: float = GRID_LOG10_LOW,
    log10_high: float = GRID_LOG10_HIGH,
) -> np.ndarray:
    """Log-spaced temperatures from r_range * 10**log10_low to r_range * 10**log10_high"""
    return r_range * 10.0 ** np.linspace(log10_low, log10_high, size)


def is_unimodal(values: Any, tol: float = UNIMODAL_TOL) -> bool:
    values = np.asarray(values, dtype=np.float64)
    if values.size < 3:
        return True
    peak = int(np.argmax(values))
    rising = np.all(np.diff(values[: peak + 1]) >= -tol)
    falling = np.all(np.diff(values[peak:]) <= tol)
    return bool(rising and falling)


def optimize_temperature(
    m: ReturnMatrix,
    r_max_ref: float | None = None,
    size: int = GRID_SIZE,
    log10_low: float = GRID_LOG10_LOW,
    log10_high: float = GRID_LOG10_HIGH,
) -> TemperatureSearch:
    """Grid search over eta in units of the return range, then golden-section refinement"""
    if m.r_max == m.r_min:
        return TemperatureSearch(grid=(), evaluated=(), eta_star=1.0, poic_star=0.0)

    ref = _check_ref(m, r_max_ref)
    r_range = m.r_max - m.r_min
    sorted_returns = np.sort(m.returns, axis=1)
    grid = temperature_grid(r_range, size, log10_low, log10_high)
    log_grid = np.log10(grid)
    values = poic_curve(m, grid, ref).tolist()
    evaluated = list(zip(grid.tolist(), values))

    if not is_unimodal(values):
        logger.warning("POIC is not unimodal in log(eta) on the search grid")

    best = int(np.argmax(values))
    eta_star, poic_star = float(grid[best]), float(values[best])
    refined = False
    if 0 < best < size - 1:

        def negative_poic(log_eta: float) -> float:
            return -_poic_sorted(sorted_returns, float(10.0**log_eta), ref).poic

        try:
            x = golden(negative_poic, brack=tuple(log_grid[best - 1 : best + 2]), tol=1e-10)
            candidate = -negative_poic(float(x))
            evaluated.append((float(10.0**x), candidate))
            if candidate > poic_star:
                eta_star, poic_star, refined = float(10.0**x), candidate, True
        except ValueError as e:
            logger.warning("Golden-section refinement skipped: {}", e)

    return TemperatureSearch(
        grid=tuple(grid.tolist()),
        evaluated=tuple(evaluated),
        eta_star=eta_star,
        poic_star=poic_star,
        refined=refined,
    )


# ===== OTHER METRICS =====


def normalized_variance(m: ReturnMatrix) -> float:
    """Population variance of all returns divided by the return range"""
    if m.r_max == m.r_min:
        return 0.0
    flat = m.returns.ravel()
    mean = math.fsum(flat.tolist()) / flat.size
    var = math.fsum(((flat - mean) ** 2).tolist()) / flat.size
    return var / (m.r_max - m.r_min)


def channel_capacity(reports: list[MetricsReport]) -> tuple[float, float]:
    """Maxima of PIC and POIC over per-policy reports, one per input distribution"""
    if not reports:
        raise EstimationError("channel capacity needs at least one report")
    return max(r.pic for r in reports), max(r.poic for r in reports)


def channel_capacity_table(reports: list[MetricsReport], labels: list[str]) -> dict[str, Any]:
    """Capacity row with the entropy components and labels of the maximizing policies"""
    pic_cc, poic_cc = channel_capacity(reports)
    i_pic = max(range(len(reports)), key=lambda i: reports[i].pic)
    i_poic = max(range(len(reports)), key=lambda i: reports[i].poic)
    return {
        "pic": pic_cc,
        "h_r": reports[i_pic].h_r,
        "h_r_given_theta": reports[i_pic].h_r_given_theta,
        "pic_policy": labels[i_pic],
        "poic": poic_cc,
        "h_o": reports[i_poic].h_o,
        "h_o_given_theta": reports[i_poic].h_o_given_theta,
        "eta_star": reports[i_poic].eta_star,
        "poic_policy": labels[i_poic],
    }


def compute_report(
    m: ReturnMatrix,
    bins: int = DEFAULT_BINS,
    strict_bins: bool = True,
    r_max_ref: float | None = None,
    eta: float | None = None,
) -> MetricsReport:
    """All metrics for one matrix; a fixed eta bypasses the temperature search"""
    from policy_capacity import __version__

    pic = estimate_pic(m, bins, strict_bins)
    ref = _check_ref(m, r_max_ref)
    if eta is not None:
        poic = estimate_poic_at(m, eta, ref)
        eta_star = float(eta)
    else:
        search = optimize_temperature(m, ref)
        eta_star = search.eta_star
        poic = (
            estimate_poic_at(m, eta_star, ref)
            if search.grid
            else PoicEstimate(0.0, 0.0, 0.0)
        )

    provenance = {"version": __version__, **m.provenance()}
    return MetricsReport(
        pic=pic.pic,
        h_r=pic.h_r,
        h_r_given_theta=pic.h_r_given_theta,
        poic=poic.poic,
        h_o=poic.h_o,
        h_o_given_theta=poic.h_o_given_theta,
        eta_star=eta_star,
        normalized_variance=normalized_variance(m),
        r_min=m.r_min,
        r_max=m.r_max,
        bins=bins,
        n=m.n,
        m=m.m,
        r_max_ref=ref,
        eta_fixed=eta is not None,
        provenance=provenance,
    )


# ===== MISORDERING BOUND =====


def gaussian_entropy(sigma: float) -> float:
    """Differential entropy of N(mu, sigma^2) in nats"""
    if sigma <= 0:
        raise EstimationError(f"sigma must be > 0, got {sigma}")
    return math.log(sigma * math.sqrt(2 * math.pi * math.e))


def prop1_bound(mu1: float, mu2: float, h1: float, h2: float, n: int) -> float:
    """Upper bound on the probability that N-sample means order two policies wrongly"""
    if n < 1:
        raise EstimationError(f"N must be >= 1, got {n}")
    if mu1 < mu2:
        mu1, mu2, h1, h2 = mu2, mu1, h2, h1
    ratio = (mu1 - mu2) / (math.exp(h1) + math.exp(h2))
    return math.exp(-math.pi * math.e * n * ratio * ratio)


def verify_prop1(
    mu1: float,
    sigma1: float,
    mu2: float,
    sigma2: float,
    n: int,
    trials: int = 100_000,
    seed: int = 0,
    chunk: int = 10_000,
) -> Prop1Check:
    """Monte Carlo misordering rate of N-sample means against the bound"""
    if sigma1 <= 0 or sigma2 <= 0:
        raise EstimationError(f"sigmas must be > 0, got {sigma1}, {sigma2}")
    if trials < 1:
        raise EstimationError(f"trials must be >= 1, got {trials}")
    if mu1 < mu2:
        mu1, sigma1, mu2, sigma2 = mu2, sigma2, mu1, sigma1
    bound = prop1_bound(mu1, mu2, gaussian_entropy(sigma1), gaussian_entropy(sigma2), n)

    rng = np.random.default_rng(seed)
    misordered = 0
    done = 0
    while done < trials:
        k = min(chunk, trials - done)
        means1 = rng.normal(mu1, sigma1, size=(k, n)).mean(axis=1)
        means2 = rng.normal(mu2, sigma2, size=(k, n)).mean(axis=1)
        misordered += int(np.count_nonzero(means1 < means2))
        done += k
    return Prop1Check(misordered / trials, bound, trials)
