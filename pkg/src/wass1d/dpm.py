"""Dirichlet-process Gaussian mixture sampler with predictive draws and
tail/moment diagnostics.

The model is the stick-breaking mixture: weights w_j = v_j prod_{k<j}(1-v_k)
with v_j ~ Beta(1, alpha), component locations from H = N(mu_H, sigma_H^2)
(location variant, shared kernel variance sigma^2 ~ InvGamma(beta, lam)) or
component (location, variance) pairs from a normal-inverse-gamma base
(location-scale variant), and alpha ~ Gamma(beta_alpha, lam_alpha).

Sampling uses the dependent-slice scheme with deterministic thresholds
xi_j = (1-kappa) kappa^j: slice variables restrict each observation to the
finitely many sticks above its slice, so no truncation of the mixture is
needed.  One sweep updates, in order: relabelling of occupied clusters by
occupancy, alpha (auxiliary-variable move given the occupied-cluster count,
placed just before the stick redraw so the pair is a valid blocked update),
stick fractions, cluster parameters, the kernel variance, slices, and
finally all assignments with Gumbel-max categorical draws in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .measures import DiscreteMeasure, SortedSample, block_mass, moment

_LOG_FLOOR = 5e-324  # smallest subnormal; log is about -744.4


@dataclass(frozen=True)
class DpmConfig:
    """Prior specification for the mixture.

    ``mixture`` selects the variant.  For "location", H = N(mu_H, sigma_H^2)
    and the shared kernel variance has an InvGamma(beta, lam) prior (shape,
    scale); for "location-scale", H is normal-inverse-gamma: sigma_j^2 ~
    InvGamma(beta, lam) and z_j | sigma_j^2 ~ N(mu_H, sigma_j^2 / sigma_H).
    The concentration has a Gamma(beta_alpha, lam_alpha) prior (shape, rate).
    ``fixed_sigma2`` pins the kernel variance (location variant only), for
    experiments that mimic the fixed-bandwidth theory setting.
    """

    mixture: str = "location"
    mu_H: float = 0.0
    sigma_H: float = 1.0
    beta: float = 1.0
    lam: float = 1.0
    beta_alpha: float = 1.0
    lam_alpha: float = 1.0
    fixed_sigma2: float | None = None
    slice_kappa: float = 0.5

    def __post_init__(self) -> None:
        if self.mixture not in ("location", "location-scale"):
            raise ValueError("mixture must be 'location' or 'location-scale'")
        for name in ("sigma_H", "beta", "lam", "beta_alpha", "lam_alpha"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.slice_kappa < 1.0:
            raise ValueError("slice_kappa must lie in (0, 1)")
        if self.fixed_sigma2 is not None:
            if self.mixture != "location":
                raise ValueError("fixed_sigma2 applies to the location variant")
            if self.fixed_sigma2 <= 0.0:
                raise ValueError("fixed_sigma2 must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "DpmConfig":
        return cls(**raw)

    def to_dict(self) -> dict:
        out = {
            "mixture": self.mixture,
            "mu_H": self.mu_H,
            "sigma_H": self.sigma_H,
            "beta": self.beta,
            "lam": self.lam,
            "beta_alpha": self.beta_alpha,
            "lam_alpha": self.lam_alpha,
            "slice_kappa": self.slice_kappa,
        }
        if self.fixed_sigma2 is not None:
            out["fixed_sigma2"] = self.fixed_sigma2
        return out


@dataclass(frozen=True)
class ChainConfig:
    """MCMC schedule: burn-in sweeps, kept predictive draws, thinning, seed."""

    burn_in: int = 1000
    n_draws: int = 10_000
    thinning: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.burn_in < 0 or self.n_draws < 1 or self.thinning < 1:
            raise ValueError("need burn_in >= 0, n_draws >= 1, thinning >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "ChainConfig":
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "burn_in": self.burn_in,
            "n_draws": self.n_draws,
            "thinning": self.thinning,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class DpmState:
    """Full sampler state after a sweep.

    ``locations`` (and ``scales`` in the location-scale variant) cover every
    instantiated stick, occupied or not; ``sigma2`` is the shared kernel
    variance (location variant, None otherwise).
    """

    assignments: np.ndarray
    locations: np.ndarray
    scales: np.ndarray | None
    sigma2: float | None
    alpha: float
    sticks: np.ndarray
    weights: np.ndarray
    slices: np.ndarray

    def n_sticks(self) -> int:
        return int(self.locations.size)

    def occupancy(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.n_sticks())

    def n_occupied(self) -> int:
        return int(np.count_nonzero(self.occupancy()))

    def validate(self, n: int) -> None:
        occ = self.occupancy()
        assert int(occ.sum()) == n
        assert self.assignments.min() >= 0
        assert self.assignments.max() < self.n_sticks()
        assert self.alpha > 0.0
        assert np.all(np.isfinite(self.weights))
        if self.sigma2 is not None:
            assert self.sigma2 > 0.0
        if self.scales is not None:
            assert np.all(self.scales > 0.0)


# ---------------------------------------------------------------------------
# Conjugate pieces
# ---------------------------------------------------------------------------

def _inv_gamma(shape: float, scale: float, rng: np.random.Generator, size=None):
    """InvGamma(shape, scale) draw: reciprocal of Gamma(shape, rate=scale)."""
    return 1.0 / rng.gamma(shape, 1.0 / scale, size=size)


def location_posterior_params(
    n_j: float, sum_j: float, sigma2: float, config: DpmConfig
) -> tuple[float, float]:
    """Normal-normal conditional for a cluster location.

    Precision adds: 1/sigma_H^2 + n_j/sigma^2; the mean weighs the prior
    mean and the data sum accordingly.
    """
    prec = 1.0 / config.sigma_H ** 2 + n_j / sigma2
    var = 1.0 / prec
    mean = (config.mu_H / config.sigma_H ** 2 + sum_j / sigma2) * var
    return mean, var


def draw_location_clusters(
    counts: np.ndarray,
    sums: np.ndarray,
    sigma2: float,
    config: DpmConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw every cluster location from its normal-normal conditional.

    Empty clusters (count 0) reduce to fresh draws from H.
    """
    prec = 1.0 / config.sigma_H ** 2 + counts / sigma2
    var = 1.0 / prec
    mean = (config.mu_H / config.sigma_H ** 2 + sums / sigma2) * var
    return mean + np.sqrt(var) * rng.standard_normal(counts.size)


def draw_location_scale_clusters(
    counts: np.ndarray,
    sums: np.ndarray,
    sumsqs: np.ndarray,
    config: DpmConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (location, variance) pairs from the normal-inverse-gamma posterior."""
    kap_n = config.sigma_H + counts
    means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    ss = np.maximum(sumsqs - counts * means * means, 0.0)
    mu_n = (config.sigma_H * config.mu_H + sums) / kap_n
    beta_n = config.beta + counts / 2.0
    lam_n = (
        config.lam
        + 0.5 * ss
        + 0.5 * config.sigma_H * counts * (means - config.mu_H) ** 2 / kap_n
    )
    scales = _inv_gamma(beta_n, lam_n, rng, size=counts.size)
    locs = mu_n + np.sqrt(scales / kap_n) * rng.standard_normal(counts.size)
    return locs, scales


def _update_alpha(
    alpha: float, k: int, n: int, config: DpmConfig, rng: np.random.Generator
) -> float:
    """Auxiliary-variable concentration update given k occupied clusters."""
    eta = max(float(rng.beta(alpha + 1.0, n)), 1e-300)
    rate = config.lam_alpha - math.log(eta)
    shape_hi = config.beta_alpha + k
    odds = (shape_hi - 1.0) / (n * rate)
    shape = shape_hi if rng.random() < odds / (1.0 + odds) else shape_hi - 1.0
    return float(rng.gamma(shape, 1.0 / rate))


def _stick_weights(sticks: np.ndarray) -> np.ndarray:
    carry = np.concatenate([[1.0], np.cumprod(1.0 - sticks)[:-1]])
    return sticks * carry


def _slice_thresholds(J: int, kappa: float) -> np.ndarray:
    return (1.0 - kappa) * kappa ** np.arange(J)


# ---------------------------------------------------------------------------
# Sampler
# ---------------------------------------------------------------------------

def init_state(
    data: SortedSample, config: DpmConfig, rng: int | np.random.Generator
) -> DpmState:
    """All observations in one cluster; parameter from its conditional,
    concentration and kernel variance from their priors."""
    if data.n < 1:
        raise ValueError("empty sample")
    rng = np.random.default_rng(rng)
    n = data.n
    x = data.values
    alpha = float(rng.gamma(config.beta_alpha, 1.0 / config.lam_alpha))
    counts = np.array([float(n)])
    sums = np.array([float(x.sum())])
    if config.mixture == "location":
        sigma2 = (
            config.fixed_sigma2
            if config.fixed_sigma2 is not None
            else float(_inv_gamma(config.beta, config.lam, rng))
        )
        locations = draw_location_clusters(counts, sums, sigma2, config, rng)
        scales = None
    else:
        sumsqs = np.array([float((x * x).sum())])
        locations, scales = draw_location_scale_clusters(
            counts, sums, sumsqs, config, rng
        )
        sigma2 = None
    sticks = rng.beta(np.array([1.0 + n]), np.array([alpha]))
    weights = _stick_weights(sticks)
    assignments = np.zeros(n, dtype=np.int64)
    xi = _slice_thresholds(1, config.slice_kappa)
    slices = xi[assignments] * np.maximum(rng.random(n), 2.0 ** -53)
    return DpmState(
        assignments=assignments,
        locations=locations,
        scales=scales,
        sigma2=sigma2,
        alpha=alpha,
        sticks=sticks,
        weights=weights,
        slices=slices,
    )


def gibbs_step(
    state: DpmState,
    data: SortedSample,
    config: DpmConfig,
    rng: np.random.Generator,
) -> DpmState:
    """One full sweep; returns the next state, invariants preserved."""
    x = data.values
    n = x.size
    kappa = config.slice_kappa

    # Re-index occupied clusters in occupancy order and drop empty sticks.
    occ = np.bincount(state.assignments, minlength=state.n_sticks())
    occupied = np.nonzero(occ)[0]
    order = occupied[np.argsort(-occ[occupied], kind="stable")]
    relabel = np.full(state.n_sticks(), -1, dtype=np.int64)
    relabel[order] = np.arange(order.size)
    c = relabel[state.assignments]
    k = order.size
    counts = occ[order].astype(float)

    # Concentration: collapsed move given the partition, immediately followed
    # by the stick redraw so (alpha, sticks) is a blocked update.
    alpha = _update_alpha(state.alpha, k, n, config, rng)

    tail = n - np.cumsum(counts)
    sticks = rng.beta(1.0 + counts, alpha + tail)

    # Cluster parameters and kernel variance.
    sums = np.bincount(c, weights=x, minlength=k)
    if config.mixture == "location":
        sigma2 = state.sigma2
        locations = draw_location_clusters(counts, sums, sigma2, config, rng)
        scales = None
        if config.fixed_sigma2 is None:
            resid = x - locations[c]
            sigma2 = float(
                _inv_gamma(
                    config.beta + 0.5 * n,
                    config.lam + 0.5 * float(resid @ resid),
                    rng,
                )
            )
        else:
            sigma2 = config.fixed_sigma2
    else:
        sumsqs = np.bincount(c, weights=x * x, minlength=k)
        locations, scales = draw_location_scale_clusters(
            counts, sums, sumsqs, config, rng
        )
        sigma2 = None

    # Slice variables, strictly inside (0, xi_{c_i}) so the current cluster
    # stays in its own candidate set and stick extension terminates.
    xi_occ = _slice_thresholds(k, kappa)
    slices = xi_occ[c] * np.maximum(rng.random(n), 2.0 ** -53)
    u_min = float(slices.min())

    # Extend sticks until the next threshold falls below every slice.
    sticks = list(sticks)
    locations = list(locations)
    scales = list(scales) if scales is not None else None
    J = k
    while (1.0 - kappa) * kappa ** J > u_min:
        sticks.append(float(rng.beta(1.0, alpha)))
        if config.mixture == "location":
            locations.append(
                float(config.mu_H + config.sigma_H * rng.standard_normal())
            )
        else:
            s2 = float(_inv_gamma(config.beta, config.lam, rng))
            scales.append(s2)
            locations.append(
                float(
                    config.mu_H
                    + math.sqrt(s2 / config.sigma_H) * rng.standard_normal()
                )
            )
        J += 1
    sticks = np.asarray(sticks)
    locations = np.asarray(locations)
    scales = np.asarray(scales) if scales is not None else None
    weights = _stick_weights(sticks)

    # Assignments: categorical over sticks above each slice, sampled by
    # Gumbel-max on the log scale (shift-invariant, no underflow).
    xi = _slice_thresholds(J, kappa)
    log_w = np.log(np.maximum(weights, _LOG_FLOOR))
    if config.mixture == "location":
        var_row = np.full(J, sigma2)
    else:
        var_row = scales
    gap = x[:, None] - locations[None, :]
    log_lik = -0.5 * (np.log(2.0 * math.pi * var_row)[None, :] + gap * gap / var_row[None, :])
    log_p = log_w[None, :] - np.log(xi)[None, :] + log_lik
    log_p = np.where(xi[None, :] > slices[:, None], log_p, -np.inf)
    gumbel = -np.log(-np.log(np.maximum(rng.random((n, J)), 2.0 ** -53)))
    c_new = np.argmax(log_p + gumbel, axis=1).astype(np.int64)

    return DpmState(
        assignments=c_new,
        locations=locations,
        scales=scales,
        sigma2=sigma2,
        alpha=alpha,
        sticks=sticks,
        weights=weights,
        slices=slices,
    )


def posterior_predictive_draw(
    state: DpmState, config: DpmConfig, rng: np.random.Generator
) -> float:
    """One draw from the mixture encoded by the state.

    Chooses an instantiated stick with its weight, or a fresh component from
    the base measure with the residual stick mass (the total weight beyond
    the instantiated sticks), then draws from the kernel.
    """
    r = rng.random()
    cum = np.cumsum(state.weights)
    idx = int(np.searchsorted(cum, r, side="right"))
    if idx < state.weights.size:
        z = float(state.locations[idx])
        s2 = state.sigma2 if state.scales is None else float(state.scales[idx])
    else:
        # landed in the residual mass: a tail atom is a fresh draw from H
        if config.mixture == "location":
            z = float(config.mu_H + config.sigma_H * rng.standard_normal())
            s2 = state.sigma2
        else:
            s2 = float(_inv_gamma(config.beta, config.lam, rng))
            z = float(
                config.mu_H + math.sqrt(s2 / config.sigma_H) * rng.standard_normal()
            )
    return z + math.sqrt(s2) * float(rng.standard_normal())


@dataclass
class ChainDiagnostics:
    """Post burn-in traces, one entry per kept draw."""

    burn_in: int
    n_draws: int
    thinning: int
    seed: int
    alpha_trace: list[float] = field(default_factory=list)
    sigma2_trace: list[float] = field(default_factory=list)
    n_clusters_trace: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "burn_in": self.burn_in,
            "n_draws": self.n_draws,
            "thinning": self.thinning,
            "seed": self.seed,
            "alpha_trace": self.alpha_trace,
            "sigma2_trace": self.sigma2_trace,
            "n_clusters_trace": self.n_clusters_trace,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _sigma2_summary(state: DpmState, n: int) -> float:
    if state.sigma2 is not None:
        return float(state.sigma2)
    occ = state.occupancy().astype(float)
    return float((occ * state.scales).sum() / n)


def run_chain(
    data: SortedSample, config: DpmConfig, chain: ChainConfig
) -> tuple[np.ndarray, ChainDiagnostics]:
    """Burn in, then one predictive draw per kept sweep.

    Identical (data, config, chain) reproduce the draws bit for bit.
    """
    rng = np.random.default_rng(chain.seed)
    state = init_state(data, config, rng)
    for _ in range(chain.burn_in):
        state = gibbs_step(state, data, config, rng)
    diagnostics = ChainDiagnostics(
        burn_in=chain.burn_in,
        n_draws=chain.n_draws,
        thinning=chain.thinning,
        seed=chain.seed,
    )
    draws = np.empty(chain.n_draws)
    for t in range(chain.n_draws):
        for _ in range(chain.thinning):
            state = gibbs_step(state, data, config, rng)
        draws[t] = posterior_predictive_draw(state, config, rng)
        diagnostics.alpha_trace.append(float(state.alpha))
        diagnostics.sigma2_trace.append(_sigma2_summary(state, data.n))
        diagnostics.n_clusters_trace.append(state.n_occupied())
    return draws, diagnostics


def prior_predictive_sample(config: DpmConfig, n_draws: int, seed: int) -> np.ndarray:
    """iid draws from the single-observation prior predictive law.

    Marginally one observation is z + sigma * eps with z ~ H and the kernel
    variance from its prior; used as the no-data baseline in the study.
    """
    if n_draws < 1:
        raise ValueError("need n_draws >= 1")
    rng = np.random.default_rng(seed)
    if config.mixture == "location":
        s2 = (
            np.full(n_draws, config.fixed_sigma2)
            if config.fixed_sigma2 is not None
            else _inv_gamma(config.beta, config.lam, rng, size=n_draws)
        )
        z = config.mu_H + config.sigma_H * rng.standard_normal(n_draws)
    else:
        s2 = _inv_gamma(config.beta, config.lam, rng, size=n_draws)
        z = config.mu_H + np.sqrt(s2 / config.sigma_H) * rng.standard_normal(n_draws)
    return z + np.sqrt(s2) * rng.standard_normal(n_draws)


# ---------------------------------------------------------------------------
# Theorem-condition diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailMassReport:
    """Smallest K' with P(B_m) <= K' 2^{-pm} over the checked range."""

    p: float
    m_max: int
    k_prime: float
    profile: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "m_max": self.m_max,
            "k_prime": self.k_prime,
            "profile": [{"m": m, "value": v} for m, v in self.profile],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def tail_mass_diagnostic(
    sample: DiscreteMeasure, p: float, m_max: int
) -> TailMassReport:
    """Per-block profile 2^{pm} P(B_m) and its maximum over m <= m_max."""
    if m_max < 0:
        raise ValueError("m_max must be >= 0")
    profile = tuple(
        (m, 2.0 ** (p * m) * block_mass(sample, m)) for m in range(m_max + 1)
    )
    return TailMassReport(
        p=p, m_max=m_max, k_prime=max(v for _, v in profile), profile=profile
    )


def moment_diagnostic(sample: DiscreteMeasure, p: float, delta: float) -> float:
    """M_{2p+delta} of the sample, the moment entering the rate hypotheses."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    return moment(sample, 2.0 * p + delta)
