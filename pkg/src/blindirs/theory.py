"""Numerical evaluation and statistical validation of the scaling-law
quantities: vote-margin probability, agreement statistics, achievability and
converse proxies, and log-log slope fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algorithms import (TieBreakPolicy, cpp_all_configs, mv_csm,
                         partition_blocks)
from .channels import substream
from .model import ChannelSet, PhaseConfig


def p1(u_count: int) -> float:
    """Vote-margin probability: (1/2)^U * C(U-1, (U-1)/2) for odd U and
    (1/2)^U * C(U-1, U/2-1) for even U; ~ 1/sqrt(2*pi*U) for large U.

    Computed in log space so it stays finite for large U.
    """
    if u_count < 1:
        raise ValueError("need at least one position")
    m = (u_count - 1) // 2 if u_count % 2 == 1 else u_count // 2 - 1
    log_binom = (math.lgamma(u_count) - math.lgamma(m + 1)
                 - math.lgamma(u_count - m))
    return math.exp(log_binom - u_count * math.log(2.0))


def hoeffding_radius(trials: int, delta: float = 0.05) -> float:
    """Two-sided concentration radius: P(|p_hat - p| >= r) <= delta."""
    return math.sqrt(math.log(2.0 / delta) / (2.0 * trials))


def vote_match_probability(u_count: int, trials: int, seed: int
                           ) -> tuple[float, float]:
    """Empirical probability that a plurality vote over U i.i.d. uniform
    binary preferences matches a given position's own preference, with random
    tie-breaking. Converges to 1/2 + p1(U). Returns (frequency, radius).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if u_count == 1:
        return 1.0, hoeffding_radius(trials)
    rng = substream(seed, 0)
    votes = rng.integers(0, 2, size=(trials, u_count))
    ones = votes.sum(axis=1)
    winner = np.where(2 * ones > u_count, 1, 0)
    tied = 2 * ones == u_count
    if tied.any():
        winner = np.where(tied, rng.integers(0, 2, size=trials), winner)
    freq = float(np.mean(winner == votes[:, 0]))
    return freq, hoeffding_radius(trials)


@dataclass(frozen=True)
class AgreementStats:
    """Per-position agreement between a voted configuration and the
    per-position aligned phases.

    xi[u] counts agreeing elements; m1[u]/m2[u] are the mean aligned-frame
    real parts Re(h_{u,n} e^{j theta_n} / e^{j angle(h_{u,0})}) over the
    agreement / disagreement element sets (NaN when a set is empty).
    """

    agree: np.ndarray  # (U, N) bool
    xi: np.ndarray     # (U,)
    m1: np.ndarray     # (U,)
    m2: np.ndarray     # (U,)


def agreement_stats(channels: ChannelSet, voted: PhaseConfig,
                    k: int) -> AgreementStats:
    cpp_idx = np.stack([cfg.indices for cfg in cpp_all_configs(channels, k)])
    agree = cpp_idx == voted.indices[None, :]
    # aligned-frame real part of each reflected contribution
    contrib = np.real(channels.reflected * np.exp(1j * voted.angles)[None, :]
                      * np.exp(-1j * np.angle(channels.direct))[:, None])
    u_count = channels.n_positions
    m1 = np.full(u_count, np.nan)
    m2 = np.full(u_count, np.nan)
    for u in range(u_count):
        if agree[u].any():
            m1[u] = contrib[u, agree[u]].mean()
        if (~agree[u]).any():
            m2[u] = contrib[u, ~agree[u]].mean()
    return AgreementStats(agree=agree, xi=agree.sum(axis=1), m1=m1, m2=m2)


def vote_over_aligned(channels: ChannelSet, k: int,
                      tie: TieBreakPolicy = TieBreakPolicy()) -> PhaseConfig:
    """Plurality vote over the per-position aligned configurations: the
    large-sample limit of the voting pipeline, where each position's blind
    solution coincides with its aligned phases."""
    return mv_csm(cpp_all_configs(channels, k), tie)


def partition_over_aligned(channels: ChannelSet, k: int) -> PhaseConfig:
    """Large-sample limit of the partitioned pipeline: block u takes
    position u's aligned phases."""
    n = channels.n_elements
    u_count = channels.n_positions
    cfgs = cpp_all_configs(channels, k)
    out = np.empty(n, dtype=np.int64)
    for u, block in enumerate(partition_blocks(n, u_count)):
        out[block] = cfgs[u].indices[block]
    return PhaseConfig(indices=out, k=k)


def achievability_bound(n: int, u_count: int, power: float,
                        noise_power: float, c_min: float,
                        coeff: float = 1.0) -> float:
    """Lower-bound scaling proxy: coeff * 4 P c_min^2 / (sigma^2 pi^2) * N^2/U.

    The true guarantee is an order result; the constant is configurable and
    validation should compare exponents, not absolute values.
    """
    if n < 1 or u_count < 1:
        raise ValueError("need N >= 1 and U >= 1")
    return coeff * 4.0 * power * c_min ** 2 / (noise_power * np.pi ** 2) \
        * n ** 2 / u_count


def converse_bound(n: int, u_count: int, power: float, noise_power: float,
                   c_max: float, eta: float, coeff: float = 1.0) -> float:
    """Upper-bound scaling proxy:
    coeff * P eta^2 c_max^2 / sigma^2 * (N + N^2 sqrt(ln NU) / U^(1/4))."""
    if n < 1 or u_count < 1:
        raise ValueError("need N >= 1 and U >= 1")
    return coeff * power * eta ** 2 * c_max ** 2 / noise_power * (
        n + n ** 2 * math.sqrt(math.log(n * u_count)) / u_count ** 0.25)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float


def scaling_fit(x, y) -> SlopeFit:
    """Ordinary least-squares slope of log(y) against log(x), with the
    standard error of the slope. Needs >= 4 distinct positive sweep points.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be matching one-dimensional arrays")
    if np.unique(x).size < 4:
        raise ValueError("need at least 4 distinct sweep points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive values")
    lx = np.log(x)
    ly = np.log(y)
    lx_c = lx - lx.mean()
    sxx = float(np.sum(lx_c ** 2))
    slope = float(np.sum(lx_c * ly) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    dof = lx.size - 2
    stderr = float(np.sqrt(np.sum(resid ** 2) / dof / sxx))
    return SlopeFit(slope=slope, stderr=stderr, intercept=intercept)
