"""Core signal model: discrete phase configurations, channels, SNR metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when a phase configuration and a channel set disagree in length."""


def to_db(x):
    """Linear power -> dB."""
    return 10.0 * np.log10(x)


def from_db(x_db):
    """dB -> linear power."""
    return 10.0 ** (np.asarray(x_db) / 10.0)


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """Array of N discrete phase shifts, stored as integer indices.

    Entry ``indices[n]`` encodes the angle ``2*pi*indices[n]/k``. Storing
    indices (rather than floats) makes membership in the allowed phase set
    exact by construction and makes configurations hashable.
    """

    indices: np.ndarray
    k: int

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        if self.k < 2:
            raise ValueError(f"phase resolution k must be >= 2, got {self.k}")
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if idx.size and (idx.min() < 0 or idx.max() >= self.k):
            raise ValueError(f"phase indices must lie in [0, {self.k})")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def n(self) -> int:
        return self.indices.size

    @property
    def angles(self) -> np.ndarray:
        """Phase shifts in radians."""
        return 2.0 * np.pi * self.indices / self.k

    def __eq__(self, other):
        if not isinstance(other, PhaseConfig):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.k, self.indices.tobytes()))


@dataclass(frozen=True)
class ChannelSet:
    """Direct gains (U,) and reflected gains (U, N) for one network draw."""

    direct: np.ndarray
    reflected: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.direct, dtype=np.complex128))
        r = np.ascontiguousarray(np.asarray(self.reflected, dtype=np.complex128))
        if d.ndim != 1 or r.ndim != 2:
            raise ValueError("direct must be (U,), reflected must be (U, N)")
        if d.size < 1:
            raise ValueError("need at least one receiver position")
        if r.shape[0] != d.size:
            raise DimensionMismatchError(
                f"direct has {d.size} positions but reflected has {r.shape[0]}"
            )
        if not (np.all(np.isfinite(d.view(np.float64))) and
                np.all(np.isfinite(r.view(np.float64)))):
            raise ValueError("channel gains must be finite")
        d.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "direct", d)
        object.__setattr__(self, "reflected", r)

    @property
    def n_positions(self) -> int:
        return self.direct.size

    @property
    def n_elements(self) -> int:
        return self.reflected.shape[1]


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power and noise power, both linear watts."""

    power: float
    noise_power: float

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError(f"transmit power must be > 0, got {self.power}")
        if not self.noise_power > 0:
            raise ValueError(f"noise power must be > 0, got {self.noise_power}")

    @property
    def snr_scale(self) -> float:
        return self.power / self.noise_power


@dataclass(frozen=True)
class BeamformingResult:
    """A chosen configuration together with its per-position SNRs and provenance."""

    config: PhaseConfig
    snr_per_position: np.ndarray
    min_snr: float
    algorithm_id: str
    seed: int
    sample_budget: int
    work: int = 0

    def __post_init__(self):
        snrs = np.ascontiguousarray(np.asarray(self.snr_per_position, dtype=np.float64))
        snrs.flags.writeable = False
        object.__setattr__(self, "snr_per_position", snrs)


def _check_lengths(channels: ChannelSet, config: PhaseConfig):
    if config.n != channels.n_elements:
        raise DimensionMismatchError(
            f"config has {config.n} phases but channel set has "
            f"{channels.n_elements} elements"
        )


def effective_gain_all(channels: ChannelSet, config: PhaseConfig) -> np.ndarray:
    """Effective complex gain per position: direct plus phased reflected sum."""
    _check_lengths(channels, config)
    if config.n == 0:
        return channels.direct.copy()
    return channels.direct + channels.reflected @ np.exp(1j * config.angles)


def effective_gain(channels: ChannelSet, config: PhaseConfig, u: int) -> complex:
    """Effective gain at a single position u (0-based)."""
    _check_lengths(channels, config)
    if not 0 <= u < channels.n_positions:
        raise IndexError(f"position {u} out of range [0, {channels.n_positions})")
    if config.n == 0:
        return complex(channels.direct[u])
    return complex(channels.direct[u] + channels.reflected[u] @ np.exp(1j * config.angles))


def snr_all(channels: ChannelSet, config: PhaseConfig, budget: LinkBudget) -> np.ndarray:
    """Per-position linear SNR: |effective gain|^2 * P / sigma^2."""
    g = effective_gain_all(channels, config)
    return np.abs(g) ** 2 * budget.snr_scale


def min_snr(snrs) -> float:
    """Minimum of a nonempty SNR vector."""
    snrs = np.asarray(snrs, dtype=np.float64)
    if snrs.size == 0:
        raise ValueError("cannot take the minimum of an empty SNR vector")
    return float(snrs.min())


def make_result(channels: ChannelSet, config: PhaseConfig, budget: LinkBudget,
                algorithm_id: str, seed: int, sample_budget: int,
                work: int = 0) -> BeamformingResult:
    snrs = snr_all(channels, config, budget)
    return BeamformingResult(config=config, snr_per_position=snrs,
                             min_snr=min_snr(snrs), algorithm_id=algorithm_id,
                             seed=seed, sample_budget=sample_budget, work=work)


def sum_rate_uniform(channels: ChannelSet, config: PhaseConfig,
                     budget: LinkBudget) -> float:
    """Sum rate (bits/s/Hz) with distinct messages and a uniform power split.

    Each of the U positions gets power P/U; the other U-1 streams act as
    interference: SINR_u = (|g_u|^2 P / U) / (|g_u|^2 P (U-1)/U + sigma^2).
    """
    u_count = channels.n_positions
    if u_count < 2:
        raise ValueError("sum rate with a uniform split needs U >= 2 positions")
    g2p = np.abs(effective_gain_all(channels, config)) ** 2 * budget.power
    sinr = (g2p / u_count) / (g2p * (u_count - 1) / u_count + budget.noise_power)
    return float(np.sum(np.log2(1.0 + sinr)))


def is_good(result: BeamformingResult, channels: ChannelSet,
            budget: LinkBudget) -> bool:
    """True iff the chosen configuration leaves no position below its
    direct-only SNR."""
    baseline = np.abs(channels.direct) ** 2 * budget.snr_scale
    return bool(np.all(result.snr_per_position >= baseline))
