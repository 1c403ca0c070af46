"""Channel generators: equal-magnitude random-phase model and pathloss-Rayleigh."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .model import ChannelSet

# Substream labels for the seed-splitting discipline. Every generator derives
# its bit stream from SeedSequence(seed, spawn_key=(label, ...)), so runs are
# reproducible regardless of execution order or parallelism.
STREAM_CHANNELS = 0
STREAM_CONFIGS = 1
STREAM_NOISE = 2
STREAM_TIEBREAK = 3
STREAM_PROBE = 4


def substream(seed: int, *path: int) -> np.random.Generator:
    """Named, splittable RNG stream keyed by (seed, path)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(path)))


@dataclass(frozen=True)
class Topology:
    """Base station, reflecting surface, and receiver coordinates in meters."""

    bs_position: np.ndarray
    irs_position: np.ndarray
    receiver_positions: np.ndarray  # (U, 3)

    def __post_init__(self):
        bs = np.asarray(self.bs_position, dtype=np.float64)
        irs = np.asarray(self.irs_position, dtype=np.float64)
        rx = np.atleast_2d(np.asarray(self.receiver_positions, dtype=np.float64))
        object.__setattr__(self, "bs_position", bs)
        object.__setattr__(self, "irs_position", irs)
        object.__setattr__(self, "receiver_positions", rx)
        for d in (self.d_bs_irs, *self.d_bs_user, *self.d_irs_user):
            if not d > 0:
                raise ValueError("all pairwise distances must be positive")

    @property
    def n_positions(self) -> int:
        return self.receiver_positions.shape[0]

    @property
    def d_bs_irs(self) -> float:
        return float(np.linalg.norm(self.bs_position - self.irs_position))

    @property
    def d_bs_user(self) -> np.ndarray:
        return np.linalg.norm(self.receiver_positions - self.bs_position, axis=1)

    @property
    def d_irs_user(self) -> np.ndarray:
        return np.linalg.norm(self.receiver_positions - self.irs_position, axis=1)


# Default desk-scale layout: receivers on a 5 m grid in the x/-y quadrant,
# base station at the origin, surface mounted on the y-z plane near the BS.
DEFAULT_BS_POSITION = (0.0, 0.0, 0.0)
DEFAULT_IRS_POSITION = (0.0, -2.0, 3.0)


def desk_topology(u_count: int,
                  bs_position=DEFAULT_BS_POSITION,
                  irs_position=DEFAULT_IRS_POSITION) -> Topology:
    """Receiver u (1-based) at (5*((u-1) mod 5 + 1), -5*(floor((u-1)/5) + 1), 0)."""
    u = np.arange(1, u_count + 1)
    rx = np.stack([5.0 * ((u - 1) % 5 + 1),
                   -5.0 * ((u - 1) // 5 + 1),
                   np.zeros(u_count)], axis=1)
    return Topology(np.asarray(bs_position, dtype=np.float64),
                    np.asarray(irs_position, dtype=np.float64), rx)


@dataclass(frozen=True)
class Assumption1Params:
    """Magnitudes for the equal-magnitude random-phase channel model.

    ``reflected_magnitudes[u]`` is the common magnitude of every reflected
    gain at position u; ``direct_magnitudes[u]`` is the direct gain magnitude.
    """

    direct_magnitudes: np.ndarray
    reflected_magnitudes: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direct_magnitudes, dtype=np.float64)
        c = np.asarray(self.reflected_magnitudes, dtype=np.float64)
        if not (np.all(np.isfinite(d)) and np.all(d > 0)):
            raise ValueError("direct magnitudes must be positive and finite")
        if not (np.all(np.isfinite(c)) and np.all(c > 0)):
            raise ValueError("reflected magnitudes must be positive and finite")
        object.__setattr__(self, "direct_magnitudes", d)
        object.__setattr__(self, "reflected_magnitudes", c)


def default_assumption1_params(u_count: int, n_elements: int,
                               c: float = 1.0,
                               direct_magnitude: float | None = None
                               ) -> Assumption1Params:
    """Default magnitudes: all c_u equal to ``c``; unless overridden, the
    direct magnitude is sqrt(N)*c/10, i.e. 20 dB below the fully aligned
    reflected aggregate, so both terms of the received signal stay relevant."""
    c_vec = np.full(u_count, c)
    if direct_magnitude is None:
        direct_magnitude = np.sqrt(max(n_elements, 1)) * c / 10.0
    return Assumption1Params(np.full(u_count, direct_magnitude), c_vec)


def gen_assumption1(u_count: int, n_elements: int, params: Assumption1Params,
                    seed: int) -> ChannelSet:
    """Equal-magnitude channels with i.i.d. uniform phases.

    Stream order: one uniform draw per (u, n) pair, direct gain first, then
    elements in index order, positions outermost.
    """
    if u_count < 1 or n_elements < 1:
        raise ValueError("need u_count >= 1 and n_elements >= 1")
    if params.direct_magnitudes.size != u_count or \
            params.reflected_magnitudes.size != u_count:
        raise ValueError("params must provide one magnitude per position")
    rng = substream(seed, STREAM_CHANNELS)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(u_count, n_elements + 1))
    mags = np.concatenate(
        [params.direct_magnitudes[:, None],
         np.repeat(params.reflected_magnitudes[:, None], n_elements, axis=1)],
        axis=1)
    gains = mags * np.exp(1j * phases)
    return ChannelSet(direct=gains[:, 0], reflected=gains[:, 1:])


def pathloss_bs_user(d) -> np.ndarray:
    """Linear BS-to-user pathloss: 10^(-(32.6 + 36.7*log10 d)/10)."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return 10.0 ** (-(32.6 + 36.7 * np.log10(d)) / 10.0)


def pathloss_bs_irs(d) -> np.ndarray:
    """Linear BS-to-surface pathloss: 10^(-(30 + 22*log10 d)/10)."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return 10.0 ** (-(30.0 + 22.0 * np.log10(d)) / 10.0)


def pathloss_irs_user(d) -> np.ndarray:
    """Linear surface-to-user pathloss: 10^(-(30 + 22*log10 d)/10)."""
    return pathloss_bs_irs(d)


def gen_pathloss_rayleigh(topology: Topology, n_elements: int,
                          seed: int) -> ChannelSet:
    """Pathloss plus Rayleigh fading.

    direct_u   = sqrt(PL_bs_user(d_u)) * delta_bs_u
    refl_{u,n} = sqrt(PL_bs_irs * PL_irs_user(d_u)) * delta_bs_n * delta_n_u

    with all delta ~ CN(0,1) i.i.d.; the BS-side fade delta_bs_n is shared by
    every position for the same element n. Stream order: direct fades (U),
    then BS-side element fades (N), then per-(n,u) fades (N x U).
    """
    u_count = topology.n_positions
    rng = substream(seed, STREAM_CHANNELS)

    def cn01(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
            / np.sqrt(2.0)

    delta_bs_u = cn01(u_count)
    delta_bs_n = cn01(n_elements)
    delta_n_u = cn01((n_elements, u_count))

    direct = np.sqrt(pathloss_bs_user(topology.d_bs_user)) * delta_bs_u
    refl_amp = np.sqrt(pathloss_bs_irs(topology.d_bs_irs) *
                       pathloss_irs_user(topology.d_irs_user))  # (U,)
    reflected = refl_amp[:, None] * (delta_bs_n[None, :] * delta_n_u.T)
    return ChannelSet(direct=direct, reflected=reflected)


def save_channels(channels: ChannelSet, path, model_id: str = "unknown",
                  seed: int = 0) -> None:
    """Flat text dump: header (U, N, model, seed), then one gain per line as
    're im' with full double precision; direct gains first, then reflected
    gains row-major (position outer, element inner)."""
    with open(path, "w", encoding="utf-8") as f:
        _write_channels(channels, f, model_id, seed)


def _write_channels(channels: ChannelSet, f, model_id: str, seed: int) -> None:
    f.write(f"U {channels.n_positions}\n")
    f.write(f"N {channels.n_elements}\n")
    f.write(f"model {model_id}\n")
    f.write(f"seed {seed}\n")
    for z in channels.direct:
        f.write(f"{z.real:.17g} {z.imag:.17g}\n")
    for row in channels.reflected:
        for z in row:
            f.write(f"{z.real:.17g} {z.imag:.17g}\n")


def load_channels(path) -> tuple[ChannelSet, dict]:
    """Inverse of save_channels; returns (channels, header dict)."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    header = {}
    for line in lines[:4]:
        key, value = line.split(maxsplit=1)
        header[key] = value
    u_count = int(header["U"])
    n_elements = int(header["N"])
    header["seed"] = int(header["seed"])
    body = lines[4:]
    expected = u_count * (n_elements + 1)
    if len(body) != expected:
        raise ValueError(f"expected {expected} gain lines, found {len(body)}")
    vals = np.array([[float(a), float(b)] for a, b in
                     (ln.split() for ln in body)])
    gains = vals[:, 0] + 1j * vals[:, 1]
    direct = gains[:u_count]
    reflected = gains[u_count:].reshape(u_count, n_elements)
    return ChannelSet(direct=direct, reflected=reflected), header
