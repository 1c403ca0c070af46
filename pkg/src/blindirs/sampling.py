"""Random-sampling measurement phase: draw configurations, synthesize
received-power measurements, and group samples by per-element phase value."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import STREAM_CONFIGS, STREAM_NOISE, substream
from .model import ChannelSet, LinkBudget, PhaseConfig

MODE_FULL = "full"
MODE_BINARY = "binary"

# Samples processed per block in the streaming passes; fixed so that a given
# seed always produces bit-identical output regardless of problem size.
_CHUNK = 4096


class EmptyGroupError(ValueError):
    """A phase value received no samples; the sample mean is undefined."""


def sampling_alphabet(k: int, mode: str) -> np.ndarray:
    """Allowed phase indices for a sampling mode."""
    if mode == MODE_FULL:
        return np.arange(k)
    if mode == MODE_BINARY:
        if k % 2 != 0:
            raise ValueError(f"binary sampling needs an even k, got {k}")
        return np.array([0, k // 2])
    raise ValueError(f"unknown sampling mode {mode!r}")


@dataclass(frozen=True)
class SampleSet:
    """T random phase configurations with the measured power at each position.

    ``indices`` is (T, N) with entries in the sampling alphabet; ``powers``
    is (T, U) linear watts. Immutable after construction.
    """

    indices: np.ndarray
    powers: np.ndarray
    k: int
    mode: str
    symbols_per_sample: int
    seed: int

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int16))
        pw = np.ascontiguousarray(np.asarray(self.powers, dtype=np.float64))
        if idx.ndim != 2 or pw.ndim != 2 or idx.shape[0] != pw.shape[0]:
            raise ValueError("indices must be (T, N) and powers (T, U)")
        allowed = sampling_alphabet(self.k, self.mode)
        for lo in range(0, idx.shape[0], _CHUNK):
            block = idx[lo:lo + _CHUNK]
            ok = np.zeros(block.shape, dtype=bool)
            for a in allowed:
                ok |= block == a
            if not ok.all():
                raise ValueError(
                    f"phase indices outside the {self.mode} alphabet")
        if np.any(pw < 0):
            raise ValueError("measured powers must be nonnegative")
        idx.flags.writeable = False
        pw.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "powers", pw)

    @property
    def t(self) -> int:
        return self.indices.shape[0]

    @property
    def n_elements(self) -> int:
        return self.indices.shape[1]

    @property
    def n_positions(self) -> int:
        return self.powers.shape[1]

    def config(self, t: int) -> PhaseConfig:
        return PhaseConfig(indices=self.indices[t], k=self.k)


@dataclass(frozen=True)
class SampleGroup:
    """Indices (0-based) of the samples where element n took phase index k."""

    n: int
    k: int
    member_indices: np.ndarray

    @property
    def empty(self) -> bool:
        return self.member_indices.size == 0


def draw_configs(t: int, n_elements: int, k: int, mode: str,
                 rng: np.random.Generator) -> np.ndarray:
    """(T, N) i.i.d. uniform phase indices over the mode's alphabet."""
    if t < 1:
        raise ValueError("need at least one sample")
    alphabet = sampling_alphabet(k, mode)
    picks = rng.integers(0, alphabet.size, size=(t, n_elements), dtype=np.int16)
    if mode == MODE_BINARY:
        picks *= np.int16(k // 2)  # maps {0, 1} onto the {0, K/2} alphabet
    return picks


def _phase_factors(indices: np.ndarray, k: int) -> np.ndarray:
    """e^{j theta} for a block of index rows; +/-1 entries stay real cheap."""
    if k % 2 == 0 and np.isin(indices, (0, k // 2)).all():
        return 1.0 - 2.0 * (indices == k // 2).astype(np.float64)
    return np.exp(2j * np.pi * indices / k)


def batch_gains(channels: ChannelSet, indices: np.ndarray, k: int) -> np.ndarray:
    """Effective gains (T, U) for a batch of configurations, streamed in blocks."""
    t = indices.shape[0]
    out = np.empty((t, channels.n_positions), dtype=np.complex128)
    for lo in range(0, t, _CHUNK):
        hi = min(lo + _CHUNK, t)
        out[lo:hi] = _phase_factors(indices[lo:hi], k) @ channels.reflected.T
    out += channels.direct
    return out


def measure_powers(channels: ChannelSet, indices: np.ndarray, k: int,
                   budget: LinkBudget, symbols_per_sample: int,
                   rng: np.random.Generator,
                   deterministic_symbol: bool = False,
                   noiseless: bool = False) -> np.ndarray:
    """Measured power (T, U) for a batch of configurations.

    Per symbol s the received sample is Y = g_u X_s + Z_{u,s} with
    X_s ~ CN(0, P) (shared across positions) and Z_{u,s} ~ CN(0, sigma^2);
    the reported power is the average of |Y|^2 over the S symbols, so the
    noise floor stays inside the measurement. The deterministic-symbol
    noiseless mode (X = sqrt(P), Z = 0) returns |g_u|^2 P exactly and exists
    for oracle tests. Stream order: for each sample block, symbol draws first,
    then noise draws.
    """
    if symbols_per_sample < 1:
        raise ValueError("need at least one symbol per sample")
    gains = batch_gains(channels, indices, k)
    t, u_count = gains.shape
    if deterministic_symbol and noiseless:
        return np.abs(gains) ** 2 * budget.power
    s = symbols_per_sample
    powers = np.empty((t, u_count), dtype=np.float64)
    x_scale = np.sqrt(budget.power / 2.0)
    z_scale = 0.0 if noiseless else np.sqrt(budget.noise_power / 2.0)
    for lo in range(0, t, _CHUNK):
        hi = min(lo + _CHUNK, t)
        m = hi - lo
        if deterministic_symbol:
            x = np.full((m, s, 1), np.sqrt(budget.power), dtype=np.complex128)
        else:
            x = x_scale * (rng.standard_normal((m, s, 1)) +
                           1j * rng.standard_normal((m, s, 1)))
        if noiseless:
            y = gains[lo:hi, None, :] * x
        else:
            z = z_scale * (rng.standard_normal((m, s, u_count)) +
                           1j * rng.standard_normal((m, s, u_count)))
            y = gains[lo:hi, None, :] * x + z
        powers[lo:hi] = np.mean(np.abs(y) ** 2, axis=1)
    return powers


def measure_power(channels: ChannelSet, config: PhaseConfig,
                  budget: LinkBudget, symbols_per_sample: int,
                  rng: np.random.Generator,
                  deterministic_symbol: bool = False,
                  noiseless: bool = False) -> np.ndarray:
    """Measured power (U,) for a single configuration."""
    return measure_powers(channels, config.indices[None, :], config.k, budget,
                          symbols_per_sample, rng,
                          deterministic_symbol=deterministic_symbol,
                          noiseless=noiseless)[0]


def collect_samples(channels: ChannelSet, budget: LinkBudget, t: int, k: int,
                    mode: str, seed: int, symbols_per_sample: int = 1,
                    deterministic_symbol: bool = False,
                    noiseless: bool = False) -> SampleSet:
    """Draw T configurations and measure them; the whole sampling phase.

    Configurations come from substream (seed, configs), measurement
    randomness from substream (seed, noise), so changing one never perturbs
    the other.
    """
    indices = draw_configs(t, channels.n_elements, k, mode,
                           substream(seed, STREAM_CONFIGS))
    powers = measure_powers(channels, indices, k, budget, symbols_per_sample,
                            substream(seed, STREAM_NOISE),
                            deterministic_symbol=deterministic_symbol,
                            noiseless=noiseless)
    return SampleSet(indices=indices, powers=powers, k=k, mode=mode,
                     symbols_per_sample=symbols_per_sample, seed=seed)


def build_groups(samples: SampleSet, n: int) -> list[SampleGroup]:
    """The K per-phase sample groups for element n; they partition {0..T-1}.

    Groups outside the sampling alphabet are legitimately empty; empty groups
    inside the alphabet are returned as-is and flagged by ``.empty``.
    """
    if not 0 <= n < samples.n_elements:
        raise IndexError(f"element {n} out of range [0, {samples.n_elements})")
    col = samples.indices[:, n]
    return [SampleGroup(n=n, k=k, member_indices=np.flatnonzero(col == k))
            for k in range(samples.k)]


def group_mean_powers(samples: SampleSet) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-(element, phase, position) sample-mean power in one streaming pass.

    Returns (means, counts, work): means is (N, K, U) with NaN where a group
    is empty, counts is (N, K), and work counts power-to-accumulator
    additions (T * N per position).
    """
    t, n_elements = samples.indices.shape
    u_count = samples.n_positions
    k = samples.k
    alphabet = sampling_alphabet(k, samples.mode)
    sums = np.zeros((n_elements, k, u_count))
    counts = np.zeros((n_elements, k), dtype=np.int64)
    col_total = np.zeros(u_count)
    for lo in range(0, t, _CHUNK):
        hi = min(lo + _CHUNK, t)
        idx = samples.indices[lo:hi]
        pw = samples.powers[lo:hi]
        col_total += pw.sum(axis=0)
        # last alphabet letter recovered from totals below
        for a in alphabet[:-1]:
            mask = (idx == a).astype(np.float64)
            sums[:, a, :] += mask.T @ pw
            counts[:, a] += (idx == a).sum(axis=0).astype(np.int64)
    last = alphabet[-1]
    inner = alphabet[:-1]
    sums[:, last, :] = col_total[None, :] - sums[:, inner, :].sum(axis=1)
    counts[:, last] = t - counts[:, inner].sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts[:, :, None]
    work = t * n_elements * u_count
    return means, counts, work


def save_samples(samples: SampleSet, path) -> None:
    """Columnar text dump: header (T, N, K, U, mode, S, seed), then one line
    per sample holding the N phase indices followed by the U powers."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"T {samples.t}\n")
        f.write(f"N {samples.n_elements}\n")
        f.write(f"K {samples.k}\n")
        f.write(f"U {samples.n_positions}\n")
        f.write(f"mode {samples.mode}\n")
        f.write(f"S {samples.symbols_per_sample}\n")
        f.write(f"seed {samples.seed}\n")
        for trow, prow in zip(samples.indices, samples.powers):
            f.write(" ".join(str(int(v)) for v in trow))
            f.write(" ")
            f.write(" ".join(repr(float(p)) for p in prow))
            f.write("\n")


def load_samples(path) -> SampleSet:
    """Inverse of save_samples."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    header = dict(line.split(maxsplit=1) for line in lines[:7])
    t = int(header["T"])
    n_elements = int(header["N"])
    u_count = int(header["U"])
    body = lines[7:]
    if len(body) != t:
        raise ValueError(f"expected {t} sample lines, found {len(body)}")
    indices = np.empty((t, n_elements), dtype=np.int16)
    powers = np.empty((t, u_count), dtype=np.float64)
    for i, line in enumerate(body):
        parts = line.split()
        indices[i] = [int(v) for v in parts[:n_elements]]
        powers[i] = [float(v) for v in parts[n_elements:]]
    return SampleSet(indices=indices, powers=powers, k=int(header["K"]),
                     mode=header["mode"], symbols_per_sample=int(header["S"]),
                     seed=int(header["seed"]))
