"""Beamforming policies: phase projection with known channels, the blind
sample-mean methods and their voting/partitioning extensions, beam-training
and exhaustive baselines, and a least-squares channel-estimation comparator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .channels import (STREAM_NOISE, STREAM_PROBE, STREAM_TIEBREAK, substream)
from .model import (BeamformingResult, ChannelSet, LinkBudget, PhaseConfig,
                    make_result, min_snr, snr_all)
from .sampling import (EmptyGroupError, SampleSet, collect_samples,
                       group_mean_powers, sampling_alphabet)

TIE_LOWEST = "lowest-index"
TIE_RANDOM = "seeded-random"


@dataclass(frozen=True)
class TieBreakPolicy:
    """How to resolve argmax ties: deterministic lowest index, or a random
    pick that is reproducible given the run seed."""

    kind: str = TIE_LOWEST
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (TIE_LOWEST, TIE_RANDOM):
            raise ValueError(f"unknown tie-break policy {self.kind!r}")

    def rng(self) -> np.random.Generator:
        return substream(self.seed, STREAM_TIEBREAK)


def _argmax_rows(values: np.ndarray, candidates: np.ndarray,
                 tie: TieBreakPolicy,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """Row-wise argmax of values[:, candidates]; ties resolved per policy.

    Returns the winning candidate value (not the column offset) per row.
    """
    sub = values[:, candidates]
    best = sub.max(axis=1)
    if tie.kind == TIE_LOWEST:
        return candidates[np.argmax(sub == best[:, None], axis=1)]
    if rng is None:
        rng = tie.rng()
    out = np.empty(values.shape[0], dtype=np.int64)
    for i in range(values.shape[0]):
        tied = np.flatnonzero(sub[i] == best[i])
        out[i] = candidates[tied[0] if tied.size == 1 else rng.choice(tied)]
    return out


def cpp_index(h0: complex, hn: complex, k: int) -> int:
    """Phase index aligning one reflected gain with the direct gain, rounded
    to the nearest of the K allowed values."""
    if h0 == 0 or hn == 0:
        raise ValueError("phase alignment is undefined for a zero channel")
    target = np.angle(h0) - np.angle(hn)
    return int(np.round(target * k / (2.0 * np.pi))) % k


def cpp_config(channels: ChannelSet, u: int, k: int) -> PhaseConfig:
    """Per-element phase alignment for position u (requires channel knowledge)."""
    h0 = channels.direct[u]
    hn = channels.reflected[u]
    if h0 == 0 or np.any(hn == 0):
        raise ValueError("phase alignment is undefined for a zero channel")
    target = np.angle(h0) - np.angle(hn)
    idx = np.mod(np.round(target * k / (2.0 * np.pi)).astype(np.int64), k)
    return PhaseConfig(indices=idx, k=k)


def cpp_all_configs(channels: ChannelSet, k: int) -> list[PhaseConfig]:
    return [cpp_config(channels, u, k) for u in range(channels.n_positions)]


def _csm_indices_all(samples: SampleSet, tie: TieBreakPolicy
                     ) -> tuple[np.ndarray, int]:
    """Per-position sample-mean phase choices, (U, N), plus the work count."""
    means, counts, work = group_mean_powers(samples)
    alphabet = sampling_alphabet(samples.k, samples.mode)
    if np.any(counts[:, alphabet] == 0):
        n_bad, k_bad = np.argwhere(counts[:, alphabet] == 0)[0]
        raise EmptyGroupError(
            f"no samples hit phase index {alphabet[k_bad]} at element {n_bad}; "
            f"increase the sample budget T (reliable recovery needs T on the "
            f"order of N^2 (ln NU)^3 + N^2 U ln(NU))")
    rng = tie.rng() if tie.kind == TIE_RANDOM else None
    u_count = samples.n_positions
    out = np.empty((u_count, samples.n_elements), dtype=np.int64)
    for u in range(u_count):
        out[u] = _argmax_rows(means[:, :, u], alphabet, tie, rng)
    return out, work


def csm(samples: SampleSet, u: int, tie: TieBreakPolicy = TieBreakPolicy()
        ) -> PhaseConfig:
    """Blind per-element choice maximizing the mean measured power at
    position u over the samples sharing that phase value."""
    idx, _ = _csm_indices_all(samples, tie)
    return PhaseConfig(indices=idx[u], k=samples.k)


def csm_all(samples: SampleSet, tie: TieBreakPolicy = TieBreakPolicy()
            ) -> list[PhaseConfig]:
    idx, _ = _csm_indices_all(samples, tie)
    return [PhaseConfig(indices=row, k=samples.k) for row in idx]


def mv_csm(per_user_configs: list[PhaseConfig],
           tie: TieBreakPolicy = TieBreakPolicy()) -> PhaseConfig:
    """Per-element plurality vote over the per-position configurations."""
    if not per_user_configs:
        raise ValueError("need at least one per-position configuration")
    k = per_user_configs[0].k
    n = per_user_configs[0].n
    for c in per_user_configs:
        if c.k != k or c.n != n:
            raise ValueError("all voting configurations must share N and K")
    votes = np.stack([c.indices for c in per_user_configs])  # (U, N)
    counts = np.zeros((n, k), dtype=np.int64)
    np.add.at(counts, (np.arange(n)[None, :], votes), 1)
    winners = _argmax_rows(counts.astype(np.float64), np.arange(k), tie)
    return PhaseConfig(indices=winners, k=k)


def mv_csm_from_samples(samples: SampleSet, channels: ChannelSet,
                        budget: LinkBudget,
                        tie: TieBreakPolicy = TieBreakPolicy(),
                        seed: int = 0) -> BeamformingResult:
    idx, work = _csm_indices_all(samples, tie)
    config = mv_csm([PhaseConfig(indices=row, k=samples.k) for row in idx], tie)
    return make_result(channels, config, budget, "mv-csm", seed, samples.t,
                       work=work)


def mv_csm_pipeline(channels: ChannelSet, budget: LinkBudget, t: int, k: int,
                    mode: str, tie: TieBreakPolicy, seed: int,
                    symbols_per_sample: int = 1,
                    deterministic_symbol: bool = False,
                    noiseless: bool = False) -> BeamformingResult:
    """One shared sampling phase, a per-position sample-mean solve, then a
    plurality vote. Work grows linearly in each of N, T, U."""
    samples = collect_samples(channels, budget, t, k, mode, seed,
                              symbols_per_sample=symbols_per_sample,
                              deterministic_symbol=deterministic_symbol,
                              noiseless=noiseless)
    return mv_csm_from_samples(samples, channels, budget, tie, seed)


def partition_blocks(n: int, u_count: int) -> list[np.ndarray]:
    """Contiguous, size-balanced blocks: the first N mod U blocks get
    ceil(N/U) elements, the rest floor(N/U)."""
    base, extra = divmod(n, u_count)
    sizes = [base + 1 if u < extra else base for u in range(u_count)]
    bounds = np.cumsum([0] + sizes)
    return [np.arange(bounds[u], bounds[u + 1]) for u in range(u_count)]


def p_csm_from_samples(samples: SampleSet, channels: ChannelSet,
                       budget: LinkBudget,
                       tie: TieBreakPolicy = TieBreakPolicy(),
                       seed: int = 0) -> BeamformingResult:
    """Partitioned variant: block u of the surface takes position u's
    sample-mean phases."""
    idx, work = _csm_indices_all(samples, tie)
    u_count = samples.n_positions
    out = np.empty(samples.n_elements, dtype=np.int64)
    for u, block in enumerate(partition_blocks(samples.n_elements, u_count)):
        out[block] = idx[u, block]
    config = PhaseConfig(indices=out, k=samples.k)
    return make_result(channels, config, budget, "p-csm", seed, samples.t,
                       work=work)


def p_csm(channels: ChannelSet, budget: LinkBudget, t: int, k: int, mode: str,
          tie: TieBreakPolicy, seed: int, symbols_per_sample: int = 1,
          deterministic_symbol: bool = False,
          noiseless: bool = False) -> BeamformingResult:
    samples = collect_samples(channels, budget, t, k, mode, seed,
                              symbols_per_sample=symbols_per_sample,
                              deterministic_symbol=deterministic_symbol,
                              noiseless=noiseless)
    return p_csm_from_samples(samples, channels, budget, tie, seed)


def rms(samples: SampleSet, channels: ChannelSet | None = None,
        budget: LinkBudget | None = None, seed: int = 0,
        objective: str = "exact") -> BeamformingResult:
    """Beam training over the sampled codebook: keep the sampled
    configuration with the best minimum across positions.

    objective="exact" recomputes true SNRs from the stored configurations
    (separates selection quality from measurement noise); "measured" ranks by
    the noisy measured powers instead.
    """
    if objective == "exact":
        if channels is None or budget is None:
            raise ValueError("exact objective needs channels and a link budget")
        from .sampling import batch_gains
        scores = (np.abs(batch_gains(channels, samples.indices, samples.k)) ** 2
                  * budget.snr_scale).min(axis=1)
    elif objective == "measured":
        scores = samples.powers.min(axis=1)
    else:
        raise ValueError(f"unknown rms objective {objective!r}")
    best = int(np.argmax(scores))
    config = samples.config(best)
    if channels is None or budget is None:
        snrs = samples.powers[best]
        return BeamformingResult(config=config, snr_per_position=snrs,
                                 min_snr=min_snr(snrs), algorithm_id="rms",
                                 seed=seed, sample_budget=samples.t,
                                 work=samples.t)
    return make_result(channels, config, budget, "rms", seed, samples.t,
                       work=samples.t)


_EXHAUSTIVE_LIMIT = 2 ** 24


def exhaustive_oracle(channels: ChannelSet, budget: LinkBudget, k: int,
                      seed: int = 0) -> BeamformingResult:
    """Exact global maximum of the minimum SNR over all K^N configurations.

    Ties keep the lexicographically first configuration. Guarded to
    K^N <= 2^24.
    """
    n = channels.n_elements
    total = k ** n
    if total > _EXHAUSTIVE_LIMIT:
        raise ValueError(
            f"exhaustive search over {k}^{n} = {total} configurations exceeds "
            f"the 2^24 guard")
    radix = k ** np.arange(n, dtype=np.int64)
    best_score = -np.inf
    best_id = 0
    chunk = 1 << 14
    for lo in range(0, total, chunk):
        ids = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        idx = (ids[:, None] // radix[None, :]) % k
        gains = np.exp(2j * np.pi * idx / k) @ channels.reflected.T \
            + channels.direct
        scores = (np.abs(gains) ** 2).min(axis=1)
        j = int(np.argmax(scores))
        if scores[j] > best_score:
            best_score = float(scores[j])
            best_id = int(ids[j])
    best_idx = (best_id // radix) % k
    config = PhaseConfig(indices=best_idx, k=k)
    return make_result(channels, config, budget, "exhaustive", seed, total,
                       work=total * n)


def _probe_matrix(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(N+1)-probe design: returns (A, indices) where A is the (N+1, N+1)
    complex probe matrix (first column all ones for the direct path) and
    indices is the (N+1, N) phase-index pattern realizing its columns 1..N.

    Uses the (N+1)-point DFT when its phases are representable in the K-ary
    set (K a multiple of N+1), else a Hadamard +/-1 design when N+1 is a
    power of two and K is even.
    """
    m = n + 1
    if k % m == 0:
        step = k // m
        t_grid, n_grid = np.meshgrid(np.arange(m), np.arange(1, m),
                                     indexing="ij")
        indices = (t_grid * n_grid * step) % k
        a = np.exp(2j * np.pi * indices / k)
        return np.concatenate([np.ones((m, 1)), a], axis=1), indices
    if k % 2 == 0 and m & (m - 1) == 0:
        h = hadamard(m).astype(np.float64)
        indices = np.where(h[:, 1:] > 0, 0, k // 2).astype(np.int64)
        return h.astype(np.complex128), indices
    raise ValueError(
        f"no probe design for N={n}, K={k}: the DFT pattern needs K to be a "
        f"multiple of N+1, and the Hadamard pattern (which works even when "
        f"phases are limited to 0/pi) needs N+1 to be a power of two and K "
        f"even")


def dft_ls_estimate(channels: ChannelSet, budget: LinkBudget, k: int,
                    seed: int, noiseless: bool = False) -> ChannelSet:
    """Estimate all channels from N+1 structured probes and a least-squares
    solve. Requires reading complex received symbols (a genie capability the
    blind methods never use); the pilot symbol is the known constant sqrt(P).
    """
    a, indices = _probe_matrix(channels.n_elements, k)
    from .sampling import batch_gains
    gains = batch_gains(channels, indices.astype(np.int16), k)  # (N+1, U)
    y = gains * np.sqrt(budget.power)
    if not noiseless:
        rng = substream(seed, STREAM_PROBE)
        y = y + np.sqrt(budget.noise_power / 2.0) * (
            rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    h, *_ = np.linalg.lstsq(a, y / np.sqrt(budget.power), rcond=None)
    return ChannelSet(direct=h[0], reflected=h[1:].T)


def best_cpp_config(channels: ChannelSet, budget: LinkBudget, k: int
                    ) -> PhaseConfig:
    """Among the U per-position alignment configs, the one with the best
    minimum SNR (a channel-knowledge baseline for the multi-position case)."""
    best_cfg = None
    best_score = -np.inf
    for cfg in cpp_all_configs(channels, k):
        score = min_snr(snr_all(channels, cfg, budget))
        if score > best_score:
            best_score = score
            best_cfg = cfg
    return best_cfg


# ---------------------------------------------------------------------------
# Registry used by the experiment harness. Every entry has the signature
# run(channels, budget, *, t, k, mode, tie, seed, samples=None) -> result.
# ---------------------------------------------------------------------------

def _run_cpp(channels, budget, *, t, k, mode, tie, seed, samples=None):
    config = best_cpp_config(channels, budget, k)
    return make_result(channels, config, budget, "cpp", seed, 0,
                       work=channels.n_elements * channels.n_positions)


def _run_csm(channels, budget, *, t, k, mode, tie, seed, samples=None):
    if samples is None:
        samples = collect_samples(channels, budget, t, k, mode, seed)
    idx, work = _csm_indices_all(samples, tie)
    config = PhaseConfig(indices=idx[0], k=samples.k)
    return make_result(channels, config, budget, "csm", seed, samples.t,
                       work=work)


def _run_mv_csm(channels, budget, *, t, k, mode, tie, seed, samples=None):
    if samples is None:
        samples = collect_samples(channels, budget, t, k, mode, seed)
    return mv_csm_from_samples(samples, channels, budget, tie, seed)


def _run_p_csm(channels, budget, *, t, k, mode, tie, seed, samples=None):
    if samples is None:
        samples = collect_samples(channels, budget, t, k, mode, seed)
    return p_csm_from_samples(samples, channels, budget, tie, seed)


def _run_rms(channels, budget, *, t, k, mode, tie, seed, samples=None):
    if samples is None:
        samples = collect_samples(channels, budget, t, k, mode, seed)
    return rms(samples, channels, budget, seed=seed)


def _run_exhaustive(channels, budget, *, t, k, mode, tie, seed, samples=None):
    return exhaustive_oracle(channels, budget, k, seed=seed)


def _run_dft_cpp(channels, budget, *, t, k, mode, tie, seed, samples=None):
    estimated = dft_ls_estimate(channels, budget, k, seed)
    config = best_cpp_config(estimated, budget, k)
    result = make_result(channels, config, budget, "dft-cpp", seed,
                         channels.n_elements + 1,
                         work=(channels.n_elements + 1) ** 2)
    return result


ALGORITHMS = {
    "cpp": _run_cpp,
    "csm": _run_csm,
    "mv-csm": _run_mv_csm,
    "p-csm": _run_p_csm,
    "rms": _run_rms,
    "exhaustive": _run_exhaustive,
    "dft-cpp": _run_dft_cpp,
}
