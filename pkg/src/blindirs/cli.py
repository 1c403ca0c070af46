"""Batch experiment runner: config parsing, seeded sweeps, CSV output, and
named verification suites."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import algorithms, channels as chan, sampling, theory
from .algorithms import TIE_LOWEST
from .model import LinkBudget, PhaseConfig, min_snr, sum_rate_uniform, to_db

RESULT_COLUMNS = ["algorithm_id", "N", "U", "K", "T", "seed", "min_snr_db",
                  "mean_snr_db", "sum_rate", "samples_used", "work_counter"]
SUMMARY_COLUMNS = ["algorithm_id", "sweep_axis", "sweep_value", "n_seeds",
                   "mean_min_snr_db", "ci95_lo_db", "ci95_hi_db"]
VERDICT_COLUMNS = ["check_id", "statistic", "threshold", "pass"]

# Desk-scale defaults: 20 dBm transmit power, -80 dBm noise, K = 4.
DEFAULT_POWER_W = 0.1
DEFAULT_NOISE_W = 1e-11
DEFAULT_K = 4


class ConfigError(ValueError):
    """A single structured diagnostic naming the offending config field."""

    def __init__(self, key, message):
        super().__init__(f"config field {key!r}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    model_type: str = "assumption1"        # assumption1 | pathloss
    c: float = 1.0                         # reflected magnitude (assumption1)
    direct_magnitude: float | None = None  # override; default sqrt(N)*c/10
    n: int = 64
    u: int = 4
    k: int = DEFAULT_K
    t: int = 10_000
    s: int = 1
    mode: str = sampling.MODE_FULL
    power: float = DEFAULT_POWER_W
    noise_power: float = DEFAULT_NOISE_W
    algorithms: tuple = ("mv-csm",)
    seed_count: int = 1
    base_seed: int = 0
    sweep_axis: str = "none"               # none | n | u | t
    sweep_values: tuple = ()
    tie: str = TIE_LOWEST
    out: str = "results"

    def validate(self):
        if self.model_type not in ("assumption1", "pathloss"):
            raise ConfigError("model.type", f"unknown model {self.model_type!r}")
        for algo in self.algorithms:
            if algo not in algorithms.ALGORITHMS:
                raise ConfigError("algorithms", f"unregistered id {algo!r}")
        if self.sweep_axis not in ("none", "n", "u", "t"):
            raise ConfigError("sweep.axis", f"unknown axis {self.sweep_axis!r}")
        if self.sweep_axis != "none":
            vals = list(self.sweep_values)
            if not vals:
                raise ConfigError("sweep.values", "sweep axis set but no values")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("sweep.values", "must be strictly increasing")
        if self.mode == sampling.MODE_BINARY and self.k % 2 != 0:
            raise ConfigError("mode", "binary sampling requires an even K")
        if self.seed_count < 1:
            raise ConfigError("seeds.count", "need at least one seed")
        return self


_CONFIG_KEYS = {
    "model.type": ("model_type", str),
    "model.c": ("c", float),
    "model.direct_magnitude": ("direct_magnitude", float),
    "n": ("n", int),
    "u": ("u", int),
    "k": ("k", int),
    "t": ("t", int),
    "s": ("s", int),
    "mode": ("mode", str),
    "power": ("power", float),
    "noise_power": ("noise_power", float),
    "algorithms": ("algorithms", lambda v: tuple(x.strip() for x in v.split(","))),
    "seeds.count": ("seed_count", int),
    "seeds.base": ("base_seed", int),
    "sweep.axis": ("sweep_axis", str),
    "sweep.values": ("sweep_values",
                     lambda v: tuple(int(x) for x in v.split(","))),
    "tie": ("tie", str),
    "out": ("out", str),
}


def parse_config(path) -> ExperimentConfig:
    """Flat dotted-key config file: one 'key = value' per line, # comments."""
    fields = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(key, "unknown key")
            attr, conv = _CONFIG_KEYS[key]
            try:
                fields[attr] = conv(value)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from exc
    return ExperimentConfig(**fields).validate()


PRESETS = {
    # Pathloss model, ten receiver positions, sweep over the element count.
    "fig4-desk": ExperimentConfig(
        model_type="pathloss", u=10, k=4, t=20_000, mode=sampling.MODE_FULL,
        algorithms=("mv-csm", "rms"), seed_count=20,
        sweep_axis="n", sweep_values=(50, 100, 200, 400),
    ),
}


def _build_channels(config: ExperimentConfig, n: int, u: int, seed: int):
    if config.model_type == "assumption1":
        params = chan.default_assumption1_params(
            u, n, c=config.c, direct_magnitude=config.direct_magnitude)
        return chan.gen_assumption1(u, n, params, seed)
    topo = chan.desk_topology(u)
    return chan.gen_pathloss_rayleigh(topo, n, seed)


def _sweep_points(config: ExperimentConfig):
    if config.sweep_axis == "none":
        return [(config.n, config.u, config.t)]
    points = []
    for v in config.sweep_values:
        n, u, t = config.n, config.u, config.t
        if config.sweep_axis == "n":
            n = v
        elif config.sweep_axis == "u":
            u = v
        else:
            t = v
        points.append((n, u, t))
    return points


def _fmt(x) -> str:
    """Lossless, deterministic float text (17 significant digits)."""
    return format(float(x), ".17g")


def _run_point(args):
    """One (sweep point, seed) task; pure function of its arguments."""
    config, point_index, seed_index = args
    n, u, t = _sweep_points(config)[point_index]
    # RNG keyed to (base seed, point, seed index), never to execution order.
    seed_seq = np.random.SeedSequence(
        config.base_seed, spawn_key=(point_index, seed_index))
    seed = int(seed_seq.generate_state(1, dtype=np.uint64)[0])
    channel_set = _build_channels(config, n, u, seed)
    budget = LinkBudget(power=config.power, noise_power=config.noise_power)
    tie = algorithms.TieBreakPolicy(kind=config.tie, seed=seed)
    shared = None
    needs_samples = any(a in ("csm", "mv-csm", "p-csm", "rms")
                        for a in config.algorithms)
    if needs_samples:
        shared = sampling.collect_samples(
            channel_set, budget, t, config.k, config.mode, seed,
            symbols_per_sample=config.s)
    rows = []
    for algo in config.algorithms:
        result = algorithms.ALGORITHMS[algo](
            channel_set, budget, t=t, k=config.k, mode=config.mode, tie=tie,
            seed=seed, samples=shared)
        sum_rate = (sum_rate_uniform(channel_set, result.config, budget)
                    if u >= 2 else float("nan"))
        rows.append({
            "algorithm_id": algo,
            "N": n, "U": u, "K": config.k, "T": t,
            "seed": seed_index,
            "min_snr_db": _fmt(to_db(result.min_snr)),
            "mean_snr_db": _fmt(to_db(result.snr_per_position.mean())),
            "sum_rate": _fmt(sum_rate),
            "samples_used": result.sample_budget,
            "work_counter": result.work,
        })
    return point_index, seed_index, rows


def run(config: ExperimentConfig, out_dir: str | None = None,
        jobs: int = 1) -> list[dict]:
    """Execute the sweep; append rows to results.csv (resuming past completed
    rows) and atomically regenerate summary.csv. Returns all rows."""
    config.validate()
    out_dir = out_dir or config.out
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")

    done = set()
    existing = []
    if os.path.exists(results_path):
        with open(results_path, "r", encoding="utf-8", newline="") as f:
            for row in csv.DictReader(f):
                existing.append(row)
                done.add((row["algorithm_id"], int(row["N"]), int(row["U"]),
                          int(row["T"]), int(row["seed"])))

    points = _sweep_points(config)
    tasks = []
    for pi in range(len(points)):
        n, u, t = points[pi]
        for si in range(config.seed_count):
            if all((algo, n, u, t, si) in done for algo in config.algorithms):
                continue
            tasks.append((config, pi, si))

    if jobs > 1 and tasks:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_point, tasks))
    else:
        outputs = [_run_point(task) for task in tasks]
    outputs.sort(key=lambda o: (o[0], o[1]))

    new_file = not os.path.exists(results_path)
    with open(results_path, "a", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=RESULT_COLUMNS)
        if new_file:
            writer.writeheader()
        for _, _, rows in outputs:
            for row in rows:
                writer.writerow(row)

    all_rows = existing + [row for _, _, rows in outputs for row in rows]
    _write_summary(all_rows, config, out_dir)
    return all_rows


def _write_summary(rows: list[dict], config: ExperimentConfig, out_dir: str):
    groups = {}
    for row in rows:
        if config.sweep_axis == "u":
            sweep_value = int(row["U"])
        elif config.sweep_axis == "t":
            sweep_value = int(row["T"])
        else:
            sweep_value = int(row["N"])
        groups.setdefault((row["algorithm_id"], sweep_value), []).append(
            float(row["min_snr_db"]))
    path = os.path.join(out_dir, "summary.csv")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_COLUMNS)
        for (algo, sweep_value) in sorted(groups):
            vals = np.array(groups[(algo, sweep_value)])
            mean = vals.mean()
            half = 1.96 * vals.std(ddof=1) / np.sqrt(vals.size) \
                if vals.size > 1 else 0.0
            writer.writerow([algo, config.sweep_axis, sweep_value, vals.size,
                             _fmt(mean), _fmt(mean - half), _fmt(mean + half)])
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

def _table1_sample_set() -> sampling.SampleSet:
    """The six-sample worked example: N=4, K=2 phase patterns and powers."""
    indices = np.array([
        [0, 1, 0, 0],
        [0, 0, 0, 0],
        [1, 1, 1, 0],
        [1, 0, 1, 1],
        [1, 1, 0, 1],
        [0, 0, 1, 1],
    ], dtype=np.int16)
    powers = np.array([2.8, 1.0, 1.5, 3.3, 0.3, 0.4])[:, None]
    return sampling.SampleSet(indices=indices, powers=powers, k=2,
                              mode=sampling.MODE_FULL, symbols_per_sample=1,
                              seed=0)


def _suite_table1():
    samples = _table1_sample_set()
    means, _, _ = sampling.group_mean_powers(samples)
    checks = [
        ("table1-mean-theta1-0", means[0, 0, 0], 1.4,
         abs(means[0, 0, 0] - 1.4) < 1e-12),
        ("table1-mean-theta1-pi", means[0, 1, 0], 1.7,
         abs(means[0, 1, 0] - 1.7) < 1e-12),
    ]
    config = algorithms.csm(samples, 0)
    expected = PhaseConfig(indices=np.array([1, 0, 1, 0]), k=2)
    checks.append(("table1-config", float(config == expected), 1.0,
                   config == expected))
    return checks


def _suite_p1():
    checks = [
        ("p1-2", theory.p1(2), 0.25, abs(theory.p1(2) - 0.25) < 1e-15),
        ("p1-3", theory.p1(3), 0.25, abs(theory.p1(3) - 0.25) < 1e-15),
    ]
    val = theory.p1(10_000) * np.sqrt(2 * np.pi * 10_000)
    checks.append(("p1-asymptote", val, 1e-3, abs(val - 1.0) < 1e-3))
    return checks


def _suite_empty():
    return []


def _suite_bounds():
    checks = []
    ok = True
    for n in (2, 16, 128, 1024):
        for u in (2, 8, 64):
            a = theory.achievability_bound(n, u, 1.0, 1.0, 1.0)
            c = theory.converse_bound(n, u, 1.0, 1.0, 1.0, 1.0)
            ok = ok and c >= a
    checks.append(("bounds-ordering", float(ok), 1.0, ok))
    return checks


SUITES = {
    "table1": _suite_table1,
    "p1": _suite_p1,
    "empty": _suite_empty,
    "bounds": _suite_bounds,
}


def verify(suite: str, out_dir: str | None = None) -> bool:
    """Run a named check battery; writes a verdict CSV and returns overall
    pass/fail."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; known: {sorted(SUITES)}")
    checks = SUITES[suite]()
    all_pass = all(passed for _, _, _, passed in checks)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, f"verdict_{suite}.csv")
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(VERDICT_COLUMNS)
            for check_id, stat, threshold, passed in checks:
                writer.writerow([check_id, _fmt(stat), _fmt(threshold),
                                 "pass" if passed else "fail"])
    for check_id, stat, threshold, passed in checks:
        print(f"{check_id}: {'PASS' if passed else 'FAIL'} "
              f"(statistic={stat}, threshold={threshold})")
    return all_pass


def replay(samples_path: str, algo: str) -> PhaseConfig:
    """Re-run a power-only algorithm on a stored sample set."""
    samples = sampling.load_samples(samples_path)
    tie = algorithms.TieBreakPolicy()
    if algo == "csm":
        config = algorithms.csm(samples, 0, tie)
    elif algo == "mv-csm":
        config = algorithms.mv_csm(algorithms.csm_all(samples, tie), tie)
    elif algo == "p-csm":
        idx, _ = algorithms._csm_indices_all(samples, tie)
        out = np.empty(samples.n_elements, dtype=np.int64)
        blocks = algorithms.partition_blocks(samples.n_elements,
                                             samples.n_positions)
        for u, block in enumerate(blocks):
            out[block] = idx[u, block]
        config = PhaseConfig(indices=out, k=samples.k)
    elif algo == "rms":
        config = algorithms.rms(samples, objective="measured").config
    else:
        raise ValueError(f"replay supports power-only algorithms, not {algo!r}")
    print("phase_indices " + " ".join(str(int(v)) for v in config.indices))
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="blindirs", description="Blind surface-beamforming experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment sweep")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a dotted-key config file")
    src.add_argument("--preset", choices=sorted(PRESETS),
                     help="named built-in configuration")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1)

    p_verify = sub.add_parser("verify", help="run a named check suite")
    p_verify.add_argument("--suite", required=True)
    p_verify.add_argument("--out", default=None)

    p_replay = sub.add_parser("replay", help="re-run an algorithm on stored samples")
    p_replay.add_argument("--samples", required=True)
    p_replay.add_argument("--algo", required=True)

    args = parser.parse_args(argv)
    if args.command == "run":
        config = (PRESETS[args.preset] if args.preset
                  else parse_config(args.config))
        run(config, out_dir=args.out, jobs=args.jobs)
        return 0
    if args.command == "verify":
        return 0 if verify(args.suite, out_dir=args.out) else 1
    replay(args.samples, args.algo)
    return 0


if __name__ == "__main__":
    sys.exit(main())
