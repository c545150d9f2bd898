"""Simulation-study driver: distribution x order x sample-size x repetition.

Each grid cell draws data from the named true distribution, fits the
mixture posterior (or, in "empirical-baseline" mode, just takes the
empirical measure), and evaluates the exact transport distance against the
quantile-grid discretization Q_M of the truth.  Cell seeds are derived from
the master seed by the splitmix64 mixing chain documented on
:func:`cell_seed`, so any cell can be recomputed in isolation and the whole
study reproduces byte for byte.  Cells are independent jobs executed on a
configurable number of worker processes; the results CSV is always written
in canonical order (dist, p, n, repetition) regardless of completion order.
"""

from __future__ import annotations

import csv
import json
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from statistics import median
from typing import Sequence

import numpy as np

from .dpm import ChainConfig, DpmConfig, run_chain
from .measures import SortedSample, empirical_from_sample
from .reference import by_name, discretize, sample
from .wasserstein import wp_quantile

_MASK64 = (1 << 64) - 1

DEFAULT_N_GRID = (50, 100, 200, 400, 800, 1600, 3200, 6400)


def splitmix64(x: int) -> int:
    """One splitmix64 output step (public-domain mixing constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK64
    return h


def _float_bits(x: float) -> int:
    return int.from_bytes(struct.pack("<d", x), "little")


def cell_seed(master: int, dist: str, p: float, n: int, rep: int) -> int:
    """64-bit cell seed: splitmix64 folded over the cell coordinates.

    h0 = splitmix64(master); then for each of fnv1a64(dist), the IEEE-754
    bits of p, n, and rep: h = splitmix64(h XOR field).  Stable across
    platforms and Python processes.
    """
    h = splitmix64(master & _MASK64)
    for piece in (_fnv1a64(dist), _float_bits(float(p)), int(n), int(rep)):
        h = splitmix64(h ^ (piece & _MASK64))
    return h


@dataclass(frozen=True)
class StudyConfig:
    """Grid and engine settings for one study run.

    ``mode`` is "dpm" (fit the mixture, draw predictively) or
    "empirical-baseline" (use the raw empirical measure; no MCMC).
    """

    distributions: tuple[str, ...]
    p_values: tuple[float, ...]
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    repetitions: int = 100
    M: int = 200_000
    mode: str = "dpm"
    dpm: DpmConfig = DpmConfig()
    chain: ChainConfig = ChainConfig()
    seed: int = 0
    out: str = "study-out"
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.distributions or not self.p_values or not self.n_grid:
            raise ValueError("grids must be non-empty")
        if self.M % 2 != 0 or self.M < 4:
            raise ValueError("M must be an even integer >= 4")
        if self.mode not in ("dpm", "empirical-baseline"):
            raise ValueError("mode must be 'dpm' or 'empirical-baseline'")
        if self.repetitions < 1 or self.workers < 1:
            raise ValueError("repetitions and workers must be >= 1")
        for name in self.distributions:
            by_name(name)  # fail fast on unknown names

    @classmethod
    def from_dict(cls, raw: dict) -> "StudyConfig":
        raw = dict(raw)
        if "dpm" in raw:
            raw["dpm"] = DpmConfig.from_dict(raw["dpm"])
        if "chain" in raw:
            raw["chain"] = ChainConfig.from_dict(raw["chain"])
        for key in ("distributions", "p_values", "n_grid"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    @classmethod
    def from_json(cls, path: str | Path) -> "StudyConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "distributions": list(self.distributions),
            "p_values": list(self.p_values),
            "n_grid": list(self.n_grid),
            "repetitions": self.repetitions,
            "M": self.M,
            "mode": self.mode,
            "dpm": self.dpm.to_dict(),
            "chain": self.chain.to_dict(),
            "seed": self.seed,
            "out": self.out,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class StudyResult:
    """One grid cell: the distance W_p (p-th root) and its raw power."""

    dist: str
    p: float
    n: int
    rep: int
    seed: int
    w_distance: float
    w_power: float
    runtime_ms: float


class StudyError(RuntimeError):
    """Raised after a partial run; completed cells were already flushed."""

    def __init__(self, failures: list[tuple[tuple, str]]):
        self.failures = failures
        lines = ", ".join(f"{cell}: {msg}" for cell, msg in failures[:5])
        more = "" if len(failures) <= 5 else f" (+{len(failures) - 5} more)"
        super().__init__(f"{len(failures)} cell(s) failed: {lines}{more}")


@lru_cache(maxsize=8)
def _target_measure(dist_name: str, M: int):
    return discretize(by_name(dist_name), M)


def run_cell(
    config: StudyConfig, dist_name: str, p: float, n: int, rep: int
) -> StudyResult:
    """Execute one cell: sample, fit (dpm mode), measure against Q_M."""
    seed = cell_seed(config.seed, dist_name, p, n, rep)
    data_seed = splitmix64(seed ^ _fnv1a64("data"))
    chain_seed = splitmix64(seed ^ _fnv1a64("chain"))
    start = time.perf_counter()
    dist = by_name(dist_name)
    data = sample(dist, n, data_seed)
    if config.mode == "dpm":
        draws, _ = run_chain(data, config.dpm, replace(config.chain, seed=chain_seed))
        target = empirical_from_sample(SortedSample(np.sort(draws)))
    else:
        target = empirical_from_sample(data)
    qm = _target_measure(dist_name, config.M)
    power = wp_quantile(target, qm, p)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    return StudyResult(
        dist=dist_name,
        p=p,
        n=n,
        rep=rep,
        seed=seed,
        w_distance=power ** (1.0 / p),
        w_power=power,
        runtime_ms=elapsed_ms,
    )


def _run_cell_job(args) -> StudyResult:
    config, cell = args
    return run_cell(config, *cell)


def study_cells(config: StudyConfig) -> list[tuple[str, float, int, int]]:
    """All grid cells in canonical order."""
    cells = [
        (d, p, n, r)
        for d in config.distributions
        for p in config.p_values
        for n in config.n_grid
        for r in range(config.repetitions)
    ]
    cells.sort(key=lambda c: (c[0], c[1], c[2], c[3]))
    return cells


def summarize(results: Sequence[StudyResult]) -> list[tuple[str, float, int, float]]:
    """Median distance per (dist, p, n), canonical order."""
    groups: dict[tuple[str, float, int], list[float]] = {}
    for res in results:
        groups.setdefault((res.dist, res.p, res.n), []).append(res.w_distance)
    return [
        (d, p, n, median(vals)) for (d, p, n), vals in sorted(groups.items())
    ]


def write_results_csv(path: str | Path, results: Sequence[StudyResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["dist", "p", "n", "rep", "seed", "w_distance", "w_power", "runtime_ms"]
        )
        for r in results:
            writer.writerow(
                [r.dist, repr(r.p), r.n, r.rep, r.seed,
                 repr(r.w_distance), repr(r.w_power), f"{r.runtime_ms:.3f}"]
            )


def write_summary_csv(
    path: str | Path, rows: Sequence[tuple[str, float, int, float]]
) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dist", "p", "n", "median_w_distance"])
        for dist, p, n, med in rows:
            writer.writerow([dist, repr(p), n, repr(med)])


def read_results_csv(path: str | Path) -> list[StudyResult]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(
                StudyResult(
                    dist=row["dist"],
                    p=float(row["p"]),
                    n=int(row["n"]),
                    rep=int(row["rep"]),
                    seed=int(row["seed"]),
                    w_distance=float(row["w_distance"]),
                    w_power=float(row["w_power"]),
                    runtime_ms=float(row["runtime_ms"]),
                )
            )
    return out


def run_study(
    config: StudyConfig,
) -> tuple[list[StudyResult], list[tuple[str, float, int, float]]]:
    """Run every cell, write results and summary CSVs, return both tables.

    On partial failure the completed cells are still flushed to disk and a
    :class:`StudyError` listing the failed cells is raised.
    """
    cells = study_cells(config)
    results: list[StudyResult] = []
    failures: list[tuple[tuple, str]] = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [(cell, pool.submit(_run_cell_job, (config, cell))) for cell in cells]
            for cell, future in futures:
                try:
                    results.append(future.result())
                except Exception as exc:  # noqa: BLE001 - cell isolation by design
                    failures.append((cell, str(exc)))
    else:
        for cell in cells:
            try:
                results.append(run_cell(config, *cell))
            except Exception as exc:  # noqa: BLE001 - cell isolation by design
                failures.append((cell, str(exc)))
    results.sort(key=lambda r: (r.dist, r.p, r.n, r.rep))
    summary = summarize(results)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_results_csv(out_dir / "results.csv", results)
    write_summary_csv(out_dir / "summary.csv", summary)
    if failures:
        raise StudyError(failures)
    return results, summary
