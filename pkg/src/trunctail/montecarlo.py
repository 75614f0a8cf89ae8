"""Replicated truncation experiments on Burr tails.

A study cell fixes (p, gamma1, delta, N): the truncation tail index is
solved from the target probability p, N pairs are generated, the
truncated sample is estimated with an automatically selected
threshold, and bias/rmse aggregate over replicates.

Reproducibility contract: every replicate's RNG stream is keyed on
content - a stable hash of (master seed, cell parameters, replicate
index) - so a row's numbers never depend on cell order, worker count
or execution order.  Aggregation uses exact summation (math.fsum),
which is associative in effect, so parallel runs are byte-identical to
sequential ones.
"""

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .distributions import burr
from .errors import DegenerateTailError, EmptySampleError
from .product_limit import LYNDEN_BELL, WOODROOFE
from .seeding import stable_key
from .tail_index import default_k_max, gamma1_path, select_k_dispersion
from .truncation import TruncationModel, gamma2_for_target_p

__all__ = [
    "CellSpec",
    "StudyConfig",
    "StudyReport",
    "StudyRow",
    "run_cell",
    "run_study",
]

_VARIANTS = (WOODROOFE, LYNDEN_BELL)
_MIN_OBSERVED = 10
CSV_HEADER = ["p", "gamma1", "N", "mean_n", "mean_k_star", "abs_bias", "rmse", "completed"]


@dataclass(frozen=True)
class CellSpec:
    """One parameter combination of the study grid.

    Attributes:
        p: target truncation probability in (0, 1).
        gamma1: target tail index.
        delta: Burr shape parameter shared by both marginals.
        sizes: pre-truncation sample sizes N to run.
    """

    p: float
    gamma1: float
    delta: float
    sizes: tuple[int, ...]


@dataclass(frozen=True)
class StudyConfig:
    cells: tuple[CellSpec, ...]
    replicates: int
    variant: str = WOODROOFE
    theta: float = 0.3
    master_seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "StudyConfig":
        """Build a config from parsed JSON, with pointer diagnostics."""
        def fail(pointer, message):
            raise ValueError(f"config error at {pointer}: {message}")

        if not isinstance(data, dict):
            fail("", "top level must be an object")
        unknown = set(data) - {"cells", "replicates", "variant", "theta", "master_seed"}
        if unknown:
            fail("", f"unknown key(s) {sorted(unknown)}")
        cells_raw = data.get("cells")
        if not isinstance(cells_raw, list) or not cells_raw:
            fail("/cells", "must be a non-empty array")
        cells = []
        for idx, cell in enumerate(cells_raw):
            where = f"/cells/{idx}"
            if not isinstance(cell, dict):
                fail(where, "must be an object")
            extra = set(cell) - {"p", "gamma1", "delta", "N"}
            if extra:
                fail(where, f"unknown key(s) {sorted(extra)}")
            p = cell.get("p")
            if not isinstance(p, (int, float)) or not 0.0 < p < 1.0:
                fail(f"{where}/p", "must be a number in (0, 1)")
            g1 = cell.get("gamma1")
            if not isinstance(g1, (int, float)) or g1 <= 0:
                fail(f"{where}/gamma1", "must be a positive number")
            delta = cell.get("delta", 0.25)
            if not isinstance(delta, (int, float)) or delta <= 0:
                fail(f"{where}/delta", "must be a positive number")
            sizes_raw = cell.get("N")
            if isinstance(sizes_raw, int):
                sizes_raw = [sizes_raw]
            if not isinstance(sizes_raw, list) or not sizes_raw:
                fail(f"{where}/N", "must be an integer or non-empty array of integers")
            for j, size in enumerate(sizes_raw):
                if not isinstance(size, int) or size < 2:
                    fail(f"{where}/N/{j}", "must be an integer >= 2")
            cells.append(CellSpec(float(p), float(g1), float(delta), tuple(sizes_raw)))
        replicates = data.get("replicates")
        if not isinstance(replicates, int) or replicates < 1:
            fail("/replicates", "must be an integer >= 1")
        variant = data.get("variant", WOODROOFE)
        if variant not in _VARIANTS:
            fail("/variant", f"must be one of {list(_VARIANTS)}")
        theta = data.get("theta", 0.3)
        if not isinstance(theta, (int, float)) or not 0.0 <= theta <= 0.5:
            fail("/theta", "must be a number in [0, 0.5]")
        master_seed = data.get("master_seed", 0)
        if not isinstance(master_seed, int):
            fail("/master_seed", "must be an integer")
        return cls(tuple(cells), replicates, variant, float(theta), master_seed)

    @classmethod
    def from_json(cls, text: str) -> "StudyConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "cells": [
                {"p": c.p, "gamma1": c.gamma1, "delta": c.delta, "N": list(c.sizes)}
                for c in self.cells
            ],
            "replicates": self.replicates,
            "variant": self.variant,
            "theta": self.theta,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True)
class StudyRow:
    """Aggregates for one (p, gamma1, N) combination."""

    p: float
    gamma1: float
    big_n: int
    mean_n: float
    mean_k_star: float
    abs_bias: float
    rmse: float
    completed: int

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "gamma1": self.gamma1,
            "N": self.big_n,
            "mean_n": self.mean_n,
            "mean_k_star": self.mean_k_star,
            "abs_bias": self.abs_bias,
            "rmse": self.rmse,
            "completed": self.completed,
        }


@dataclass(frozen=True)
class StudyReport:
    rows: tuple[StudyRow, ...]

    def to_csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([
                repr(row.p), repr(row.gamma1), row.big_n,
                repr(row.mean_n), repr(row.mean_k_star),
                repr(row.abs_bias), repr(row.rmse), row.completed,
            ])
        return out.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_dict(self) -> dict:
        return {"rows": [row.to_dict() for row in self.rows]}

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _run_replicate(args) -> tuple[int, int, float] | None:
    """One replicate; returns (n, k_star, gamma1_hat) or None if degenerate."""
    p, gamma1, delta, big_n, variant, theta, rep_seed = args
    gamma2 = gamma2_for_target_p(gamma1, p)
    model = TruncationModel(burr(delta, gamma1), burr(delta, gamma2))
    try:
        sample = model.sample(big_n, rep_seed)
    except EmptySampleError:
        return None
    if sample.n < _MIN_OBSERVED or default_k_max(sample.n) < 4:
        return None
    path = gamma1_path(sample, variant)
    k_star = select_k_dispersion(path, theta, 2, default_k_max(sample.n))
    return sample.n, k_star, float(path[k_star])


def run_cell(p: float, gamma1: float, delta: float, big_n: int, replicates: int,
             variant: str = WOODROOFE, theta: float = 0.3, seed: int = 0,
             workers: int = 1) -> StudyRow:
    """Run one study cell and aggregate bias and rmse.

    Replicates with fewer than 10 observed pairs are dropped and only
    counted; if every replicate degenerates the cell raises.

    Args:
        p: target truncation probability.
        gamma1: target tail index.
        delta: Burr shape of both marginals.
        big_n: pairs generated per replicate before truncation.
        replicates: number of replicates.
        variant: product-limit variant for estimation.
        theta: dispersion exponent for threshold selection.
        seed: cell-level seed; replicate r uses the content key
            (seed, r).
        workers: process count; any value yields identical output.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    tasks = [
        (p, gamma1, delta, big_n, variant, theta, stable_key("replicate", seed, r))
        for r in range(replicates)
    ]
    if workers > 1:
        chunk = max(1, replicates // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_replicate, tasks, chunksize=chunk))
    else:
        results = [_run_replicate(t) for t in tasks]
    kept = [r for r in results if r is not None]
    if not kept:
        raise DegenerateTailError(
            f"all {replicates} replicates degenerate in cell "
            f"(p={p}, gamma1={gamma1}, N={big_n})"
        )
    count = len(kept)
    mean_n = math.fsum(r[0] for r in kept) / count
    mean_k = math.fsum(r[1] for r in kept) / count
    mean_g = math.fsum(r[2] for r in kept) / count
    rmse = math.sqrt(math.fsum((r[2] - gamma1) ** 2 for r in kept) / count)
    return StudyRow(
        p=p, gamma1=gamma1, big_n=big_n,
        mean_n=mean_n, mean_k_star=mean_k,
        abs_bias=abs(mean_g - gamma1), rmse=rmse, completed=count,
    )


def run_study(config: StudyConfig, workers: int = 1) -> StudyReport:
    """Run every cell of the study grid in configured order.

    Cell seeds are content keys of (master_seed, p, gamma1, delta, N),
    so reordering cells permutes rows without changing any number.
    """
    rows = []
    for cell in config.cells:
        for big_n in cell.sizes:
            cell_seed = stable_key("cell", config.master_seed, cell.p,
                                   cell.gamma1, cell.delta, big_n)
            try:
                rows.append(run_cell(
                    cell.p, cell.gamma1, cell.delta, big_n,
                    config.replicates, config.variant, config.theta,
                    seed=cell_seed, workers=workers,
                ))
            except DegenerateTailError as exc:
                raise DegenerateTailError(
                    f"cell (p={cell.p}, gamma1={cell.gamma1}, N={big_n}): {exc}"
                ) from exc
    return StudyReport(tuple(rows))
