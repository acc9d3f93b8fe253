"""Seeded experiment drivers emitting CSV tables plus full-precision sidecars.

Three table kinds are produced:

* table1 - residual history delta_0 .. delta_4 per perturbation level,
* table2 - nearness of Z to the identity: ||Y||_F, delta_1/delta_0^2 and
  sqrt(2) ||Y||_F rho / delta_0 per level,
* table3 - fixed perturbation level, sweep of calibrated stability-radius
  targets.

Rows are deterministic functions of (seed, level); independent rows may be
computed by a small thread pool capped by ``PENCIL_RESTORE_THREADS``.
Output ordering always follows the configuration, not completion order.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from .pencil import random_structured_perturbation
from .restore import CertificateWarning, full_restoration
from .serialization import dump_json
from .stability import stability_radius
from .systems import ph_to_descriptor, random_strictly_passive

TABLE_COLUMNS = {
    "table1": ["delta", "delta_0", "delta_1", "delta_2", "delta_3", "delta_4",
               "iterations", "seed"],
    "table2": ["delta", "y_norm", "ratio_quadratic", "ratio_condition", "rho", "seed"],
    "table3": ["rho", "y_norm", "delta_0", "delta_1", "ratio_condition",
               "target_rho", "seed"],
}

_HISTORY_SLOTS = 5


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one table run; defaults mirror the desk-scale setup."""

    n: int = 8
    m: int = 3
    seeds: tuple[int, ...] = (7,)
    perturbation_levels: tuple[float, ...] = tuple(10.0 ** -k for k in range(1, 11))
    target_rhos: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
    max_iter: int = 20
    tol: float = 1e-15
    output_path: str | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if any(level <= 0 for level in self.perturbation_levels):
            raise ValueError("perturbation levels must be positive")
        if any(t <= 0 for t in self.target_rhos):
            raise ValueError("target rho values must be positive")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        kwargs: dict[str, Any] = {}
        for key in ("n", "m", "max_iter"):
            if key in data:
                kwargs[key] = int(data[key])
        if "tol" in data:
            kwargs["tol"] = float(data["tol"])
        if "seeds" in data:
            kwargs["seeds"] = tuple(int(s) for s in data["seeds"])
        if "perturbation_levels" in data:
            kwargs["perturbation_levels"] = tuple(float(x) for x in data["perturbation_levels"])
        if "target_rhos" in data:
            kwargs["target_rhos"] = tuple(float(x) for x in data["target_rhos"])
        if "output_path" in data:
            kwargs["output_path"] = data["output_path"]
        return cls(**kwargs)


@dataclass
class ExperimentRow:
    """One experiment outcome; columns map one-to-one onto the CSV headers."""

    delta: float
    residual_history: list[float]
    Y_norm: float
    rho: float
    ratio_quadratic: float
    ratio_condition: float
    seed: int
    target_rho: float | None = None
    error: str | None = None
    extras: dict[str, Any] = field(default_factory=dict)


def thread_count() -> int:
    raw = os.environ.get("PENCIL_RESTORE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_one(
    n: int, m: int, seed: int, delta: float,
    target_rho: float | None, max_iter: int, tol: float,
) -> ExperimentRow:
    ph = random_strictly_passive(n, m, seed, target_rho=target_rho)
    sys = ph_to_descriptor(ph)
    rho = stability_radius(sys.E, sys.A).rho
    pert = random_structured_perturbation(n, m, delta, seed=seed + 1)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CertificateWarning)
            result = full_restoration(sys, pert, max_iter=max_iter, tol=tol)
    except Exception as exc:  # row failure is recorded, the sweep continues
        return ExperimentRow(
            delta=delta, residual_history=[], Y_norm=math.nan, rho=rho,
            ratio_quadratic=math.nan, ratio_condition=math.nan,
            seed=seed, target_rho=target_rho, error=f"{type(exc).__name__}: {exc}",
        )
    history = result.residual_history
    delta0 = history[0]
    delta1 = history[1] if len(history) > 1 else math.nan
    ratio_quadratic = delta1 / delta0**2 if delta0 > 0 else math.nan
    ratio_condition = (
        math.sqrt(2.0) * result.y_norm * rho / delta0 if delta0 > 0 else math.nan
    )
    return ExperimentRow(
        delta=delta,
        residual_history=list(history),
        Y_norm=result.y_norm,
        rho=rho,
        ratio_quadratic=ratio_quadratic,
        ratio_condition=ratio_condition,
        seed=seed,
        target_rho=target_rho,
    )


def run_experiment(kind: str, config: ExperimentConfig) -> list[ExperimentRow]:
    """Compute all rows of one table kind, in configuration order."""
    if kind not in TABLE_COLUMNS:
        raise ValueError(f"unknown experiment kind {kind!r}")
    if kind in ("table1", "table2"):
        jobs = [
            (config.n, config.m, seed, delta, None, config.max_iter, config.tol)
            for seed in config.seeds
            for delta in config.perturbation_levels
        ]
    else:
        jobs = [
            (config.n, config.m, seed, 1e-10, target, config.max_iter, config.tol)
            for seed in config.seeds
            for target in config.target_rhos
        ]
    workers = thread_count()
    if workers == 1:
        return [_run_one(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _run_one(*job), jobs))


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.5e}"


def _csv_record(kind: str, row: ExperimentRow) -> list[str]:
    if kind == "table1":
        history = [_fmt(v) for v in row.residual_history[:_HISTORY_SLOTS]]
        history += [""] * (_HISTORY_SLOTS - len(history))
        iterations = max(len(row.residual_history) - 1, 0)
        return [_fmt(row.delta), *history, str(iterations), str(row.seed)]
    if kind == "table2":
        return [
            _fmt(row.delta), _fmt(row.Y_norm), _fmt(row.ratio_quadratic),
            _fmt(row.ratio_condition), _fmt(row.rho), str(row.seed),
        ]
    delta0 = row.residual_history[0] if row.residual_history else math.nan
    delta1 = row.residual_history[1] if len(row.residual_history) > 1 else math.nan
    return [
        _fmt(row.rho), _fmt(row.Y_norm), _fmt(delta0), _fmt(delta1),
        _fmt(row.ratio_condition), _fmt(row.target_rho), str(row.seed),
    ]


def write_table(kind: str, rows: list[ExperimentRow], path: str) -> None:
    """RFC-4180 CSV (6 significant digits) plus a full-precision JSON sidecar."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS[kind])
        for row in rows:
            writer.writerow(_csv_record(kind, row))
    def clean(x):
        if isinstance(x, float) and math.isnan(x):
            return None
        return x

    sidecar = [
        {
            "delta": row.delta,
            "residual_history": row.residual_history,
            "Y_norm": clean(row.Y_norm),
            "rho": row.rho,
            "ratio_quadratic": clean(row.ratio_quadratic),
            "ratio_condition": clean(row.ratio_condition),
            "seed": row.seed,
            "target_rho": row.target_rho,
            "error": row.error,
        }
        for row in rows
    ]
    dump_json({"kind": kind, "rows": sidecar}, path + ".json")
