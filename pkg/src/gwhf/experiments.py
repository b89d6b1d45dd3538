"""Seeded zero-count ensembles shared by the command line and the tests.

Realizations are processed in fixed batches; batch ``b`` covers indices
``b*batch .. b*batch + batch - 1`` and draws from the per-index streams, so
results do not depend on the number of workers.  ``GWHF_WORKERS`` sets the
process-pool size (default 1).
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .sampler import (FieldRealization, Grid, GwhfEvaluator, MeanSpec, evaluate_gwhf_batch,
                      required_truncation, sample_gef_ensemble)
from .statistics import DiskCountTable, counts_from_points
from .zeros import Disk, classify_critical_points, find_zeros

__all__ = ["EnsembleSpec", "EnsembleResult", "run_zero_ensemble", "worker_count"]

CRITICAL_MODES = ("saddle", "max")


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GWHF_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EnsembleSpec:
    """Zero-count experiment on ``B_R(0)`` for every ``R`` in ``radii``.

    ``n`` is the pure-type order; ``modes`` may mix ``charged``/``uncharged``
    (zeros of the field) with ``saddle``/``max`` (critical points of ``|F|``,
    which requires ``n == 0``).
    """

    n: int
    mean: MeanSpec = MeanSpec()
    radii: tuple[float, ...] = tuple(float(r) for r in range(2, 13))
    realizations: int = 100
    seed: int = 0
    step: float = 0.05
    modes: tuple[str, ...] = ("charged",)
    margin: float = 2.0
    batch: int = 32

    def __post_init__(self):
        if any(m in CRITICAL_MODES for m in self.modes) and self.n != 0:
            raise ValueError("critical-point modes need the order-zero field")
        if self.realizations < 1 or not self.radii:
            raise ValueError("need at least one realization and one radius")


@dataclass
class EnsembleResult:
    tables: dict[str, DiskCountTable]
    unresolved: int = 0
    flagged: int = 0
    critical_points: int = 0
    notes: list[str] = field(default_factory=list)


# deterministic mean ladders on a grid, shared by all batches of one process
_MEAN_CACHE: dict = {}


def _run_batch(spec: EnsembleSpec, start: int, count: int):
    R = max(spec.radii)
    grid = Grid.disk(R + spec.margin, spec.step)
    K = required_truncation(grid.max_radius)
    C = sample_gef_ensemble(K, spec.seed, count, start)
    critical = any(m in CRITICAL_MODES for m in spec.modes)
    zero_modes = [m for m in spec.modes if m not in CRITICAL_MODES]
    F, D1, _ = evaluate_gwhf_batch(C, spec.n, spec.mean, grid, derivatives=critical,
                                   mean_cache=_MEAN_CACHE)
    window = Disk(0j, R)
    rows = {m: [] for m in spec.modes}
    unresolved = flagged = ncrit = 0
    for i in range(count):
        ev = GwhfEvaluator(C[i], spec.n, spec.mean)
        field_ = FieldRealization(grid, F[i], None, None, seed=spec.seed, index=start + i,
                                  evaluator=ev)
        if zero_modes:
            zs = find_zeros(field_, window)
            unresolved += zs.unresolved
            for m in zero_modes:
                w = zs.charges if m == "charged" else np.ones(len(zs), dtype=int)
                rows[m].append(counts_from_points(zs.locations, w, 0j, spec.radii))
        if critical:
            comp = FieldRealization(grid, -D1[i], None, None, seed=spec.seed, index=start + i,
                                    evaluator=GwhfEvaluator(C[i], 1, spec.mean))
            cp = classify_critical_points(field_, window, companion=comp)
            unresolved += cp.unresolved
            flagged += cp.flagged
            ncrit += len(cp)
            labels = np.array([z.label for z in cp.zeros])
            for m in CRITICAL_MODES:
                if m in rows:
                    sel = labels == m if len(cp) else np.zeros(0, dtype=bool)
                    rows[m].append(counts_from_points(cp.locations[sel], np.ones(int(sel.sum()), dtype=int),
                                                      0j, spec.radii))
    return rows, unresolved, flagged, ncrit


def run_zero_ensemble(spec: EnsembleSpec, workers: int | None = None) -> EnsembleResult:
    """Count zeros (or critical points) of ``spec.realizations`` independent fields."""
    workers = worker_count() if workers is None else workers
    starts = list(range(0, spec.realizations, spec.batch))
    jobs = [(spec, s, min(spec.batch, spec.realizations - s)) for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_batch, *zip(*jobs)))
    else:
        parts = [_run_batch(*job) for job in jobs]
    rows = {m: [] for m in spec.modes}
    unresolved = flagged = ncrit = 0
    for part, u, f, c in parts:
        for m in spec.modes:
            rows[m].extend(part[m])
        unresolved, flagged, ncrit = unresolved + u, flagged + f, ncrit + c
    tables = {m: DiskCountTable(m, spec.radii, np.array(rows[m]), (0j,) * spec.realizations)
              for m in spec.modes}
    return EnsembleResult(tables, unresolved, flagged, ncrit)
