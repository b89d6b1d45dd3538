"""Disk counts, moment summaries and growth-exponent fits."""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .zeros import ZeroSet

__all__ = [
    "MODES",
    "DiskCountTable",
    "MomentSummary",
    "ExponentFit",
    "DegenerateVarianceWarning",
    "count_in_disks",
    "counts_from_points",
    "summarize",
    "fit_growth_exponent",
    "poisson_control",
    "summary_to_csv",
]

MODES = ("charged", "uncharged", "saddle", "max")


class DegenerateVarianceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DiskCountTable:
    """Per-realization counts, rows are realizations and columns radii."""

    mode: str
    radii: tuple[float, ...]
    counts: np.ndarray
    centers: tuple[complex, ...]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown count mode {self.mode!r}")
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1, len(self.radii))
        if self.mode != "charged" and (counts < 0).any():
            raise ValueError("negative counts in an unsigned mode")
        if list(self.radii) != sorted(self.radii):
            raise ValueError("radii must be ascending")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))

    @property
    def realizations(self) -> int:
        return self.counts.shape[0]

    def merge(self, other: "DiskCountTable") -> "DiskCountTable":
        """Concatenate realizations; rows are kept sorted so merge order is irrelevant."""
        if (other.mode, other.radii) != (self.mode, self.radii):
            raise ValueError("cannot merge tables with different modes or radii")
        rows = np.concatenate([self.counts, other.counts])
        centers = self.centers + other.centers
        key = np.lexsort(rows.T[::-1])
        return DiskCountTable(self.mode, self.radii, rows[key], tuple(centers[i] for i in key))


def _select(zs: ZeroSet, mode: str) -> tuple[np.ndarray, np.ndarray]:
    loc, q = zs.locations, zs.charges
    if mode == "charged":
        return loc, q
    if mode == "uncharged":
        return loc, np.ones_like(q)
    labels = np.array([z.label for z in zs.zeros])
    want = "saddle" if mode == "saddle" else "max"
    if len(zs) and not np.all(np.isin(labels, ("saddle", "max"))):
        raise ValueError(f"mode {mode} needs labeled critical points")
    keep = labels == want if len(zs) else np.zeros(0, dtype=bool)
    return loc[keep], np.ones(int(keep.sum()), dtype=int)


def counts_from_points(locations: np.ndarray, weights: np.ndarray, center: complex,
                       radii: Sequence[float]) -> np.ndarray:
    """Weighted counts in ``|z - center| <= R`` for each radius."""
    d = np.abs(np.asarray(locations) - center)
    return np.array([int(np.sum(weights[d <= r])) for r in radii], dtype=np.int64)


def count_in_disks(zero_sets: Sequence[ZeroSet], centers: Sequence[complex] | complex,
                   radii: Sequence[float], mode: str = "charged") -> DiskCountTable:
    """Tally zeros of each set in concentric disks (boundary inclusive)."""
    if mode not in MODES:
        raise ValueError(f"unknown count mode {mode!r}")
    radii = sorted(float(r) for r in radii)
    if np.ndim(centers) == 0:
        centers = [complex(centers)] * len(zero_sets)
    if len(centers) != len(zero_sets):
        raise ValueError("one center per zero set required")
    rows = []
    for zs, c in zip(zero_sets, centers):
        win = zs.window
        for r in radii:
            if not _disk_within(win, complex(c), r):
                raise ValueError(f"radius {r:g} around {complex(c)} overflows search window {win}")
        loc, w = _select(zs, mode)
        rows.append(counts_from_points(loc, w, complex(c), radii))
    counts = np.array(rows, dtype=np.int64).reshape(len(rows), len(radii))
    return DiskCountTable(mode, tuple(radii), counts, tuple(complex(c) for c in centers))


def _disk_within(window, c: complex, r: float) -> bool:
    if hasattr(window, "radius"):
        return abs(c - complex(window.center)) + r <= window.radius + 1e-9
    x0, x1, y0, y1 = window.bounds
    return x0 <= c.real - r and c.real + r <= x1 and y0 <= c.imag - r and c.imag + r <= y1


@dataclass(frozen=True)
class MomentSummary:
    mode: str
    radii: tuple[float, ...]
    mean: np.ndarray
    variance: np.ndarray
    index_of_dispersion: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    realizations: int
    centered: bool = False
    warnings: tuple[str, ...] = ()

    def rows(self) -> list[dict]:
        return [
            {"radius": r, "mean": float(m), "var": float(v), "iod": float(i),
             "ci_lo": float(lo), "ci_hi": float(hi), "n_realizations": self.realizations,
             "mode": self.mode}
            for r, m, v, i, lo, hi in zip(self.radii, self.mean, self.variance,
                                          self.index_of_dispersion, self.ci_low, self.ci_high)
        ]


def summarize(table: DiskCountTable, n_boot: int = 1000, seed: int = 0,
              center_mean: Sequence[float] | None = None) -> MomentSummary:
    """Mean, unbiased variance, index of dispersion and bootstrap 95% CI of the variance.

    With ``center_mean`` (one value per radius) the variance is taken about
    that known mean instead of the sample mean.
    """
    x = table.counts.astype(float)
    n = x.shape[0]
    if n < 2:
        raise ValueError("at least two realizations are needed")
    mean = x.mean(axis=0)
    if center_mean is None:
        var = x.var(axis=0, ddof=1)
    else:
        mu = np.asarray(center_mean, dtype=float)
        var = ((x - mu) ** 2).sum(axis=0) / n
    notes = []
    if np.any(var == 0):
        msg = "zero sample variance at radii " + ", ".join(f"{r:g}" for r, v in zip(table.radii, var) if v == 0)
        warnings.warn(msg, DegenerateVarianceWarning, stacklevel=2)
        notes.append(msg)
    with np.errstate(divide="ignore", invalid="ignore"):
        iod = var / mean

    rng = np.random.Generator(np.random.Philox(seed))
    idx = rng.integers(0, n, size=(n_boot, n))
    boot = x[idx]  # (n_boot, n, radii)
    if center_mean is None:
        bvar = boot.var(axis=1, ddof=1)
    else:
        bvar = ((boot - mu) ** 2).mean(axis=1)
    lo, hi = np.percentile(bvar, [2.5, 97.5], axis=0)
    lo, hi = np.minimum(lo, var), np.maximum(hi, var)
    return MomentSummary(table.mode, table.radii, mean, var, iod, lo, hi, n,
                         center_mean is not None, tuple(notes))


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    intercept: float
    r_range: tuple[float, float]
    n_points: int
    residuals: tuple[float, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr, "intercept": self.intercept,
                "r_min": self.r_range[0], "r_max": self.r_range[1], "n_points": self.n_points,
                "residuals": list(self.residuals)}


def fit_growth_exponent(summary: MomentSummary | tuple[Sequence[float], Sequence[float]],
                        r_min: float, r_max: float) -> ExponentFit:
    """Least-squares slope of ``log Var`` against ``log R`` over ``[r_min, r_max]``."""
    if not r_min < r_max:
        raise ValueError("r_min must be below r_max")
    if isinstance(summary, MomentSummary):
        radii, var = np.asarray(summary.radii), np.asarray(summary.variance, dtype=float)
    else:
        radii, var = (np.asarray(a, dtype=float) for a in summary)
    sel = (radii >= r_min - 1e-12) & (radii <= r_max + 1e-12)
    if sel.sum() < 5:
        raise ValueError(f"need at least 5 radii in [{r_min:g}, {r_max:g}], got {int(sel.sum())}")
    if np.any(var[sel] <= 0):
        raise ValueError("zero variance in the fit range; cannot take logarithms")
    lx, ly = np.log(radii[sel]), np.log(var[sel])
    fit = stats.linregress(lx, ly)
    resid = ly - (fit.intercept + fit.slope * lx)
    return ExponentFit(float(fit.slope), float(fit.stderr), float(fit.intercept),
                       (float(r_min), float(r_max)), int(sel.sum()), tuple(float(r) for r in resid))


def poisson_control(radii: Sequence[float], realizations: int, seed: int = 0,
                    intensity: float = 1 / np.pi, window_radius: float | None = None) -> DiskCountTable:
    """Counts of a homogeneous Poisson process in concentric disks."""
    radii = sorted(float(r) for r in radii)
    L = window_radius or radii[-1]
    rng = np.random.Generator(np.random.Philox(seed))
    rows = []
    for _ in range(realizations):
        n = rng.poisson(intensity * np.pi * L * L)
        r = L * np.sqrt(rng.uniform(size=n))
        rows.append([int(np.sum(r <= R)) for R in radii])
    return DiskCountTable("uncharged", tuple(radii), np.array(rows), (0j,) * realizations)


def summary_to_csv(summary: MomentSummary) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, ["radius", "mean", "var", "iod", "ci_lo", "ci_hi", "n_realizations", "mode"],
                       lineterminator="\n")
    w.writeheader()
    for row in summary.rows():
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
