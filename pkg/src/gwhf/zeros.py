"""Zeros of sampled fields, their charges, and contour indices.

Detection is topological: a grid cell is flagged when the phase of ``F``
winds around its four corners.  Each flagged cell seeds a Newton iteration
on ``F(z + d) ~ F + a d + b conj(d)`` with ``a = dF``, ``b = dbarF``, which
gives ``d = (-F conj(a) + b conj(F)) / (|a|^2 - |b|^2)``.  The Wirtinger
derivatives come from the twisted ones, ``a = D1F + zbar F/2`` and
``b = D2F - z F/2``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .sampler import FieldRealization, Grid, GwhfEvaluator, realize

__all__ = [
    "Disk",
    "Rect",
    "ChargedZero",
    "ZeroSet",
    "PoincareResult",
    "ZeroFindingError",
    "ContourError",
    "find_zeros",
    "poincare_index",
    "classify_critical_points",
    "companion_evaluator",
    "winding_cells",
]

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 40
DEGENERACY_FLOOR = 1e-8


class ZeroFindingError(RuntimeError):
    pass


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def contains(self, z, pad: float = 0.0):
        return np.abs(np.asarray(z) - self.center) <= self.radius + pad

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        c, r = complex(self.center), self.radius
        return (c.real - r, c.real + r, c.imag - r, c.imag + r)

    def __str__(self) -> str:
        return f"disk({complex(self.center)}, {self.radius:g})"


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, z, pad: float = 0.0):
        z = np.asarray(z)
        return ((z.real >= self.x0 - pad) & (z.real <= self.x1 + pad)
                & (z.imag >= self.y0 - pad) & (z.imag <= self.y1 + pad))

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x0, self.x1, self.y0, self.y1)

    def __str__(self) -> str:
        return f"rect({self.x0:g}, {self.x1:g}, {self.y0:g}, {self.y1:g})"


@dataclass(frozen=True)
class ChargedZero:
    location: complex
    charge: int
    jacobian: float
    residual: float
    label: str = ""
    flagged: bool = False


@dataclass(frozen=True)
class ZeroSet:
    zeros: tuple[ChargedZero, ...]
    source: str
    window: Disk | Rect
    unresolved: int = 0
    dedup_radius: float = 0.0
    flagged: int = 0

    def __len__(self) -> int:
        return len(self.zeros)

    @property
    def locations(self) -> np.ndarray:
        return np.array([z.location for z in self.zeros], dtype=complex)

    @property
    def charges(self) -> np.ndarray:
        return np.array([z.charge for z in self.zeros], dtype=int)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "charge", "jacobian", "residual", "label"])
        for z in self.zeros:
            w.writerow([repr(z.location.real), repr(z.location.imag), z.charge,
                        repr(z.jacobian), repr(z.residual), z.label])
        return buf.getvalue()


def _window_inside_grid(grid: Grid, window, margin: float) -> None:
    x0, x1, y0, y1 = window.bounds
    gx, gy = grid.xs, grid.ys
    if x0 - margin < gx[0] - 1e-12 or x1 + margin > gx[-1] + 1e-12 \
            or y0 - margin < gy[0] - 1e-12 or y1 + margin > gy[-1] + 1e-12:
        raise ValueError(f"window {window} does not fit in the sampled grid with margin {margin:g}")
    if grid.mask_radius is not None:
        corners = [complex(x, y) for x in (x0, x1) for y in (y0, y1)]
        reach = window.radius if isinstance(window, Disk) else max(abs(c - grid.center) for c in corners)
        offset = abs(complex(window.center) - grid.center) if isinstance(window, Disk) else 0.0
        if offset + reach + margin > grid.mask_radius + 1e-12:
            raise ValueError(f"window {window} exceeds the sampled disk with margin {margin:g}")


_NUDGE = 1e-6
_TINY = 1e-8


def winding_cells(F: np.ndarray, grid: Grid | None = None, evaluator: Callable | None = None,
                  threshold: float = np.pi / 2) -> np.ndarray:
    """Winding number of ``F`` around each grid cell, shape ``(ny-1, nx-1)``.

    Node-to-node phase increments above ``threshold`` are ambiguous when a
    zero sits close to the edge; with an evaluator those edges are re-traced
    on finer sub-points.
    """
    # a zero on (or within rounding of) a node is moved into the cell below-left
    # of it: the node takes the value of F slightly up-right, so no cell edge
    # passes through the zero and every cell winding is an integer
    F = np.array(F, dtype=complex)
    P = np.pad(np.abs(F), 1, constant_values=np.nan)
    with np.errstate(invalid="ignore"):
        scale = np.fmax.reduce([P[1:-1, 2:], P[1:-1, :-2], P[2:, 1:-1], P[:-2, 1:-1]])
        iy0, ix0 = np.nonzero(np.abs(F) <= _TINY * scale)
    if iy0.size:
        if evaluator is not None and grid is not None:
            F[iy0, ix0] = _values(evaluator, grid.points[iy0, ix0] + _NUDGE * grid.step * (1 + 1j))
        else:
            Q = np.pad(F, 1, constant_values=np.nan)
            dx = Q[iy0 + 1, ix0 + 2] - Q[iy0 + 1, ix0]
            dy = Q[iy0 + 2, ix0 + 1] - Q[iy0, ix0 + 1]
            F[iy0, ix0] = F[iy0, ix0] + _NUDGE * (dx + dy) / 2
    with np.errstate(invalid="ignore", divide="ignore"):
        horiz = np.angle(F[:, 1:] / F[:, :-1])
        vert = np.angle(F[1:, :] / F[:-1, :])
    if evaluator is not None and grid is not None:
        pts = grid.points
        h = grid.step
        for inc, direction in ((horiz, 1.0), (vert, 1j)):
            iy, ix = np.nonzero(np.abs(inc) > threshold)
            if iy.size:
                inc[iy, ix] = _trace_edges(evaluator, pts[iy, ix], direction * h, threshold)
    total = horiz[:-1, :] + vert[:, 1:] - horiz[1:, :] - vert[:, :-1]
    w = np.rint(total / (2 * np.pi))
    w[~np.isfinite(w)] = 0
    return w.astype(int)


def _values(ev: Callable, z: np.ndarray) -> np.ndarray:
    f = getattr(ev, "values", None)
    return f(z) if f is not None else ev(z)[0]


def _trace_edges(ev: Callable, start: np.ndarray, edge: complex, threshold: float,
                 pieces: int = 8, depth: int = 4) -> np.ndarray:
    """Phase increment of ``F`` along ``start -> start + edge`` by sub-sampling."""
    t = np.linspace(0.0, 1.0, pieces + 1)
    path = start[:, None] + edge * t[None, :]
    vals = _values(ev, path)
    hit = np.abs(vals) <= _TINY * np.max(np.abs(vals), axis=1, keepdims=True)
    if hit.any():
        vals[hit] = _values(ev, path[hit] + _NUDGE * abs(edge) * (1 + 1j))
    steps = np.angle(vals[:, 1:] / vals[:, :-1])
    if depth > 0:
        bad = np.abs(steps) > threshold
        if bad.any():
            e, k = np.nonzero(bad)
            steps[e, k] = _trace_edges(ev, path[e, k], edge / pieces, threshold, pieces, depth - 1)
    return steps.sum(axis=1)


class _SplineEvaluator:
    """Bicubic interpolation of tabulated ``(F, D1F, D2F)`` on axes ``xs, ys``."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray, arrays):
        if any(a is None for a in arrays):
            raise ValueError("field without derivatives needs a pointwise evaluator")
        self.splines = []
        for arr in arrays:
            filled = np.where(np.isnan(arr), 0, arr)
            self.splines.append((RectBivariateSpline(ys, xs, filled.real),
                                 RectBivariateSpline(ys, xs, filled.imag)))

    @classmethod
    def from_field(cls, field_: FieldRealization) -> "_SplineEvaluator":
        g = field_.grid
        return cls(g.xs, g.ys, (field_.F, field_.D1F, field_.D2F))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = []
        for re, im in self.splines:
            v = re.ev(flat.imag, flat.real) + 1j * im.ev(flat.imag, flat.real)
            out.append(v.reshape(z.shape))
        return tuple(out)


def _evaluator_for(field_: FieldRealization) -> Callable:
    return field_.evaluator if field_.evaluator is not None else _SplineEvaluator.from_field(field_)


def _wirtinger(ev: Callable, z: np.ndarray):
    F, D1, D2 = ev(z)
    a = D1 + np.conj(z) * F / 2
    b = D2 - z * F / 2
    return F, a, b


def _newton(ev: Callable, seeds: np.ndarray, cap: float, tol: float, max_iter: int,
            max_step: float | None = None):
    """Damped vectorized Newton; returns points, residuals, jacobians, converged mask.

    Steps are clipped to ``max_step`` and halved until ``|F|`` decreases.
    """
    z = seeds.astype(complex).copy()
    max_step = cap / 2 if max_step is None else max_step
    active = np.ones(z.size, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        F, a, b = _wirtinger(ev, z[idx])
        done = np.abs(F) < tol
        active[idx[done]] = False
        idx, F, a, b = idx[~done], F[~done], a[~done], b[~done]
        if idx.size == 0:
            break
        J = np.abs(a) ** 2 - np.abs(b) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = (-F * np.conj(a) + b * np.conj(F)) / J
        bad = ~np.isfinite(delta)
        active[idx[bad]] = False
        idx, F, delta = idx[~bad], F[~bad], delta[~bad]
        size = np.abs(delta)
        delta = np.where(size > max_step, delta * (max_step / np.maximum(size, 1e-300)), delta)
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(8):
            trial = z[idx[pending]] + delta[pending]
            better = np.abs(ev(trial)[0]) < np.abs(F[pending])
            sel = np.flatnonzero(pending)
            z[idx[sel[better]]] = trial[better]
            pending[sel[better]] = False
            delta[pending] /= 2
            if not pending.any():
                break
        # no descent at all: stop this seed
        active[idx[pending]] = False
        active &= np.abs(z - seeds) <= cap
    F, a, b = _wirtinger(ev, z)
    residual = np.abs(F)
    converged = (residual < tol) & (np.abs(z - seeds) <= cap)
    jac = np.abs(a) ** 2 - np.abs(b) ** 2
    return z, residual, jac, converged


def _in_cell(z: np.ndarray, centers: np.ndarray, h: float) -> np.ndarray:
    d = z - centers
    lim = h / 2 * (1 + 1e-6)
    return (np.abs(d.real) <= lim) & (np.abs(d.imag) <= lim)


def find_zeros(field_: FieldRealization, window: Disk | Rect, tol: float = NEWTON_TOL,
               max_iter: int = NEWTON_MAX_ITER, floor: float = DEGENERACY_FLOOR,
               strict: bool = False) -> ZeroSet:
    """Charged zeros of ``field_.F`` inside ``window``.

    ``strict=True`` raises when any flagged cell stays unresolved.
    """
    grid = field_.grid
    h = grid.step
    _window_inside_grid(grid, window, 2 * h)
    ev = _evaluator_for(field_)
    w = winding_cells(field_.F, grid, field_.evaluator)
    iy, ix = np.nonzero(w)
    centers = grid.xs[ix] + h / 2 + 1j * (grid.ys[iy] + h / 2)
    near = window.contains(centers, pad=2 * h)
    iy, ix, centers = iy[near], ix[near], centers[near]
    multi = np.abs(w[iy, ix]) > 1

    z, res, jac, ok = _newton(ev, centers, h, tol, max_iter)
    # a zero reached outside its own cell belongs to a neighbour
    ok &= _in_cell(z, centers, h)
    # retry failed or multiply-wound cells from quarter-cell seeds
    retry = (~ok) | multi
    found = [(z[ok], res[ok], jac[ok])]
    unresolved_cells = np.flatnonzero(~ok).tolist()
    if retry.any():
        offs = (h / 4) * np.array([-1 - 1j, 1 - 1j, -1 + 1j, 1 + 1j])
        sub = (centers[retry][:, None] + offs[None, :]).ravel()
        owner = np.repeat(np.flatnonzero(retry), 4)
        z2, res2, jac2, ok2 = _newton(ev, sub, h, tol, max_iter)
        ok2 &= _in_cell(z2, np.repeat(centers[retry], 4), h)
        found.append((z2[ok2], res2[ok2], jac2[ok2]))
        rescued = set(owner[ok2].tolist())
        unresolved_cells = [c for c in unresolved_cells if c not in rescued]
    if unresolved_cells:
        # close pairs of opposite charge: a neighbour's basin can swallow every
        # single start, so seed Newton from a 9x9 lattice inside the cell
        cells = np.array(unresolved_cells)
        t = (np.arange(9) / 8 - 0.5) * h * 0.9
        patch = (t[None, :] + 1j * t[:, None]).ravel()
        seeds = (centers[cells][:, None] + patch[None, :]).ravel()
        owner = np.repeat(cells, patch.size)
        z3, res3, jac3, ok3 = _newton(ev, seeds, h, tol, max_iter)
        ok3 &= _in_cell(z3, centers[owner], h)
        found.append((z3[ok3], res3[ok3], jac3[ok3]))
        rescued = set(owner[ok3].tolist())
        unresolved_cells = [c for c in unresolved_cells if c not in rescued]

    pts = np.concatenate([f[0] for f in found])
    residuals = np.concatenate([f[1] for f in found])
    jacs = np.concatenate([f[2] for f in found])

    dedup = h / 4
    order = np.argsort(residuals, kind="stable")
    kept: list[int] = []
    for i in order:
        if all(abs(pts[i] - pts[j]) > dedup for j in kept):
            kept.append(i)
    unresolved = len(unresolved_cells)
    zeros = []
    for i in sorted(kept, key=lambda i: (pts[i].real, pts[i].imag)):
        if not window.contains(pts[i]):
            continue
        if abs(jacs[i]) < floor:
            unresolved += 1
            continue
        zeros.append(ChargedZero(complex(pts[i]), int(np.sign(jacs[i])), float(jacs[i]),
                                 float(residuals[i])))
    if strict and unresolved:
        raise ZeroFindingError(f"{unresolved} unresolved zero cells in {window}")
    return ZeroSet(tuple(zeros), field_.id if hasattr(field_, "id") else "", window,
                   unresolved, dedup)


@dataclass(frozen=True)
class PoincareResult:
    index: int
    defect: float
    raw: complex

    def __int__(self) -> int:
        return self.index


def poincare_index(field_: FieldRealization, center: complex, radius: float, m: int = 2048,
                   zeros: ZeroSet | None = None, interpolate: bool = True,
                   max_defect: float = 0.2) -> PoincareResult:
    """``R^2 + (1/2 pi i) oint (D1F/F dz + D2F/F dzbar)`` on ``|z - center| = radius``.

    Field values on the contour come from bicubic interpolation of the grid
    (or from the evaluator with ``interpolate=False``).  The trapezoid rule
    is spectrally accurate on the circle.
    """
    grid = field_.grid
    h = grid.step
    center = complex(center)
    _window_inside_grid(grid, Disk(center, radius), 2 * h)
    if zeros is not None and len(zeros):
        dist = np.abs(np.abs(zeros.locations - center) - radius)
        if np.any(dist < 2 * h):
            raise ContourError("contour passes within two grid steps of a zero")
    theta = 2 * np.pi * np.arange(m) / m
    e = np.exp(1j * theta)
    z = center + radius * e
    if interpolate:
        ev = _local_spline(field_, center, radius)
    else:
        ev = _evaluator_for(field_)
    F, D1, D2 = ev(z)
    dz = 1j * radius * e
    dzb = -1j * radius * np.conj(e)
    integral = np.sum(D1 / F * dz + D2 / F * dzb) * (2 * np.pi / m)
    raw = radius * radius + integral / (2j * np.pi)
    index = int(np.rint(raw.real))
    defect = float(abs(raw - index))
    if not np.isfinite(defect) or defect > max_defect:
        raise ContourError(f"index defect {defect:.3g}: contour too close to a zero or m too small")
    return PoincareResult(index, defect, complex(raw))


def _local_spline(field_: FieldRealization, center: complex, radius: float) -> _SplineEvaluator:
    """Splines on the smallest grid block around the disk (keeps NaN-free)."""
    g = field_.grid
    pad = radius + 4 * g.step
    jx = np.flatnonzero(np.abs(g.xs - center.real) <= pad)
    jy = np.flatnonzero(np.abs(g.ys - center.imag) <= pad)
    sl = (slice(jy[0], jy[-1] + 1), slice(jx[0], jx[-1] + 1))
    arrays = [None if a is None else a[sl] for a in (field_.F, field_.D1F, field_.D2F)]
    if any(a is None for a in arrays):
        raise ValueError("contour index needs tabulated twisted derivatives")
    block = np.stack(arrays)
    if np.isnan(block).any():
        # the disk corners may fall outside a circular mask; fill from the evaluator
        if field_.evaluator is None:
            raise ValueError("contour block leaves the sampled region")
        pts = g.points[sl]
        vals = field_.evaluator(pts)
        block = np.where(np.isnan(block), np.stack(vals), block)
    return _SplineEvaluator(g.xs[jx], g.ys[jy], tuple(block))


def companion_evaluator(field_: FieldRealization) -> GwhfEvaluator:
    """Order-one field ``-D1F`` of an order-zero realization, same coefficients and mean."""
    ev = field_.evaluator
    if not isinstance(ev, GwhfEvaluator) or ev.n != 0:
        raise ValueError("critical points need an order-zero field with its coefficients")
    return GwhfEvaluator(ev.coefficients, 1, ev.mean)


def classify_critical_points(gef_field: FieldRealization, window: Disk | Rect,
                             companion: FieldRealization | None = None,
                             hessian_step: float | None = None) -> ZeroSet:
    """Critical points of ``A = |F|`` for an order-zero field, labeled by charge.

    Zeros of the order-one companion with charge ``+1`` are saddles, ``-1``
    local maxima.  Each label is compared with the sign pattern of the
    Hessian of ``log A`` at the point; mismatches are flagged.
    """
    if companion is None:
        ev1 = companion_evaluator(gef_field)
        companion = realize(ev1, gef_field.grid, kernel="laguerre:1", mean=gef_field.mean,
                            seed=gef_field.seed, index=gef_field.index,
                            truncation_order=gef_field.truncation_order)
    zs = find_zeros(companion, window)
    ev0 = _evaluator_for(gef_field)
    h = hessian_step or min(gef_field.grid.step, 0.02)
    labeled = []
    flagged = 0
    if len(zs):
        p = zs.locations
        def logA(z):
            return np.log(np.abs(ev0(z)[0]))
        f0 = logA(p)
        fxx = (logA(p + h) - 2 * f0 + logA(p - h)) / h ** 2
        fyy = (logA(p + 1j * h) - 2 * f0 + logA(p - 1j * h)) / h ** 2
        fxy = (logA(p + h + 1j * h) - logA(p + h - 1j * h) - logA(p - h + 1j * h)
               + logA(p - h - 1j * h)) / (4 * h * h)
        det = fxx * fyy - fxy ** 2
        for z, d, tr in zip(zs.zeros, det, fxx + fyy):
            label = "saddle" if z.charge > 0 else "max"
            hess = "saddle" if d < 0 else ("max" if tr < 0 else "min")
            bad = hess != label
            flagged += bad
            labeled.append(ChargedZero(z.location, z.charge, z.jacobian, z.residual, label, bad))
    return ZeroSet(tuple(labeled), gef_field.id, window, zs.unresolved, zs.dedup_radius, flagged)
