"""Sampling Gaussian Weyl-Heisenberg functions on grids.

A pure-type field of order ``n`` is built from the translation invariant GEF
``G(z) = sum_k xi_k z^k / sqrt(k!)`` through the weighted covariant
derivatives

    W_m(z) = exp(-|z|^2/2) (zbar - d)^m G(z) / sqrt(m!),

and ``F = W_n``, ``D1F = -sqrt(n+1) W_{n+1}``, ``D2F = sqrt(n) W_{n-1}``.
Deterministic means are expressed through the same ladder ``W_m``, so one
code path produces the field and both twisted derivatives.

Random numbers come from Philox streams keyed by ``SeedSequence(seed,
spawn_key=(index,))``: realization ``index`` of an ensemble is reproducible
on its own, independent of scheduling.  Complex Gaussians are
``(X + iY)/sqrt(2)`` with ``X, Y`` from numpy's ``standard_normal``
(ziggurat method), drawn in coefficient order so that a longer truncation
extends the same sequence.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import ceil, comb, factorial, lgamma, log, sqrt
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_hermite

__all__ = [
    "Grid",
    "GefCoefficients",
    "MeanSpec",
    "Signal",
    "FieldRealization",
    "TruncationError",
    "QuadratureError",
    "GwhfEvaluator",
    "sample_gef",
    "sample_gef_ensemble",
    "required_truncation",
    "truncation_tail_bound",
    "evaluate_gwhf",
    "evaluate_gwhf_batch",
    "sample_stft_field",
    "stft_window",
    "stft_mean_component",
    "realize",
    "polyanalytic_basis",
    "PolynomialFieldEvaluator",
    "TwistedShift",
]

CHUNK = 8192


class TruncationError(ValueError):
    """Raised when the series truncation is too short for the grid."""

    def __init__(self, message: str, required: int):
        super().__init__(message)
        self.required = required


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid:
    """Square lattice ``center + (x + iy)``, ``|x|, |y| <= half_width``.

    ``mask_radius`` restricts evaluation to a disk around ``center``; values
    outside it are NaN.
    """

    center: complex = 0j
    half_width: float = 8.0
    step: float = 0.05
    mask_radius: float | None = None

    def __post_init__(self):
        if self.step <= 0 or self.half_width <= 0:
            raise ValueError("grid step and half-width must be positive")
        object.__setattr__(self, "center", complex(self.center))

    @classmethod
    def disk(cls, radius: float, step: float = 0.05, center: complex = 0j) -> "Grid":
        n = ceil(radius / step)
        return cls(center, n * step, step, radius)

    @property
    def n(self) -> int:
        return int(round(2 * self.half_width / self.step)) + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def offsets(self) -> np.ndarray:
        return -self.half_width + self.step * np.arange(self.n)

    @property
    def xs(self) -> np.ndarray:
        return self.center.real + self.offsets

    @property
    def ys(self) -> np.ndarray:
        return self.center.imag + self.offsets

    @property
    def points(self) -> np.ndarray:
        """Complex coordinates, indexed ``[iy, ix]``."""
        return self.xs[None, :] + 1j * self.ys[:, None]

    @property
    def mask(self) -> np.ndarray:
        if self.mask_radius is None:
            return np.ones(self.shape, dtype=bool)
        return np.abs(self.points - self.center) <= self.mask_radius + 1e-12

    @property
    def max_radius(self) -> float:
        """Largest ``|z|`` over evaluated points."""
        if self.mask_radius is None:
            return abs(self.center) + self.half_width * sqrt(2)
        return abs(self.center) + self.mask_radius

    def to_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "half_width": self.half_width,
                "step": self.step, "mask_radius": self.mask_radius}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(complex(*d["center"]), d["half_width"], d["step"], d.get("mask_radius"))


@dataclass(frozen=True)
class GefCoefficients:
    coefficients: np.ndarray
    seed: int
    index: int = 0

    @property
    def truncation_order(self) -> int:
        return len(self.coefficients) - 1


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _complex_normals(gen: np.random.Generator, count: int) -> np.ndarray:
    xy = gen.standard_normal((count, 2))
    return (xy[:, 0] + 1j * xy[:, 1]) / sqrt(2)


def sample_gef(K: int, seed: int, index: int = 0) -> GefCoefficients:
    """Draw ``xi_0 .. xi_K`` for realization ``index`` of stream ``seed``."""
    if K < 0:
        raise ValueError("truncation order must be nonnegative")
    coeffs = _complex_normals(_stream(seed, index), K + 1)
    coeffs.setflags(write=False)
    return GefCoefficients(coeffs, seed, index)


def sample_gef_ensemble(K: int, seed: int, count: int, start: int = 0) -> np.ndarray:
    """Coefficient matrix, row ``i`` equal to ``sample_gef(K, seed, start + i)``."""
    return np.stack([_complex_normals(_stream(seed, start + i), K + 1) for i in range(count)])


def required_truncation(radius: float) -> int:
    """Default series length ``ceil((R + 6)^2) + 32`` for ``|z| <= R``."""
    return int(ceil((radius + 6) ** 2)) + 32


def truncation_tail_bound(K: int, radius: float, order: int = 0) -> float:
    """Upper estimate of ``sum_{k > K} |B_{m,k}(z)|`` for ``|z| <= radius``, ``m <= order``.

    Uses ``|e_k(r)| = exp(-r^2/2) r^k / sqrt(k!)`` maximized over ``r <= radius``
    and a crude bound on the ladder prefactors.
    """
    r = max(radius, 1e-12)
    total = 0.0
    for k in range(K + 1, K + 400):
        rr = min(r, sqrt(k))  # e_k(r) increases up to r = sqrt(k)
        logterm = -rr * rr / 2 + k * log(rr) - 0.5 * lgamma(k + 1)
        logterm += order * log(2 * (1 + r) * sqrt(k))
        total += np.exp(logterm)
    return float(total)


def _check_truncation(K: int, radius: float, order: int, tol: float) -> None:
    # |xi_k| exceeds 7 with probability e^-49
    if 7 * truncation_tail_bound(K, radius, order) <= tol:
        return
    need = required_truncation(radius)
    while 7 * truncation_tail_bound(need, radius, order) > tol:
        need = int(need * 1.25) + 1
    raise TruncationError(
        f"truncation order K={K} too small for |z| <= {radius:.3g}; need K >= {need}", need)


def _weighted_monomials(z: np.ndarray, K: int) -> np.ndarray:
    """Rows ``e_k(z) = exp(-|z|^2/2) z^k / sqrt(k!)``, ``k = 0..K``."""
    out = np.empty((K + 1, z.size), dtype=complex)
    out[0] = np.exp(-np.abs(z) ** 2 / 2)
    for k in range(1, K + 1):
        out[k] = out[k - 1] * z / sqrt(k)
    return out


def polyanalytic_basis(z: np.ndarray, K: int, orders: Sequence[int]) -> dict[int, np.ndarray]:
    """Basis rows ``B_{m,k}(z)`` with ``W_m = sum_k xi_k B_{m,k}``.

    ``B_{m,k} = m!^{-1/2} sum_a (-1)^a C(m,a) zbar^(m-a) sqrt(k!/(k-a)!) e_{k-a}(z)``.
    """
    z = np.asarray(z, dtype=complex).ravel()
    e = _weighted_monomials(z, K)
    zb = np.conj(z)
    root = np.sqrt(np.arange(K + 1, dtype=float))
    out = {}
    for m in orders:
        if m < 0:
            out[m] = np.zeros((K + 1, z.size), dtype=complex)
            continue
        if m == 0:
            out[m] = e
            continue
        basis = e * zb ** m
        ratio = np.ones(K + 1)
        for a in range(1, m + 1):
            # ratio[k] = sqrt(k!/(k-a)!) for k >= a
            ratio[a:] *= root[1:K + 2 - a]
            coef = (-1) ** a * comb(m, a)
            basis[a:] += (coef * ratio[a:, None]) * (zb ** (m - a) * e[: K + 1 - a])
        out[m] = basis / sqrt(factorial(m))
    return out


def _hermite_function(m: int, t: np.ndarray) -> np.ndarray:
    """Hermite function normalized in L^2 for the ``exp(-pi t^2)`` scaling."""
    norm = 2 ** 0.25 / sqrt(2.0 ** m * factorial(m))
    return norm * eval_hermite(m, sqrt(2 * np.pi) * t) * np.exp(-np.pi * t * t)


def stft_window(name: str) -> int:
    """Hermite order of a named window (``gauss`` -> 0, ``hermite1`` -> 1)."""
    table = {"gauss": 0, "hermite0": 0, "hermite1": 1}
    if name not in table:
        raise ValueError(f"unsupported window {name!r}; expected gauss or hermite1")
    return table[name]


@dataclass(frozen=True)
class Signal:
    """Deterministic time-domain signal added to white noise.

    kinds: ``gauss`` (``A h_0(t - t0) exp(2 pi i freq t)``), ``tone``
    (``A exp(2 pi i freq t)``), ``chirp`` (``A exp(pi i rate t^2)``).
    """

    kind: str = "chirp"
    amplitude: float = 1.0
    t0: float = 0.0
    freq: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gauss", "tone", "chirp"):
            raise ValueError(f"unknown signal kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "gauss":
            return self.amplitude * _hermite_function(0, t - self.t0) * np.exp(2j * np.pi * self.freq * t)
        if self.kind == "tone":
            return self.amplitude * np.exp(2j * np.pi * self.freq * t)
        return self.amplitude * np.exp(1j * np.pi * self.rate * t * t)

    @property
    def tag(self) -> str:
        return f"{self.kind}:{self.amplitude:g}:{self.t0:g}:{self.freq:g}:{self.rate:g}"


def stft_mean_component(signal: Signal, m: int, z, dt: float = 1 / 64,
                        half_span: float = 6.0) -> np.ndarray:
    """``(-1)^m exp(-ixy) V_{h_m} f(zbar/sqrt(pi))`` by trapezoid quadrature.

    ``V_g f(a, b) = int f(t) conj(g(t - a)) exp(-2 pi i t b) dt``; the window
    is negligible outside ``|t - a| <= half_span``.
    """
    z = np.asarray(z, dtype=complex)
    if signal.kind == "tone":
        return _tone_mean_component(signal, m, z)
    flat = z.ravel()
    tau = np.arange(-half_span, half_span + dt / 2, dt)
    g = _hermite_function(m, tau)
    out = np.empty(flat.size, dtype=complex)
    for start in range(0, flat.size, 2048):
        zz = flat[start:start + 2048]
        a = zz.real / sqrt(np.pi)
        b = -zz.imag / sqrt(np.pi)
        t = a[:, None] + tau[None, :]
        integrand = signal(t) * g[None, :] * np.exp(-2j * np.pi * t * b[:, None])
        v = integrand.sum(axis=1) * dt
        out[start:start + 2048] = v * np.exp(-1j * zz.real * zz.imag)
    return ((-1) ** m * out).reshape(z.shape)


def _tone_mean_component(signal: Signal, m: int, z: np.ndarray) -> np.ndarray:
    # Hermite functions are Fourier eigenfunctions: hat h_m = (-i)^m h_m
    a = z.real / sqrt(np.pi)
    w = -z.imag / sqrt(np.pi) - signal.freq
    v = signal.amplitude * np.exp(-2j * np.pi * a * w) * (-1j) ** m * _hermite_function(m, w)
    return (-1) ** m * v * np.exp(-1j * z.real * z.imag)


def _stft_mean_on_grid(signal: Signal, m: int, grid: Grid, dt: float,
                       half_span: float = 6.0) -> np.ndarray:
    """Same quantity on the full grid via one matrix product over a shared time axis."""
    a = grid.xs / sqrt(np.pi)
    b = -grid.ys / sqrt(np.pi)
    t = np.arange(a.min() - half_span, a.max() + half_span + dt / 2, dt)
    A = signal(t)[None, :] * _hermite_function(m, t[None, :] - a[:, None])
    E = np.exp(-2j * np.pi * t[:, None] * b[None, :])
    v = (A @ E) * dt  # v[ix, iy]
    x = grid.xs[None, :]
    y = grid.ys[:, None]
    return (-1) ** m * v.T * np.exp(-1j * x * y)


@dataclass(frozen=True)
class MeanSpec:
    """Deterministic part ``F_1`` of the field.

    ``kind``: ``none``; ``constant`` (``G_1 = value``); ``coherent``
    (``G_1(z) = exp(z conj(point) - |point|^2/2)``); ``stft`` (STFT of
    ``signal`` with the Hermite window matching the field order).
    """

    kind: str = "none"
    value: complex = 0j
    point: complex = 0j
    signal: Signal | None = None

    def __post_init__(self):
        if self.kind not in ("none", "constant", "coherent", "stft"):
            raise ValueError(f"unknown mean kind {self.kind!r}")
        if self.kind == "stft" and self.signal is None:
            raise ValueError("stft mean requires a signal")

    @classmethod
    def parse(cls, text: str) -> "MeanSpec":
        """``none``, ``constant:<c>``, ``coherent:<w>`` or ``signal:<kind>[:A[:t0[:freq[:rate]]]]``."""
        kind, _, arg = text.strip().partition(":")
        if kind == "none":
            return cls()
        if kind == "constant":
            return cls("constant", value=complex(arg or "1"))
        if kind == "coherent":
            return cls("coherent", point=complex(arg or "0"))
        if kind == "signal":
            parts = arg.split(":") if arg else ["chirp"]
            nums = [float(p) for p in parts[1:]]
            return cls("stft", signal=Signal(parts[0], *nums))
        raise ValueError(f"unknown mean spec {text!r}")

    @property
    def tag(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "constant":
            return f"constant:{_fmt_complex(self.value)}"
        if self.kind == "coherent":
            return f"coherent:{_fmt_complex(self.point)}"
        return f"signal:{self.signal.tag}"

    def ladder(self, m: int, z: np.ndarray) -> np.ndarray:
        """Mean contribution to ``W_m`` at points ``z``."""
        z = np.asarray(z, dtype=complex)
        if m < 0 or self.kind == "none":
            return np.zeros(z.shape, dtype=complex)
        if self.kind == "constant":
            return self.value * np.exp(-np.abs(z) ** 2 / 2) * np.conj(z) ** m / sqrt(factorial(m))
        if self.kind == "coherent":
            w = self.point
            phase = -np.abs(z - w) ** 2 / 2 + 1j * np.imag(z * np.conj(w))
            return np.exp(phase) * (np.conj(z) - np.conj(w)) ** m / sqrt(factorial(m))
        return stft_mean_component(self.signal, m, z)


def _fmt_complex(c: complex) -> str:
    c = complex(c)
    return f"{c.real:g}" if c.imag == 0 else f"{c.real:g}{c.imag:+g}j"


def _field_from_ladder(W: dict[int, np.ndarray], n: int):
    return W[n], -sqrt(n + 1) * W[n + 1], sqrt(n) * W[n - 1] if n > 0 else np.zeros_like(W[n])


class GwhfEvaluator:
    """Pointwise evaluation of ``(F, D1F, D2F)`` for given coefficients."""

    def __init__(self, coefficients: np.ndarray | None, n: int, mean: MeanSpec = MeanSpec()):
        self.coefficients = None if coefficients is None else np.asarray(coefficients)
        self.n = n
        self.mean = mean

    def ladder(self, z, orders: Sequence[int]) -> dict[int, np.ndarray]:
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = {m: self.mean.ladder(m, flat) for m in orders}
        if self.coefficients is not None:
            K = len(self.coefficients) - 1
            basis = polyanalytic_basis(flat, K, [m for m in orders if m >= 0])
            for m in orders:
                if m >= 0:
                    out[m] = out[m] + self.coefficients @ basis[m]
        return {m: v.reshape(z.shape) for m, v in out.items()}

    def __call__(self, z):
        n = self.n
        return _field_from_ladder(self.ladder(z, [n - 1, n, n + 1]), n)

    def values(self, z):
        """``F`` alone."""
        return self.ladder(z, [self.n])[self.n]


@dataclass(frozen=True, eq=False)
class FieldRealization:
    """One sampled field on a grid, with its twisted derivatives.

    ``evaluator`` maps complex points to ``(F, D1F, D2F)`` and is used for
    off-grid refinement; fields loaded from JSON carry none.
    """

    grid: Grid
    F: np.ndarray
    D1F: np.ndarray | None
    D2F: np.ndarray | None
    kernel: str = ""
    mean: str = "none"
    seed: int | None = None
    index: int = 0
    truncation_order: int | None = None
    evaluator: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.F, self.D1F, self.D2F):
            if arr is not None:
                if arr.shape != self.grid.shape:
                    raise ValueError(f"array shape {arr.shape} does not match grid {self.grid.shape}")
                arr.setflags(write=False)

    @property
    def id(self) -> str:
        return f"{self.kernel}|{self.mean}|seed={self.seed}|index={self.index}"

    def to_json(self) -> str:
        def enc(a):
            if a is None:
                return None
            return [[None if np.isnan(v) else [v.real, v.imag] for v in row] for row in a]

        return json.dumps({
            "grid": self.grid.to_dict(), "kernel": self.kernel, "mean": self.mean,
            "seed": self.seed, "index": self.index, "truncation_order": self.truncation_order,
            "F": enc(self.F), "D1F": enc(self.D1F), "D2F": enc(self.D2F),
        })

    @classmethod
    def from_json(cls, text: str) -> "FieldRealization":
        d = json.loads(text)

        def dec(a):
            if a is None:
                return None
            return np.array([[np.nan if v is None else complex(*v) for v in row] for row in a])

        return cls(Grid.from_dict(d["grid"]), dec(d["F"]), dec(d["D1F"]), dec(d["D2F"]),
                   d["kernel"], d["mean"], d["seed"], d["index"], d["truncation_order"])


def realize(evaluator: Callable, grid: Grid, kernel: str = "", mean: str = "none",
            seed: int | None = None, index: int = 0,
            truncation_order: int | None = None) -> FieldRealization:
    """Tabulate a pointwise evaluator on ``grid``."""
    mask = grid.mask
    pts = grid.points[mask]
    arrays = [np.full(grid.shape, np.nan + 0j) for _ in range(3)]
    for start in range(0, pts.size, CHUNK):
        vals = evaluator(pts[start:start + CHUNK])
        for arr, v in zip(arrays, vals):
            sub = arr[mask]
            sub[start:start + CHUNK] = v
            arr[mask] = sub
    return FieldRealization(grid, *arrays, kernel=kernel, mean=mean, seed=seed, index=index,
                            truncation_order=truncation_order, evaluator=evaluator)


def evaluate_gwhf_batch(coefficients: np.ndarray, n: int, mean: MeanSpec, grid: Grid,
                        derivatives: bool = True, tol: float = 1e-9,
                        mean_cache: dict | None = None) -> tuple[np.ndarray, ...]:
    """Evaluate a batch of realizations at once.

    ``coefficients`` has shape ``(B, K+1)``.  Returns ``(F, D1F, D2F)`` with
    shape ``(B, *grid.shape)``; the derivatives are ``None`` unless
    requested.  NaN outside the grid mask.
    """
    coefficients = np.atleast_2d(coefficients)
    if n < 0:
        raise ValueError("field order must be nonnegative")
    B, K1 = coefficients.shape
    orders = [n - 1, n, n + 1] if derivatives else [n]
    _check_truncation(K1 - 1, grid.max_radius, max(orders), tol)
    mask = grid.mask
    pts = grid.points[mask]
    flat = {m: np.empty((B, pts.size), dtype=complex) for m in orders}
    for start in range(0, pts.size, CHUNK):
        chunk = pts[start:start + CHUNK]
        basis = polyanalytic_basis(chunk, K1 - 1, [m for m in orders if m >= 0])
        for m in orders:
            if m >= 0:
                flat[m][:, start:start + chunk.size] = coefficients @ basis[m]
            else:
                flat[m][:, start:start + chunk.size] = 0
    means = _mean_ladder_on_grid(mean, orders, grid, mean_cache)
    W = {}
    for m in orders:
        full = np.full((B,) + grid.shape, np.nan + 0j)
        full[:, mask] = flat[m] + means[m][mask][None, :]
        W[m] = full
    if not derivatives:
        return W[n], None, None
    return _field_from_ladder(W, n)


def _mean_ladder_on_grid(mean: MeanSpec, orders, grid: Grid, cache: dict | None) -> dict:
    out = {}
    for m in orders:
        key = (mean, m, grid)
        if cache is not None and key in cache:
            out[m] = cache[key]
            continue
        if mean.kind == "stft" and m >= 0 and mean.signal.kind != "tone":
            val = _stft_mean_on_grid(mean.signal, m, grid, 1 / 64)
            check = _stft_mean_on_grid(mean.signal, m, grid, 1 / 128)
            err = np.max(np.abs(val - check))
            if not np.isfinite(err) or err > 1e-8:
                raise QuadratureError(f"STFT quadrature unconverged for order {m}: "
                                      f"step-halving changed values by {err:.3g}")
            val = check
        else:
            val = mean.ladder(m, grid.points)
        if not np.all(np.isfinite(val[grid.mask])):
            raise ValueError(f"mean {mean.tag} is not finite on the sampling window")
        if cache is not None:
            cache[key] = val
        out[m] = val
    return out


def evaluate_gwhf(coefficients: GefCoefficients | None, n: int, mean: MeanSpec, grid: Grid,
                  derivatives: bool = True, tol: float = 1e-9) -> FieldRealization:
    """Pure-type field ``F^(n)`` plus mean, with twisted derivatives, on ``grid``.

    Pass ``coefficients=None`` for the deterministic mean alone.
    """
    if coefficients is None:
        F = D1 = D2 = None
        ev = GwhfEvaluator(None, n, mean)
        field_ = realize(ev, grid, kernel=_kernel_tag(n), mean=mean.tag)
        if not derivatives:
            return FieldRealization(grid, np.array(field_.F), None, None, field_.kernel,
                                    field_.mean, evaluator=ev)
        return field_
    F, D1, D2 = evaluate_gwhf_batch(coefficients.coefficients[None, :], n, mean, grid,
                                    derivatives, tol)
    return FieldRealization(
        grid, F[0], None if D1 is None else D1[0], None if D2 is None else D2[0],
        kernel=_kernel_tag(n), mean=mean.tag, seed=coefficients.seed, index=coefficients.index,
        truncation_order=coefficients.truncation_order,
        evaluator=GwhfEvaluator(coefficients.coefficients, n, mean))


def _kernel_tag(n: int) -> str:
    return "gauss" if n == 0 else f"laguerre:{n}"


def sample_stft_field(window: str, signal: Signal | None, grid: Grid, seed: int,
                      index: int = 0, K: int | None = None,
                      derivatives: bool = True) -> FieldRealization:
    """STFT of ``signal + white noise`` as a GWHF.

    The noise part is the pure-type field of the window's Hermite order;
    the signal part is ``(-1)^n exp(-ixy) V_{h_n} f(zbar/sqrt(pi))``.  The
    overall sign ``(-1)^n`` does not move zeros or change their charges.
    """
    n = stft_window(window)
    mean = MeanSpec() if signal is None else MeanSpec("stft", signal=signal)
    K = required_truncation(grid.max_radius) if K is None else K
    return evaluate_gwhf(sample_gef(K, seed, index), n, mean, grid, derivatives)


class PolynomialFieldEvaluator:
    """Deterministic field ``exp(-|z|^2/2) p(z, zbar)`` with exact twisted derivatives."""

    def __init__(self, p):
        from .kernels import d1, d2

        self.p = p
        self._d1 = d1(p)
        self._d2 = d2(p)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        e = np.exp(-np.abs(z) ** 2 / 2)
        return (self.p(z) * e, self._d1(z) * e, self._d2(z) * e)


class TwistedShift:
    """Evaluator of ``T_xi F(z) = F(z - xi) exp(i Im(z conj(xi)))``.

    Twisted derivatives commute with ``T_xi``, so all three components pick
    up the same phase.
    """

    def __init__(self, evaluator: Callable, xi: complex):
        self.evaluator = evaluator
        self.xi = complex(xi)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        phase = np.exp(1j * np.imag(z * np.conj(self.xi)))
        return tuple(v * phase for v in self.evaluator(z - self.xi))
