"""Radial twisted kernels ``H(z) = P(|z|^2) exp(-|z|^2/2)``.

Every function handled here has the shape ``f(z, zbar) * exp(-|z|^2/2)``
with ``f`` a :class:`BiIndexedPoly`, and the twisted derivatives map that
shape to itself:

    D1 (f e) = (d_z f - zbar f) e        D1bar (f e) = (d_zbar f - z f) e
    D2 (f e) = (d_zbar f) e              D2bar (f e) = (d_z f) e

where ``D1 = d - zbar/2``, ``D2 = dbar + z/2`` and the barred operators are
their complex conjugates.  All covariance structure is therefore exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .polynomials import BiIndexedPoly, RationalPoly, laguerre, rational_from_str

__all__ = [
    "TwistedKernel",
    "CovarianceMatrix3",
    "AssumptionReport",
    "make_pure_kernel",
    "kernel_from_spec",
    "kernel_eval",
    "twisted_derivs",
    "twisted_derivative_polys",
    "covariance_polys",
    "covariance_matrix",
    "cross_covariance",
    "validate_assumptions",
    "twisted_phase",
]


def d1(f: BiIndexedPoly) -> BiIndexedPoly:
    return f.d_z() - BiIndexedPoly.zbar() * f


def d2(f: BiIndexedPoly) -> BiIndexedPoly:
    return f.d_zbar()


def d1bar(f: BiIndexedPoly) -> BiIndexedPoly:
    return f.d_zbar() - BiIndexedPoly.z() * f


def d2bar(f: BiIndexedPoly) -> BiIndexedPoly:
    return f.d_z()


_DERIV = {1: d1, 2: d2}
_DERIV_BAR = {1: d1bar, 2: d2bar}


@dataclass(frozen=True)
class TwistedKernel:
    profile: RationalPoly
    name: str = ""

    @property
    def laplacian_at_zero(self) -> Fraction:
        """``Delta H(0) = d dbar H(0) = P'(0) - 1/2``."""
        return self.profile.coefficient(1) - Fraction(1, 2)

    @property
    def polynomial_part(self) -> BiIndexedPoly:
        return BiIndexedPoly.from_radial(self.profile)

    @property
    def pure_order(self) -> int | None:
        """``n`` if the profile is exactly ``L_n``, else ``None``."""
        deg = self.profile.degree
        if deg == float("-inf"):
            return None
        return int(deg) if self.profile == laguerre(int(deg)) else None

    @property
    def spec(self) -> str:
        n = self.pure_order
        if n == 0:
            return "gauss"
        if n is not None:
            return f"laguerre:{n}"
        return "poly:" + ",".join(str(c) for c in self.profile.coefficients)

    def __call__(self, z):
        return kernel_eval(self, z)


@dataclass(frozen=True)
class CovarianceMatrix3:
    """Covariance of ``(F, D1F, D2F)`` at one point, exact entries."""

    entries: tuple[tuple[complex | Fraction, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.entries])

    @property
    def diagonal(self) -> tuple:
        return tuple(self.entries[i][i] for i in range(3))

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j] == 0 for i in range(3) for j in range(3) if i != j)


@dataclass
class AssumptionReport:
    normalization_ok: bool
    strict_bound_margin: float
    decay_constants: tuple[float, float, float]
    positive_semidefinite_ok: bool
    min_gram_eigenvalue: float
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.normalization_ok and self.strict_bound_margin > 0
                and self.positive_semidefinite_ok)


def make_pure_kernel(n: int) -> TwistedKernel:
    """Kernel ``L_n(|z|^2) exp(-|z|^2/2)`` of the pure-type field ``F^(n)``."""
    if n < 0:
        raise ValueError("kernel order must be nonnegative")
    return TwistedKernel(laguerre(n), name="gauss" if n == 0 else f"laguerre:{n}")


def kernel_from_spec(spec: str) -> TwistedKernel:
    """Parse ``gauss``, ``laguerre:<n>`` or ``poly:<c0>,<c1>,...``."""
    text = spec.strip()
    if text == "gauss":
        return make_pure_kernel(0)
    kind, _, arg = text.partition(":")
    if kind == "laguerre" and arg:
        try:
            n = int(arg)
        except ValueError:
            raise ValueError(f"bad Laguerre order in kernel spec {spec!r}") from None
        return make_pure_kernel(n)
    if kind == "poly" and arg:
        try:
            coeffs = [rational_from_str(c) for c in arg.split(",")]
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad coefficient list in kernel spec {spec!r}") from None
        return TwistedKernel(RationalPoly(coeffs), name=text)
    raise ValueError(f"unknown kernel spec {spec!r}; expected gauss, laguerre:<n> or poly:<c0>,...")


def kernel_eval(k: TwistedKernel, z):
    z = np.asarray(z, dtype=complex)
    s = np.abs(z) ** 2
    out = k.profile.evaluate_float(s) * np.exp(-s / 2)
    return out.astype(complex) if np.ndim(out) else complex(out)


def twisted_derivative_polys(k: TwistedKernel) -> dict[str, BiIndexedPoly]:
    """Polynomial parts of ``D1H, D2H, D1 D1bar H, D2 D2bar H, D1 D2bar H``."""
    h = k.polynomial_part
    return {
        "D1H": d1(h),
        "D2H": d2(h),
        "D1D1barH": d1(d1bar(h)),
        "D2D2barH": d2(d2bar(h)),
        "D1D2barH": d1(d2bar(h)),
    }


def twisted_derivs(k: TwistedKernel, z):
    """Numerical ``(D1H, D2H, D1D1barH, D2D2barH, D1D2barH)`` at ``z``."""
    z = np.asarray(z, dtype=complex)
    gauss = np.exp(-np.abs(z) ** 2 / 2)
    polys = twisted_derivative_polys(k)
    return tuple(polys[name](z) * gauss for name in
                 ("D1H", "D2H", "D1D1barH", "D2D2barH", "D1D2barH"))


def covariance_polys(k: TwistedKernel) -> list[list[BiIndexedPoly]]:
    """Polynomial parts ``M[j][l]`` of the cross covariances.

    With ``X = (F, D1F, D2F)`` and ``u = z - w``:

        E[X_j(z) conj(X_l(w))] = M[j][l](u) exp(-|u|^2/2) exp(i Im(z conj(w)))
    """
    h = k.polynomial_part
    m = [[BiIndexedPoly() for _ in range(3)] for _ in range(3)]
    m[0][0] = h
    for j in (1, 2):
        m[j][0] = _DERIV[j](h)
        m[0][j] = -_DERIV_BAR[j](h)
        for l in (1, 2):
            m[j][l] = -_DERIV[j](_DERIV_BAR[l](h))
    return m


def covariance_matrix(k: TwistedKernel) -> CovarianceMatrix3:
    """Exact covariance matrix of ``(F(z), D1F(z), D2F(z))``."""
    m = covariance_polys(k)
    return CovarianceMatrix3(tuple(
        tuple(m[j][l].terms.get((0, 0), Fraction(0)) for l in range(3)) for j in range(3)
    ))


def twisted_phase(z, w):
    """``exp(i Im(z conj(w)))``."""
    return np.exp(1j * np.imag(np.asarray(z) * np.conj(np.asarray(w))))


def cross_covariance(k: TwistedKernel, z, w, normalized: bool = False) -> np.ndarray:
    """Matrix ``E[X_j(z) conj(X_l(w))]`` for ``X = (F, D1F, D2F)``.

    With ``normalized=True`` the derivative components are divided by their
    standard deviations, giving the covariances of ``(xi, xi', xi'')``; a
    degenerate component (zero variance) is left unscaled.
    """
    z, w = complex(z), complex(w)
    u = z - w
    factor = np.exp(-abs(u) ** 2 / 2) * twisted_phase(z, w)
    m = covariance_polys(k)
    out = np.array([[complex(m[j][l](u)) * factor for l in range(3)] for j in range(3)])
    if normalized:
        sd = np.sqrt(np.array([float(x) for x in covariance_matrix(k).diagonal]))
        sd[sd == 0] = 1.0
        out = out / np.outer(sd, sd)
    return out


def validate_assumptions(k: TwistedKernel, radius: float = 8.0, step: float = 0.1,
                         n_clouds: int = 8, cloud_size: int = 64, seed: int = 0,
                         tolerance: float = 1e-9) -> AssumptionReport:
    """Numerically check normalization, strict bound, decay and positivity.

    The report is diagnostic: failures are flagged, never raised.
    """
    if radius <= 0 or step <= 0:
        raise ValueError("radius and step must be positive")
    if cloud_size > 64:
        raise ValueError("point clouds are limited to 64 points")
    notes = []
    normalization_ok = k.profile.coefficient(0) == 1
    if not normalization_ok:
        notes.append(f"H(0) = {k.profile.coefficient(0)} != 1")

    m = int(np.floor(radius / step))
    xs = step * np.arange(-m, m + 1)  # integer multiples, so the origin is exactly zero
    z = (xs[None, :] + 1j * xs[:, None]).ravel()
    z = z[(np.abs(z) <= radius) & (np.abs(z) > 0)]
    s = np.abs(z) ** 2
    habs2 = np.abs(kernel_eval(k, z)) ** 2
    margin = float(np.min((1 - habs2) / np.minimum(1.0, s)))
    if margin <= 0:
        notes.append("strict bound 1 - |H|^2 >= c min(1, |z|^2) fails on the grid")

    weight = 1 + s
    derivs = twisted_derivs(k, z)
    gauss = np.exp(-s / 2)
    mixed = list(derivs[2:]) + [d2(d1bar(k.polynomial_part))(z) * gauss]
    decay = (
        float(np.max(weight * np.abs(kernel_eval(k, z)))),
        float(max(np.max(weight * np.abs(derivs[0])), np.max(weight * np.abs(derivs[1])))),
        float(max(np.max(weight * np.abs(d)) for d in mixed)),
    )

    rng = np.random.default_rng(seed)
    min_eig = np.inf
    spread = min(radius, 4.0)
    for _ in range(n_clouds):
        pts = spread * (rng.uniform(-1, 1, cloud_size) + 1j * rng.uniform(-1, 1, cloud_size))
        diff = pts[:, None] - pts[None, :]
        gram = kernel_eval(k, diff) * twisted_phase(pts[:, None], pts[None, :])
        gram = (gram + gram.conj().T) / 2
        min_eig = min(min_eig, float(np.linalg.eigvalsh(gram)[0]))
    psd_ok = min_eig >= -tolerance
    if not psd_ok:
        notes.append(f"sampled Gram matrix has eigenvalue {min_eig:.3g}")
    return AssumptionReport(normalization_ok, margin, decay, psd_ok, min_eig, notes)
