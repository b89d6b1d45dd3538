"""Second-order chaos of the uncharged zero count.

Exact arithmetic throughout: chaos coefficients, Gaussian moments of
Laguerre products through complete Feynman diagrams, and the two-point
density ``g(s) = E[phi(z) phi(w)]`` with ``s = |z - w|^2``.

Chaos coefficients.  With ``rho = a/b``,

    c_{kl} = int int |a s - b t| L_k(s) L_l(t) e^{-s-t} ds dt.

Write ``|x| = x + 2 max(-x, 0)``.  The linear part factorizes into first
moments.  For the remainder the inner integral over ``t > rho s`` of
``t^m e^{-t}`` equals ``e^{-rho s} sum_{j<=m} m!/j! (rho s)^j``, which leaves
a polynomial in ``s`` against ``e^{-(1+rho)s}``.

Diagrams.  For unit-variance complex Gaussians,

    E[prod_r L_{i_r}(|alpha_r|^2)] = prod_r (-1)^{i_r}/i_r!
        * sum_sigma prod_edges E[alpha_r conj(alpha_q)],

summing over bijections from the ``i_r`` unbarred copies of every factor to
the barred copies, with no edge joining a factor to itself.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, pi, sqrt
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate

from .kernels import TwistedKernel, covariance_matrix, covariance_polys, make_pure_kernel
from .polynomials import BiIndexedPoly, RationalPoly, exp_moment, laguerre, rational_to_str

__all__ = [
    "ChaosCoefficientTable",
    "DiagramSpec",
    "ExpPolyDensity",
    "HyperuniformityVerdict",
    "Q22Result",
    "chaos_coefficients",
    "chaos_coefficient",
    "chaos_terms",
    "laguerre_moment",
    "diagram_value",
    "diagram_density",
    "closed_form_value",
    "monte_carlo_moment",
    "two_point_chaos_density",
    "integral_g",
    "planar_integral",
    "hyperuniformity_verdict",
    "lens_area",
    "q22_analytic",
    "q22_variance",
    "chaos_functional_samples",
    "LABELS",
]

LABELS = ("xi", "xi1", "xi2")  # F, D1F / sqrt(a), D2F / sqrt(b)


# ---------------------------------------------------------------- coefficients

@dataclass(frozen=True)
class ChaosCoefficientTable:
    a: Fraction
    b: Fraction
    max_order: int
    entries: Mapping[tuple[int, int], Fraction]

    def __getitem__(self, kl: tuple[int, int]) -> Fraction:
        return self.entries[kl]

    def to_dict(self) -> dict:
        return {
            "a": rational_to_str(self.a), "b": rational_to_str(self.b), "max_order": self.max_order,
            "entries": {f"{k},{l}": rational_to_str(v) for (k, l), v in sorted(self.entries.items())},
        }


def _first_moments(k: int) -> tuple[Fraction, Fraction]:
    """``int L_k(s) e^{-s} ds`` and ``int s L_k(s) e^{-s} ds``."""
    lk = laguerre(k)
    return exp_moment(lk, 1), exp_moment(lk * RationalPoly([0, 1]), 1)


def chaos_coefficient(a, b, k: int, l: int) -> Fraction:
    """Exact ``c_{kl}`` for ``a, b > 0``."""
    a, b = Fraction(a), Fraction(b)
    if a <= 0 or b <= 0:
        raise ValueError("chaos coefficients need a > 0 and b > 0")
    m0k, m1k = _first_moments(k)
    m0l, m1l = _first_moments(l)
    linear = a * m1k * m0l - b * m0k * m1l

    rho = a / b
    ll = laguerre(l)
    # (b t - a s) L_l(t) = sum_m q_m(s) t^m
    q: dict[int, RationalPoly] = {}
    for m, lam in enumerate(ll.coefficients):
        q[m + 1] = q.get(m + 1, RationalPoly()) + RationalPoly([b * lam])
        q[m] = q.get(m, RationalPoly()) + RationalPoly([0, -a * lam])
    inner = RationalPoly()
    for m, qm in q.items():
        tail = RationalPoly([Fraction(factorial(m), factorial(j)) * rho ** j for j in range(m + 1)])
        inner = inner + qm * tail
    negative = exp_moment(laguerre(k) * inner, 1 + rho)
    return linear + 2 * negative


def chaos_coefficients(a, b, max_order: int = 2) -> ChaosCoefficientTable:
    """All ``c_{kl}`` with ``k + l <= max_order``; requires ``a > b > 0``."""
    a, b = Fraction(a), Fraction(b)
    if not a > b > 0:
        raise ValueError(f"chaos coefficient table requires a > b > 0, got a={a}, b={b}")
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    entries = {(k, l): chaos_coefficient(a, b, k, l)
               for k in range(max_order + 1) for l in range(max_order + 1 - k)}
    return ChaosCoefficientTable(a, b, max_order, entries)


def chaos_coefficient_numeric(a: float, b: float, k: int, l: int) -> float:
    """Adaptive double quadrature of ``c_{kl}``, split along ``a s = b t``."""
    from scipy.special import eval_laguerre

    def f(t, s):
        return abs(a * s - b * t) * eval_laguerre(k, s) * eval_laguerre(l, t) * np.exp(-s - t)

    opts = dict(epsabs=1e-13, epsrel=1e-13)
    lower, _ = integrate.dblquad(f, 0, np.inf, 0, lambda s: a * s / b, **opts)
    upper, _ = integrate.dblquad(f, 0, np.inf, lambda s: a * s / b, np.inf, **opts)
    return lower + upper


# ---------------------------------------------------------------- diagrams

@dataclass(frozen=True)
class ExpPolyDensity:
    """``poly(s) * exp(-rate * s)``."""

    poly: RationalPoly
    rate: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "rate", Fraction(self.rate))

    def __add__(self, other: "ExpPolyDensity") -> "ExpPolyDensity":
        if other.poly.is_zero():
            return self
        if self.poly.is_zero():
            return other
        if other.rate != self.rate:
            raise ValueError("cannot add densities with different exponential rates")
        return ExpPolyDensity(self.poly + other.poly, self.rate)

    def scale(self, c) -> "ExpPolyDensity":
        return ExpPolyDensity(self.poly.scale(c), self.rate)

    def __call__(self, s):
        # exact rational evaluation: the alternating coefficients of high-order
        # densities cancel badly in floating point
        s = np.asarray(s, dtype=float)
        p = np.array([float(self.poly(Fraction(x))) for x in s.ravel()]).reshape(s.shape)
        return p * np.exp(-float(self.rate) * s)

    def to_dict(self) -> dict:
        return {"poly": self.poly.to_json(), "rate": rational_to_str(self.rate)}


@dataclass(frozen=True)
class DiagramSpec:
    """Product of Laguerre factors ``L_order(|label(point)|^2)``.

    ``factors`` holds ``(label, point, order)`` with label in ``LABELS``,
    point ``"z"`` or ``"w"``.
    """

    factors: tuple[tuple[str, str, int], ...]

    def __post_init__(self):
        seen = set()
        for label, point, order in self.factors:
            if label not in LABELS or point not in ("z", "w") or order < 0:
                raise ValueError(f"bad diagram factor {(label, point, order)}")
            if (label, point) in seen:
                raise ValueError(f"label {label} repeated at {point}")
            seen.add((label, point))

    @classmethod
    def parse(cls, text: str) -> "DiagramSpec":
        """``"xi1@z:1 xi2@w:2"`` style."""
        out = []
        for tok in text.split():
            lp, _, order = tok.partition(":")
            label, _, point = lp.partition("@")
            out.append((label, point, int(order)))
        return cls(tuple(out))

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(o for _, _, o in self.factors)


def _bijection_sum(orders: Sequence[int], edge: Callable[[int, int], object], zero) -> object:
    """Sum of edge products over bijections avoiding self-edges (depth-first)."""
    unbarred = [r for r, i in enumerate(orders) for _ in range(i)]
    barred = list(unbarred)
    n = len(unbarred)
    weights = {}
    for r in set(unbarred):
        for q in set(barred):
            if r != q:
                w = edge(r, q)
                if not _is_zero(w):
                    weights[(r, q)] = w
    total = zero
    used = [False] * n

    def walk(pos, acc):
        nonlocal total
        if pos == n:
            total = total + acc
            return
        r = unbarred[pos]
        for j in range(n):
            if used[j]:
                continue
            w = weights.get((r, barred[j]))
            if w is None:
                continue
            used[j] = True
            walk(pos + 1, acc * w)
            used[j] = False

    walk(0, _one_like(zero))
    return total


def _is_zero(w) -> bool:
    if isinstance(w, BiIndexedPoly):
        return w.is_zero()
    return w == 0


def _one_like(zero):
    if isinstance(zero, BiIndexedPoly):
        return BiIndexedPoly.constant(1)
    return 1


def laguerre_moment(orders: Sequence[int], cov: np.ndarray | Callable) -> complex:
    """``E[prod L_{i_r}(|alpha_r|^2)]`` for unit-variance complex Gaussians.

    ``cov[r][q] = E[alpha_r conj(alpha_q)]``.
    """
    edge = cov if callable(cov) else (lambda r, q: complex(cov[r][q]))
    prefactor = Fraction(1)
    for i in orders:
        prefactor *= Fraction((-1) ** i, factorial(i))
    return complex(prefactor) * complex(_bijection_sum(orders, edge, 0))


def _sigma2(kernel: TwistedKernel) -> tuple[Fraction, Fraction, Fraction]:
    return tuple(Fraction(x) for x in covariance_matrix(kernel).diagonal)


def _negate_u(p: BiIndexedPoly) -> BiIndexedPoly:
    return BiIndexedPoly({(i, j): c * (-1) ** (i + j) for (i, j), c in p.terms.items()})


def diagram_value(spec: DiagramSpec, cov: np.ndarray | Mapping | Callable | None = None,
                  kernel: TwistedKernel | None = None, z: complex = 0j, w: complex = 0j) -> complex:
    """Numeric ``E[prod L_i(|X|^2)]``.

    ``cov`` may be a matrix over ``spec.factors``, a mapping from factor
    index pairs to covariances, or omitted together with ``kernel, z, w`` to
    use the kernel's normalized cross covariances.
    """
    from .kernels import cross_covariance

    if cov is None:
        if kernel is None:
            raise ValueError("diagram_value needs covariances or a kernel")
        zw = {"z": complex(z), "w": complex(w)}
        blocks = {(p, q): cross_covariance(kernel, zw[p], zw[q], normalized=True)
                  for p in "zw" for q in "zw"}
        idx = {lab: j for j, lab in enumerate(LABELS)}
        f = spec.factors
        cov = np.array([[blocks[(f[r][1], f[q][1])][idx[f[r][0]], idx[f[q][0]]]
                         for q in range(len(f))] for r in range(len(f))])
    elif isinstance(cov, Mapping):
        table = cov

        def lookup(r, q):
            if (r, q) in table:
                return table[(r, q)]
            if (q, r) in table:
                return np.conj(table[(q, r)])
            raise KeyError(f"missing covariance for factors {r}, {q}")

        return laguerre_moment(spec.orders, lookup)
    return laguerre_moment(spec.orders, cov)


def diagram_density(spec: DiagramSpec, kernel: TwistedKernel) -> ExpPolyDensity:
    """Exact ``E[prod L_i(|X|^2)]`` as a function of ``s = |z - w|^2``.

    Requires the one-point covariance matrix to be diagonal so that every
    surviving edge joins ``z`` to ``w``; twisted phases then cancel.
    """
    cm = covariance_matrix(kernel)
    if not cm.is_diagonal():
        raise ValueError("exact diagrams need independent components at a point")
    var = _sigma2(kernel)
    m = covariance_polys(kernel)
    idx = {lab: j for j, lab in enumerate(LABELS)}
    f = spec.factors
    for label, _, order in f:
        if order > 0 and var[idx[label]] == 0:
            raise ValueError(f"component {label} is degenerate for kernel {kernel.name}")

    def edge(r, q):
        (lr, pr, _), (lq, pq, _) = f[r], f[q]
        if pr == pq:
            return BiIndexedPoly()
        poly = m[idx[lr]][idx[lq]]
        return poly if pr == "z" else _negate_u(poly)

    total = _bijection_sum(spec.orders, edge, BiIndexedPoly())
    prefactor = Fraction(1)
    for label, _, order in f:
        prefactor *= Fraction((-1) ** order, factorial(order)) / var[idx[label]] ** order
    # each edge carries exp(-s/2)
    rate = Fraction(sum(spec.orders), 2)
    if total.is_zero():
        return ExpPolyDensity(RationalPoly(), rate)
    return ExpPolyDensity(total.radial_part().scale(prefactor), rate)


def closed_form_value(spec: DiagramSpec, cov: np.ndarray) -> complex:
    """Pairing formulas for the three order-2 patterns at two points.

    ``L1 L1 | L1 L1``: ``|E(a c*) E(b d*) + E(a d*) E(b c*)|^2``;
    ``L1 L1 | L2``: ``2 |E(a c*) E(b c*)|^2``; ``L2 | L2``: ``|E(a c*)|^4``.
    Assumes independent components at each point.
    """
    z_idx = [r for r, (_, p, o) in enumerate(spec.factors) if p == "z" and o > 0]
    w_idx = [r for r, (_, p, o) in enumerate(spec.factors) if p == "w" and o > 0]
    oz = sorted(spec.factors[r][2] for r in z_idx)
    ow = sorted(spec.factors[r][2] for r in w_idx)
    if oz == [1, 1] and ow == [1, 1]:
        a, b = z_idx
        c, d = w_idx
        return abs(cov[a][c] * cov[b][d] + cov[a][d] * cov[b][c]) ** 2
    if oz == [1, 1] and ow == [2]:
        a, b = z_idx
        (c,) = w_idx
        return 2 * abs(cov[a][c] * cov[b][c]) ** 2
    if oz == [2] and ow == [1, 1]:
        (c,) = z_idx
        a, b = w_idx
        return 2 * abs(cov[a][c] * cov[b][c]) ** 2
    if oz == [2] and ow == [2]:
        return abs(cov[z_idx[0]][w_idx[0]]) ** 4
    raise ValueError("no closed form for this order pattern")


def monte_carlo_moment(orders: Sequence[int], cov: np.ndarray, samples: int = 1_000_000,
                       seed: int = 0, batch: int = 200_000) -> tuple[float, float]:
    """Sample mean and standard error of ``prod L_i(|alpha|^2)`` (real part)."""
    from scipy.special import eval_laguerre

    cov = np.asarray(cov, dtype=complex)
    vals, vecs = np.linalg.eigh((cov + cov.conj().T) / 2)
    root = vecs * np.sqrt(np.clip(vals, 0, None))
    rng = np.random.Generator(np.random.Philox(seed))
    total = total2 = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        g = (rng.standard_normal((m, len(orders))) + 1j * rng.standard_normal((m, len(orders)))) / sqrt(2)
        x = g @ root.T
        prod = np.ones(m)
        for r, i in enumerate(orders):
            prod *= eval_laguerre(i, np.abs(x[:, r]) ** 2)
        total += prod.sum()
        total2 += (prod ** 2).sum()
        done += m
    mean = total / samples
    var = total2 / samples - mean ** 2
    return mean, sqrt(var / samples)


# ---------------------------------------------------------------- density g

def chaos_terms(table: ChaosCoefficientTable, order: int = 2) -> list[tuple[Fraction, dict[str, int]]]:
    """Terms ``c_{kl} L_j(|xi|^2) L_k(|xi1|^2) L_l(|xi2|^2)`` with ``j + k + l = order``."""
    out = []
    for k in range(order + 1):
        for l in range(order + 1 - k):
            j = order - k - l
            out.append((table[(k, l)], {"xi": j, "xi1": k, "xi2": l}))
    return out


def _kernel_ab(kernel: TwistedKernel) -> tuple[Fraction, Fraction]:
    lap = kernel.laplacian_at_zero
    return -lap + Fraction(1, 2), -lap - Fraction(1, 2)


def _check_kernel(kernel: TwistedKernel, max_pure: int = 5) -> None:
    n = kernel.pure_order
    if n == 0:
        raise ValueError("the Gaussian (analytic) kernel has no uncharged chaos: "
                         "charged and uncharged counts coincide and are hyperuniform")
    if n is None or not 1 <= n <= max_pure:
        raise ValueError(f"unsupported kernel {kernel.name or kernel.spec!r}; "
                         f"expected laguerre:n with 1 <= n <= {max_pure}")


def two_point_chaos_density(kernel: TwistedKernel | int, order: int = 2) -> ExpPolyDensity:
    """``E[phi(z) phi(w)] = g(|z - w|^2)`` for the order-``order`` chaos term ``phi``."""
    if isinstance(kernel, int):
        kernel = make_pure_kernel(kernel)
    _check_kernel(kernel)
    a, b = _kernel_ab(kernel)
    table = chaos_coefficients(a, b, order)
    terms = chaos_terms(table, order)
    total = ExpPolyDensity(RationalPoly(), Fraction(order))
    for (ca, oa), (cb, ob) in itertools.product(terms, terms):
        coef = ca * cb
        if coef == 0:
            continue
        factors = tuple((lab, "z", o) for lab, o in oa.items() if o) + \
            tuple((lab, "w", o) for lab, o in ob.items() if o)
        total = total + diagram_density(DiagramSpec(factors), kernel).scale(coef)
    return total


def integral_g(d: ExpPolyDensity) -> Fraction:
    """``int_0^inf p(s) e^{-rate s} ds``, exact."""
    if d.poly.is_zero():
        return Fraction(0)
    return exp_moment(d.poly, d.rate)


def planar_integral(d: ExpPolyDensity) -> tuple[Fraction, str]:
    """``int_C g(|z|^2) dA = pi * integral_g``; returned as the rational factor of pi."""
    v = integral_g(d)
    return v, f"{rational_to_str(v)}*pi"


@dataclass(frozen=True)
class HyperuniformityVerdict:
    kernel: str
    integral: Fraction
    non_hyperuniform: bool
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"kernel": self.kernel, "integral": rational_to_str(self.integral),
                "non_hyperuniform": self.non_hyperuniform, "notes": list(self.notes)}


def hyperuniformity_verdict(kernel: TwistedKernel | int | ExpPolyDensity) -> HyperuniformityVerdict:
    """Non-hyperuniform when the second chaos density has nonzero integral.

    The condition is sufficient only: a vanishing integral settles nothing.
    """
    if isinstance(kernel, ExpPolyDensity):
        d, name = kernel, "custom"
    else:
        if isinstance(kernel, int):
            kernel = make_pure_kernel(kernel)
        d, name = two_point_chaos_density(kernel), kernel.spec
    v = integral_g(d)
    notes = () if v != 0 else (
        "integral vanishes: the second-chaos test is inconclusive, not a proof of hyperuniformity",)
    return HyperuniformityVerdict(name, v, v != 0, notes)


# ---------------------------------------------------------------- Q22

def lens_area(d, R: float):
    """Area of ``B_R(0) ∩ B_R(d)``."""
    d = np.minimum(np.asarray(d, dtype=float), 2 * R)
    return 2 * R * R * np.arccos(d / (2 * R)) - d / 2 * np.sqrt(np.clip(4 * R * R - d * d, 0, None))


def q22_analytic(d: ExpPolyDensity, R: float) -> float:
    """``(1/pi^2) int_B int_B g(|z - w|^2)``, reduced to one radial integral."""
    val, err = integrate.quad(lambda r: float(d(r * r)) * float(lens_area(r, R)) * 2 * pi * r,
                              0, 2 * R, limit=400, epsabs=1e-12, epsrel=1e-11)
    if not np.isfinite(val) or err > 1e-7 * max(1.0, abs(val)):
        raise RuntimeError(f"Q22 quadrature did not converge (estimate {val}, error {err})")
    return val / pi ** 2


@dataclass
class Q22Result:
    R: float
    analytic: float
    asymptote: float
    monte_carlo: float | None = None
    monte_carlo_se: float | None = None
    mean: float | None = None
    mean_se: float | None = None
    realizations: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def chaos_functional_samples(n: int, R: float, realizations: int, seed: int, order: int = 2,
                             step: float = 0.05, batch: int = 16) -> np.ndarray:
    """Per-realization ``(1/pi) int_{B_R} phi`` on sampled pure-type fields."""
    from scipy.special import eval_laguerre

    from .sampler import Grid, MeanSpec, evaluate_gwhf_batch, required_truncation, sample_gef_ensemble

    kernel = make_pure_kernel(n)
    _check_kernel(kernel)
    a, b = _kernel_ab(kernel)
    terms = chaos_terms(chaos_coefficients(a, b, order), order)
    grid = Grid.disk(R, step)
    K = required_truncation(grid.max_radius)
    # lattice sum over the points inside the disk, one cell area each
    mask = grid.mask
    out = np.empty(realizations)
    for start in range(0, realizations, batch):
        count = min(batch, realizations - start)
        C = sample_gef_ensemble(K, seed, count, start)
        F, D1, D2 = evaluate_gwhf_batch(C, n, MeanSpec(), grid, derivatives=True)
        s0 = np.abs(F[:, mask]) ** 2
        s1 = np.abs(D1[:, mask]) ** 2 / float(a)
        s2 = np.abs(D2[:, mask]) ** 2 / float(b)
        phi = np.zeros_like(s0)
        for c, o in terms:
            phi += float(c) * eval_laguerre(o["xi"], s0) * eval_laguerre(o["xi1"], s1) * \
                eval_laguerre(o["xi2"], s2)
        out[start:start + count] = phi.sum(axis=1) * step * step / pi
    return out


def q22_variance(n: int, R: float, realizations: int = 0, seed: int = 0,
                 step: float = 0.05) -> Q22Result:
    """Analytic, asymptotic and (optionally) Monte Carlo variance of ``Q22``."""
    if R > 12:
        raise ValueError("R <= 12 required")
    d = two_point_chaos_density(n)
    res = Q22Result(R, q22_analytic(d, R), float(integral_g(d)) * R * R)
    if realizations:
        x = chaos_functional_samples(n, R, realizations, seed, 2, step)
        var = x.var(ddof=1)
        m4 = np.mean((x - x.mean()) ** 4)
        res.monte_carlo = float(var)
        res.monte_carlo_se = float(sqrt(max(m4 - var * var, 0.0) / len(x)))
        res.mean = float(x.mean())
        res.mean_se = float(x.std(ddof=1) / sqrt(len(x)))
        res.realizations = realizations
    return res
