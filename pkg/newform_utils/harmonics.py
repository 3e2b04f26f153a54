"""Homogeneous harmonic polynomials on R^n and C^n.

Polynomials carry exact Gaussian-rational coefficients (sympy); over C the
generators are z_1..z_n and zb_1..zb_n, where zb_j stands for the conjugate of
z_j. Numerical evaluation derives the conjugates from the point.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy.linalg import qr
from sympy import I, Rational, factorial, rf

from newform_utils.errors import DomainError, UnsupportedError
from newform_utils.repcore import (
    GroupKind,
    LocalField,
    ReprDescriptor,
    compact_group,
)

logger = logging.getLogger(__name__)


def real_variables(n: int) -> Tuple[sympy.Symbol, ...]:
    return sympy.symbols(f"x1:{n + 1}")


def complex_variables(n: int) -> Tuple[Tuple[sympy.Symbol, ...], Tuple[sympy.Symbol, ...]]:
    return sympy.symbols(f"z1:{n + 1}"), sympy.symbols(f"zb1:{n + 1}")


def generators(fld: LocalField, n: int) -> Tuple[sympy.Symbol, ...]:
    if fld.is_real:
        return real_variables(n)
    z, zb = complex_variables(n)
    return tuple(z) + tuple(zb)


def normalize_degrees(fld: LocalField, n: int, degrees: Sequence[int]) -> Tuple[int, ...]:
    degrees = tuple(int(d) for d in (degrees if isinstance(degrees, (tuple, list)) else (degrees,)))
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if any(d < 0 for d in degrees):
        raise DomainError(f"degrees must be nonnegative, got {degrees}")
    if fld.is_real:
        if len(degrees) != 1:
            raise DomainError("harmonics on R^n take a single degree p")
        if n == 1 and degrees[0] > 1:
            raise DomainError(f"H_p(R) is zero for p = {degrees[0]} > 1")
        return degrees
    if len(degrees) == 1:
        degrees = degrees + (0,)
    if len(degrees) != 2:
        raise DomainError("harmonics on C^n take a bidegree (p, q)")
    if n == 1 and degrees[0] * degrees[1] != 0:
        raise DomainError(f"H_(p,q)(C) is zero unless p*q = 0, got {degrees}")
    return degrees


@dataclass(frozen=True)
class HarmonicPoly:
    field: LocalField
    n: int
    degrees: Tuple[int, ...]
    poly: sympy.Poly

    @property
    def gens(self) -> Tuple[sympy.Symbol, ...]:
        return tuple(self.poly.gens)

    @property
    def total_degree(self) -> int:
        return sum(self.degrees)

    @property
    def terms(self):
        return dict(self.poly.terms())

    def as_expr(self) -> sympy.Expr:
        return self.poly.as_expr()

    def is_homogeneous_of_bidegree(self) -> bool:
        for monom, _ in self.poly.terms():
            if self.field.is_real:
                if sum(monom) != self.degrees[0]:
                    return False
            elif (sum(monom[: self.n]), sum(monom[self.n:])) != self.degrees:
                return False
        return True

    @cached_property
    def _numeric(self) -> Callable:
        return sympy.lambdify(self.gens, self.as_expr(), modules="numpy")

    def __str__(self) -> str:
        return sympy.sstr(self.as_expr())


def make_poly(fld: LocalField, n: int, degrees: Sequence[int], expr) -> HarmonicPoly:
    degrees = normalize_degrees(fld, n, degrees)
    return HarmonicPoly(fld, n, degrees, sympy.Poly(sympy.expand(expr), *generators(fld, n)))


def dim_harmonics(fld: LocalField, n: int, degrees: Sequence[int]) -> int:
    degrees = normalize_degrees(fld, n, degrees)
    if n == 1:
        return 1
    if fld.is_real:
        p = degrees[0]
        if n == 2:
            return 1 if p == 0 else 2
        return (2 * p + n - 2) * math.factorial(p + n - 3) // (math.factorial(p) * math.factorial(n - 2))
    p, q = degrees
    num = (p + q + n - 1) * comb(p + n - 2, n - 2) * comb(q + n - 2, n - 2)
    return num // (n - 1)


def zonal(fld: LocalField, n: int, degrees: Sequence[int]) -> HarmonicPoly:
    """The K_{n-1}-invariant harmonic polynomial P with P(e_n) = 1."""
    degrees = normalize_degrees(fld, n, degrees)
    if fld.is_real:
        x = real_variables(n)
        p = degrees[0]
        if n == 1:
            return make_poly(fld, n, degrees, x[0] ** p)
        r2 = sum(v ** 2 for v in x[:-1])
        expr = sum(
            I ** nu * factorial(p)
            / (2 ** nu * factorial(nu // 2) * factorial(p - nu) * rf(Rational(n - 1, 2), nu // 2))
            * r2 ** (nu // 2) * x[-1] ** (p - nu)
            for nu in range(0, p + 1, 2)
        )
        return make_poly(fld, n, degrees, expr)
    z, zb = complex_variables(n)
    p, q = degrees
    if n == 1:
        return make_poly(fld, n, degrees, z[0] ** p * zb[0] ** q)
    r2 = sum(a * b for a, b in zip(z[:-1], zb[:-1]))
    expr = sum(
        (-1) ** nu * sympy.binomial(p, nu) * sympy.binomial(q, nu) / sympy.binomial(nu + n - 2, n - 2)
        * r2 ** nu * z[-1] ** (p - nu) * zb[-1] ** (q - nu)
        for nu in range(min(p, q) + 1)
    )
    return make_poly(fld, n, degrees, expr)


def _substitute(P: HarmonicPoly, mapping) -> sympy.Expr:
    return P.as_expr().subs(mapping, simultaneous=True)


def zonal_product(rep: ReprDescriptor) -> HarmonicPoly:
    """Product of component zonals placed in the component's slots."""
    fld, n = rep.field, rep.n
    expr = sympy.Integer(1)
    if fld.is_real:
        x = real_variables(n)
        for start, comp in rep.slots():
            if comp.is_character:
                expr *= x[start] ** comp.kappa
            else:
                inner = zonal(fld, 2, (comp.kappa,))
                u = real_variables(2)
                expr *= _substitute(inner, {u[0]: x[start], u[1]: x[start + 1]})
        return make_poly(fld, n, (sum(rep.kappas),), expr)
    z, zb = complex_variables(n)
    for j, comp in enumerate(rep.components):
        expr *= z[j] ** max(comp.kappa, 0) * zb[j] ** max(-comp.kappa, 0)
    p = sum(max(k, 0) for k in rep.kappas)
    q = -sum(min(k, 0) for k in rep.kappas)
    return make_poly(fld, n, (p, q), expr)


def laplacian_expr(expr, fld: LocalField, n: int) -> sympy.Expr:
    if fld.is_real:
        return sum(sympy.diff(expr, v, 2) for v in real_variables(n))
    z, zb = complex_variables(n)
    return 4 * sum(sympy.diff(expr, a, b) for a, b in zip(z, zb))


def laplacian(P: HarmonicPoly) -> sympy.Poly:
    return sympy.Poly(laplacian_expr(P.as_expr(), P.field, P.n), *P.gens)


def is_harmonic(P: HarmonicPoly) -> bool:
    return laplacian(P).is_zero


def _check_point(P: HarmonicPoly, point) -> np.ndarray:
    pts = np.asarray(point, dtype=complex)
    if pts.shape[-1] != P.n:
        raise DomainError(f"point has dimension {pts.shape[-1]}, polynomial lives on dimension {P.n}")
    return pts


def eval_poly(P: HarmonicPoly, point) -> np.ndarray:
    """Evaluate at one point (shape (n,)) or a batch (shape (..., n))."""
    pts = _check_point(P, point)
    cols = [pts[..., j] for j in range(P.n)]
    if not P.field.is_real:
        cols += [np.conj(c) for c in cols]
    out = np.asarray(P._numeric(*cols), dtype=complex)
    return out + np.zeros(pts.shape[:-1], dtype=complex)


def eval_exact(P: HarmonicPoly, point: Sequence) -> sympy.Expr:
    values = [sympy.nsimplify(v) for v in point]
    if len(values) != P.n:
        raise DomainError(f"point has dimension {len(values)}, polynomial lives on dimension {P.n}")
    if not P.field.is_real:
        values += [sympy.conjugate(v) for v in values]
    return sympy.simplify(P.as_expr().subs(dict(zip(P.gens, values)), simultaneous=True))


# --- linear-algebra oracle ---

def _exponent_vectors(total: int, k: int):
    for combo in itertools.combinations_with_replacement(range(k), total):
        vec = [0] * k
        for idx in combo:
            vec[idx] += 1
        yield tuple(vec)


def _monomials(fld: LocalField, n: int, degrees: Tuple[int, ...]):
    if fld.is_real:
        return [m for m in _exponent_vectors(degrees[0], n)]
    p, q = degrees
    return [a + b for a in _exponent_vectors(p, n) for b in _exponent_vectors(q, n)]


def harmonic_basis(fld: LocalField, n: int, degrees: Sequence[int]):
    """Basis of the harmonic space as the kernel of the Laplacian on homogeneous polynomials."""
    degrees = normalize_degrees(fld, n, degrees)
    gens = generators(fld, n)
    source = _monomials(fld, n, degrees)
    if fld.is_real:
        target_deg = (degrees[0] - 2,) if degrees[0] >= 2 else None
    else:
        target_deg = (degrees[0] - 1, degrees[1] - 1) if min(degrees) >= 1 else None
    basis_exprs = [sympy.Mul(*[g ** e for g, e in zip(gens, m)]) for m in source]
    if target_deg is None:
        kernel = [sympy.eye(len(source)).col(j) for j in range(len(source))]
    else:
        target = _monomials(fld, n, target_deg)
        index = {m: i for i, m in enumerate(target)}
        matrix = sympy.zeros(len(target), len(source))
        for j, expr in enumerate(basis_exprs):
            image = sympy.Poly(laplacian_expr(expr, fld, n), *gens)
            if image.is_zero:
                continue
            for monom, coeff in image.as_dict().items():
                matrix[index[monom], j] = coeff
        kernel = matrix.nullspace()
    out = []
    for vec in kernel:
        expr = sum(c * b for c, b in zip(vec, basis_exprs))
        out.append(make_poly(fld, n, degrees, expr))
    return out


# --- compact groups ---

@dataclass(frozen=True, eq=False)
class CompactGroupElement:
    group: GroupKind
    n: int
    matrix: np.ndarray

    def unitarity_residual(self) -> float:
        k = self.matrix
        return float(np.max(np.abs(k @ k.conj().T - np.eye(self.n))))


def haar_sample(group: GroupKind, n: int, rng: np.random.Generator) -> CompactGroupElement:
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if group is GroupKind.ORTHOGONAL:
        z = rng.standard_normal((n, n))
    else:
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = qr(z)
    d = np.diagonal(r)
    ph = d / np.abs(d)
    return CompactGroupElement(group, n, q * ph)


def haar_batch(group: GroupKind, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    if group is GroupKind.ORTHOGONAL:
        z = rng.standard_normal((size, n, n))
    else:
        z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def _rotation(theta: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def exact_group_rule(group: GroupKind, n: int, degree: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Nodes and weights integrating matrix-coefficient polynomials of the given degree exactly.

    Returns None when no exact rule is available (then Monte Carlo is used).
    """
    m = 2 * degree + 1
    theta = 2 * np.pi * np.arange(m) / m
    if n == 1 and group is GroupKind.ORTHOGONAL:
        return np.array([[[1.0]], [[-1.0]]]), np.array([0.5, 0.5])
    if n == 1:
        return np.exp(1j * theta)[:, None, None], np.full(m, 1.0 / m)
    if n == 2 and group is GroupKind.ORTHOGONAL:
        rot = _rotation(theta)
        refl = np.diag([-1.0, 1.0]) @ rot
        return np.concatenate([rot, refl]), np.full(2 * m, 0.5 / m)
    if n == 2:
        u, wu = np.polynomial.legendre.leggauss(degree // 2 + 2)
        u, wu = (u + 1) / 2, wu / 2
        uu, x1, x2, ph = np.meshgrid(u, theta, theta, theta, indexing="ij")
        w = np.meshgrid(wu, np.ones(m), np.ones(m), np.ones(m), indexing="ij")[0] / m ** 3
        alpha = np.sqrt(1 - uu) * np.exp(1j * x1)
        beta = np.sqrt(uu) * np.exp(1j * x2)
        su2 = np.stack([np.stack([alpha, -np.conj(beta)], -1), np.stack([beta, np.conj(alpha)], -1)], -2)
        twist = np.zeros(ph.shape + (2, 2), dtype=complex)
        twist[..., 0, 0] = 1
        twist[..., 1, 1] = np.exp(1j * ph)
        k = su2 @ twist
        return k.reshape(-1, 2, 2), w.reshape(-1)
    return None


@dataclass(frozen=True)
class ResidualEstimate:
    residual: float
    error: float
    method: str

    def passes(self, tolerance: float, sigmas: float = 3.0) -> bool:
        return self.residual <= tolerance + sigmas * self.error


def reproducing_residual(
    fld: LocalField,
    n: int,
    degrees: Sequence[int],
    P: HarmonicPoly,
    point,
    rng: Optional[np.random.Generator] = None,
    samples: int = 20000,
) -> ResidualEstimate:
    """|P(z) - dim tau * int_K P(e_n k^-1) P0(z k) dk| with P0 the zonal polynomial."""
    degrees = normalize_degrees(fld, n, degrees)
    if P.field != fld or P.n != n or P.degrees != degrees:
        raise DomainError("polynomial does not belong to the requested harmonic space")
    z = _check_point(P, point)
    zonal_poly = zonal(fld, n, degrees)
    dim = dim_harmonics(fld, n, degrees)
    target = complex(eval_poly(P, z))
    group = compact_group(fld)
    rule = exact_group_rule(group, n, 2 * sum(degrees))
    if rule is not None:
        ks, weights = rule
        method = "exact"
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        ks = haar_batch(group, n, rng, samples)
        weights = np.full(samples, 1.0 / samples)
        method = "monte-carlo"
    en_kinv = np.conj(ks[:, :, n - 1])
    zk = np.einsum("j,sjk->sk", z, ks)
    values = dim * eval_poly(P, en_kinv) * eval_poly(zonal_poly, zk)
    integral = np.sum(weights * values)
    if method == "exact":
        error = 0.0
    else:
        error = float(np.std(values) / np.sqrt(samples))
    logger.debug("reproducing kernel %s n=%d %s: %s (%s)", fld, n, degrees, integral, method)
    return ResidualEstimate(float(abs(target - integral)), error, method)


def gauss_hermite_rule(points: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int g(x) exp(-alpha x^2) dx."""
    y, w = np.polynomial.hermite.hermgauss(points)
    scale = 1.0 / np.sqrt(alpha)
    return y * scale, w * scale


def _hecke_coordinate(fld: LocalField, exponents: Tuple[int, ...], w: complex, points: int) -> complex:
    if fld.is_real:
        x, wt = gauss_hermite_rule(points, np.pi)
        return complex(np.sum(wt * x ** exponents[0] * np.exp(-2j * np.pi * x * w.real)))
    a, b = exponents
    y, wt = gauss_hermite_rule(points, 2 * np.pi)
    u, v = np.meshgrid(y, y, indexing="ij")
    ww = np.outer(wt, wt)
    zz = u + 1j * v
    phase = np.exp(-4j * np.pi * (zz * np.conj(w)).real)
    # additive Haar measure on C is twice Lebesgue
    return complex(2 * np.sum(ww * zz ** a * np.conj(zz) ** b * phase))


def _hecke_integral(P: HarmonicPoly, w: np.ndarray, points: int) -> complex:
    n = P.n
    total = 0j
    for monom, coeff in P.poly.terms():
        term = complex(coeff)
        for j in range(n):
            exps = (monom[j],) if P.field.is_real else (monom[j], monom[n + j])
            term *= _hecke_coordinate(P.field, exps, w[j], points)
        total += term
    return total


def hecke_residual(fld: LocalField, n: int, P: HarmonicPoly, w, points: int = 64) -> ResidualEstimate:
    """Fourier eigen-identity of harmonic Gaussians, integrated by tensor Gauss-Hermite rules."""
    if n * fld.degree > 6:
        raise UnsupportedError(f"{n * fld.degree} real dimensions is beyond the tensor-product budget")
    if P.field != fld or P.n != n:
        raise DomainError("polynomial does not match field and dimension")
    w = _check_point(P, w)
    if fld.is_real and np.any(np.abs(w.imag) > 0):
        raise DomainError("a point of R^n must be real")
    lhs = _hecke_integral(P, w, points)
    coarse = _hecke_integral(P, w, max(points - 16, 8))
    rhs = (1j) ** (-P.total_degree) * complex(eval_poly(P, w)) * np.exp(-fld.degree * np.pi * np.sum(np.abs(w) ** 2))
    return ResidualEstimate(float(abs(lhs - rhs)), float(abs(lhs - coarse)), "gauss-hermite")
