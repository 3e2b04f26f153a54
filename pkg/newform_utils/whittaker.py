"""Whittaker newforms on GL_1, GL_2 and GL_3.

Three independent evaluation routes are provided: closed forms (GL_1, and GL_2
via K-Bessel / exponential formulas), the Jacquet integral of the induced-model
newform, and the propagation formula expressing W on GL_n through a GL_{n-1}
Whittaker function integrated against Gaussian Schwartz data.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from newform_utils.conventions import CONVENTIONS
from newform_utils.errors import ConvergenceError, DomainError, QuadratureError, UnsupportedError
from newform_utils.harmonics import (
    ResidualEstimate,
    eval_poly,
    exact_group_rule,
    gauss_hermite_rule,
    zonal_product,
)
from newform_utils.invariants import newform_ktype_dimension
from newform_utils.quadrature import (
    HalfLine,
    QuadratureResult,
    QuadratureSpec,
    RealLine,
    check_budget,
    de_nodes,
    integrate_units,
    oscillatory_fourier,
)
from newform_utils.repcore import (
    GroupKind,
    REAL,
    LocalField,
    ReprDescriptor,
    SquareIntegrableRep,
    character,
)
from newform_utils.special import bessel_k, l_factor, zeta_F

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
# exp(-120) is far below double precision relative to every integrand used here
NEGLIGIBLE_EXPONENT = 120.0
# Gauss-Hermite Fourier transforms: exact value exp(-E) is taken as 0 past E = HERMITE_CUTOFF,
# and HERMITE_POINTS nodes resolve every frequency below it
HERMITE_CUTOFF = 40.0
HERMITE_POINTS = 128


# --- points of GL_n ---

@dataclass(frozen=True)
class TorusPoint:
    field: LocalField
    entries: Tuple[complex, ...]

    def __post_init__(self):
        entries = tuple(complex(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries or any(e == 0 for e in entries):
            raise DomainError(f"torus entries must be nonzero, got {entries}")
        if self.field.is_real and any(e.imag != 0 for e in entries):
            raise DomainError("a real torus point needs real entries")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.entries, dtype=complex))


class GroupPoint:
    """An element of GL_n(F) with its Iwasawa factors g = u a k cached."""

    def __init__(self, fld: LocalField, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {m.shape}")
        if fld.is_real and np.any(m.imag != 0):
            raise DomainError("a point of GL_n(R) needs real entries")
        if abs(np.linalg.det(m)) < 1e-300:
            raise DomainError("matrix is singular")
        self.field = fld
        self.matrix = m

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def iwasawa(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return iwasawa(self.matrix)

    def reconstruction_residual(self) -> float:
        u, a, k = self.iwasawa
        return float(np.max(np.abs(u @ np.diag(a) @ k - self.matrix)))

    @classmethod
    def from_torus(cls, point: TorusPoint) -> "GroupPoint":
        return cls(point.field, point.matrix)


def _conj_t(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def iwasawa(m) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched Iwasawa decomposition m = u diag(a) k, u upper unipotent, k unitary.

    GL_2 uses the closed form with a_2 > 0 and det k = 1; larger n goes through
    an RQ factorisation.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[-1]
    if n == 1:
        ones = np.ones_like(m)
        return ones, m[..., 0], ones
    if n == 2:
        p, q, r, s = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
        a2 = np.sqrt(np.abs(r) ** 2 + np.abs(s) ** 2)
        a1 = (p * s - q * r) / a2
        u12 = (p * np.conj(r) + q * np.conj(s)) / a2 ** 2
        k = np.stack([
            np.stack([np.conj(s), -np.conj(r)], -1),
            np.stack([r, s], -1),
        ], -2) / a2[..., None, None]
        u = np.zeros(m.shape, dtype=complex)
        u[..., 0, 0] = u[..., 1, 1] = 1.0
        u[..., 0, 1] = u12
        return u, np.stack([a1, a2.astype(complex)], -1), k
    rev = np.eye(n)[::-1]
    q1, r1 = np.linalg.qr(_conj_t(rev @ m))
    upper = rev @ _conj_t(r1) @ rev
    k = rev @ _conj_t(q1)
    a = np.diagonal(upper, axis1=-2, axis2=-1)
    return upper / a[..., None, :], a, k


def _matrices(fld: LocalField, g, n: int) -> np.ndarray:
    if isinstance(g, TorusPoint):
        g = g.matrix
    elif isinstance(g, GroupPoint):
        g = g.matrix
    m = np.asarray(g, dtype=complex)
    if n == 1 and m.shape[-2:] != (1, 1):
        m = m[..., None, None]
    if m.shape[-2:] != (n, n):
        raise DomainError(f"expected {n}x{n} matrices, got shape {m.shape}")
    if fld.is_real and np.any(m.imag != 0):
        raise DomainError("points of GL_n(R) need real entries")
    if np.any(np.abs(np.linalg.det(m)) == 0):
        raise DomainError("matrix is singular")
    return m


def _require_rank(rep: ReprDescriptor, *ranks: int) -> None:
    if rep.n not in ranks:
        raise DomainError(f"expected a representation of GL_n with n in {ranks}, got n = {rep.n}")


# --- canonical normalisation and the induced model ---

def _single(comp: SquareIntegrableRep) -> ReprDescriptor:
    return ReprDescriptor(comp.field, (comp,))


def component_constant(comp: SquareIntegrableRep) -> complex:
    if comp.is_character:
        return 1.0 + 0j
    k = comp.kappa
    return complex((1j ** k) * _zeta_r(k) * _zeta_r(k + 1))


def _zeta_r(s):
    return zeta_F(REAL, s)


def canonical_constant(rep: ReprDescriptor) -> complex:
    """The canonical normalising constant, component constants included."""
    fld = rep.field
    comps = rep.components
    total = 1.0 + 0j
    for j, cj in enumerate(comps):
        for cl in comps[j + 1:]:
            dual = _single(cl.contragredient())
            total *= 1j ** cl.conductor
            if cj.is_character:
                total *= l_factor(dual, 1 + cj.t + abs(cj.kappa) / fld.degree)
            else:
                total *= l_factor(dual, 1 + cj.t + (cj.kappa - 1) / 2)
                total *= l_factor(dual, 1 + cj.t + (cj.kappa + 1) / 2)
        total *= component_constant(cj)
    return complex(total)


class InducedNewform:
    """The canonically normalised newform f of the induced model, evaluated through g = u a k."""

    def __init__(self, rep: ReprDescriptor):
        self.rep = rep
        self.field = rep.field
        self.constant = canonical_constant(rep)
        self.poly = zonal_product(rep)

    def __call__(self, matrices) -> np.ndarray:
        m = np.asarray(matrices, dtype=complex)
        if m.shape[-2:] != (self.rep.n, self.rep.n):
            raise DomainError(f"expected {self.rep.n}x{self.rep.n} matrices, got shape {m.shape}")
        _, a, k = iwasawa(m)
        return self.from_iwasawa(a, k)

    def from_iwasawa(self, a: np.ndarray, k: np.ndarray) -> np.ndarray:
        fld, n = self.field, self.rep.n
        norm = fld.norm(a)
        out = np.full(a.shape[:-1], self.constant, dtype=complex)
        for j in range(n):
            out = out * norm[..., j] ** ((n - 2 * j - 1) / 2)
        for start, comp in self.rep.slots():
            if comp.is_character:
                out = out * fld.sign_character(a[..., start], comp.kappa) * norm[..., start] ** comp.t
            else:
                shift = (comp.kappa - 1) / 2
                out = out * fld.sign_character(a[..., start + 1], comp.kappa)
                out = out * norm[..., start] ** (comp.t + shift) * norm[..., start + 1] ** (comp.t - shift)
        column = k[..., :, n - 1]
        return out * np.conj(eval_poly(self.poly, np.conj(column)))


# --- closed forms ---

def whittaker_gl1(rep: ReprDescriptor, x):
    _require_rank(rep, 1)
    x = np.asarray(x, dtype=complex)
    if np.any(x == 0):
        raise DomainError("the GL_1 Whittaker function is evaluated at nonzero points")
    comp = rep.components[0]
    out = rep.field.sign_character(x, comp.kappa) * rep.field.norm(x) ** comp.t
    return out[()] if np.ndim(out) == 0 else out


def whittaker_gl2_closed(rep: ReprDescriptor, y):
    """W(diag(y, 1)) for GL_2 from the K-Bessel and exponential formulas."""
    _require_rank(rep, 2)
    y = np.asarray(y, dtype=complex)
    if np.any(y == 0):
        raise DomainError("W(diag(y, 1)) needs y != 0")
    fld = rep.field
    r = np.asarray(fld.norm(y), dtype=float)
    if rep.r == 1:
        comp = rep.components[0]
        out = r ** (comp.t + comp.kappa / 2) * np.exp(-TWO_PI * r)
    elif fld.is_real:
        (k1, k2), (t1, t2) = rep.kappas, rep.ts
        out = 2 * r ** ((t1 + t2 + 1 + k1 + k2) / 2) * bessel_k((t1 - t2 + k1 - k2) / 2, TWO_PI * r)
    else:
        (k1, k2), (t1, t2) = rep.kappas, rep.ts
        power = (t1 + t2 + 1) / 2 + (abs(k1) + abs(k2)) / 4
        out = 4 * r ** power * bessel_k(t1 - t2 + (abs(k1) - abs(k2)) / 2, 2 * TWO_PI * np.sqrt(r))
    out = np.asarray(out, dtype=complex)
    return out[()] if out.ndim == 0 else out


def central_character(rep: ReprDescriptor, z):
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape, dtype=complex)
    for comp in rep.components:
        if comp.is_character:
            out = out * rep.field.sign_character(z, comp.kappa) * rep.field.norm(z) ** comp.t
        else:
            out = out * rep.field.sign_character(z, comp.kappa) * rep.field.norm(z) ** (2 * comp.t)
    return out


def has_full_closed_form(rep: ReprDescriptor) -> bool:
    return rep.n == 2 and (rep.is_spherical or (rep.r == 1 and not rep.components[0].is_character))


def whittaker_gl2_full(rep: ReprDescriptor, g) -> np.ndarray:
    """Closed-form W on all of GL_2 for spherical representations and D_kappa.

    Uses W(u a k) = psi(u_12) omega(a_2) W(diag(a_1/a_2, 1) k); spherical W is
    K-invariant, and for D_kappa W(diag(y, 1) R_theta) = exp(-i sgn(y) kappa theta) W(diag(y, 1)).
    """
    _require_rank(rep, 2)
    if not has_full_closed_form(rep):
        raise UnsupportedError(f"no closed form off the torus for {rep}; use the Jacquet integral")
    fld = rep.field
    m = _matrices(fld, g, 2)
    u, a, k = iwasawa(m)
    y = a[..., 0] / a[..., 1]
    a2 = a[..., 1].real
    psi = CONVENTIONS.psi(fld, u[..., 0, 1])
    if rep.is_spherical:
        omega = fld.norm(a2) ** sum(rep.ts)
        return psi * omega * whittaker_gl2_closed(rep, y)
    comp = rep.components[0]
    theta = np.arctan2(k[..., 1, 0].real, k[..., 1, 1].real)
    phase = np.exp(-1j * np.sign(y.real) * comp.kappa * theta)
    return psi * a2 ** (2 * comp.t) * phase * whittaker_gl2_closed(rep, y)


# --- the Jacquet integral ---

def _effective_ts(rep: ReprDescriptor) -> Tuple[complex, ...]:
    out = []
    for comp in rep.components:
        if comp.is_character:
            out.append(comp.t)
        else:
            shift = (comp.kappa - 1) / 2
            out.extend([comp.t + shift, comp.t - shift])
    return tuple(out)


def check_jacquet_region(rep: ReprDescriptor) -> None:
    ts = _effective_ts(rep)
    if not all(a.real > b.real for a, b in zip(ts, ts[1:])):
        raise ConvergenceError(
            f"the Jacquet integral converges absolutely only for Re t_1 > ... > Re t_n; got {ts}"
        )


def whittaker_gl2_jacquet(rep: ReprDescriptor, g, spec: Optional[QuadratureSpec] = None,
                          strict: bool = False) -> QuadratureResult:
    """W(g) = int_F f(w u(x) g) psi(-x) dx for a batch of GL_2 points.

    Each integrand is recentred at the real part (C: the point) where the
    bottom row of w u(x) g is shortest.
    """
    _require_rank(rep, 2)
    check_jacquet_region(rep)
    spec = spec or QuadratureSpec()
    fld = rep.field
    mats = _matrices(fld, g, 2)
    batch_shape = mats.shape[:-2]
    mats = mats.reshape(-1, 2, 2)
    f = InducedNewform(rep)
    row1, row2 = mats[:, 0, :], mats[:, 1, :]
    norm2 = np.sum(np.abs(row2) ** 2, axis=-1)
    x0 = -np.sum(row1 * np.conj(row2), axis=-1) / norm2
    width = np.abs(np.linalg.det(mats)) / norm2
    head = max(2.0, 3.0 * float(np.max(width)))

    def at(x: np.ndarray) -> np.ndarray:
        shape = (row1.shape[0],) + (1,) * (x.ndim - 1) + (2,)
        second = row1.reshape(shape) + x[..., None] * row2.reshape(shape)
        first = np.broadcast_to(row2.reshape(shape), second.shape)
        return f(np.stack([first, second], axis=-2))

    if fld.is_real:
        centre = x0.real

        def integrand(xi):
            return at(centre[:, None] + xi[None, :])

        result = oscillatory_fourier(integrand, TWO_PI, spec, head)
        value = np.exp(-1j * TWO_PI * centre) * result.value
    else:
        b, wb = de_nodes(RealLine(), spec.level)

        def integrand(xi):
            x = x0[:, None, None] + xi[None, :, None] + 1j * b[None, None, :]
            return CONVENTIONS.additive_scale(fld) * (at(x) @ wb)

        result = oscillatory_fourier(integrand, 2 * TWO_PI, spec, head)
        value = np.exp(-2j * TWO_PI * x0.real) * result.value
    if not np.all(np.isfinite(value)) or (strict and not result.converged):
        raise QuadratureError("Jacquet integral did not converge", value=value, error=result.error)
    logger.debug("Jacquet integral for %s: %d points, max error %.3e",
                 rep, value.size, float(np.max(result.error)))
    return QuadratureResult(value.reshape(batch_shape), np.asarray(result.error).reshape(batch_shape),
                            result.converged, result.evaluations, result.level)


# --- propagation ---

def _propagation_data(rep: ReprDescriptor) -> Tuple[complex, ReprDescriptor]:
    """(sigma, pi_0) with W(diag(g,1)) = |det g|^{sigma + (n-1)/2} int W_0(h) ... |det h|^{-sigma - n/2 + 1} dh."""
    fld = rep.field
    first, rest = rep.components[0], rep.components[1:]
    if first.is_character:
        return first.t + abs(first.kappa) / fld.degree, ReprDescriptor(fld, rest)
    star = character(fld, 0, first.t + (first.kappa + 1) / 2)
    return first.t + (first.kappa - 1) / 2, ReprDescriptor(fld, (star,) + rest)


def _gaussian(fld: LocalField, modulus_sq):
    return np.exp(-fld.degree * np.pi * modulus_sq)


def _propagate_rank_two(rep: ReprDescriptor, g: np.ndarray, spec: QuadratureSpec) -> QuadratureResult:
    fld = rep.field
    sigma, inner = _propagation_data(rep)
    poly = zonal_product(inner)
    dim = newform_ktype_dimension(inner)

    def integrand(h):
        h = h[None, ...]
        x = g.reshape(-1)[:, None, None]
        w0 = whittaker_gl1(inner, h)
        phi0 = dim * np.conj(eval_poly(poly, h[..., None])) * _gaussian(fld, np.abs(h) ** 2)
        phi1 = _gaussian(fld, np.abs(x / h) ** 2)
        return w0 * phi1 * phi0 * fld.norm(h) ** (-sigma)

    result = integrate_units(integrand, fld, spec)
    value = fld.norm(g.reshape(-1)) ** (sigma + 0.5) * result.value
    return QuadratureResult(value.reshape(g.shape), np.asarray(result.error).reshape(g.shape),
                            result.converged, result.evaluations, result.level)


@dataclass
class _RankThreeGeometry:
    """Data of g in GL_2 entering the GL_3 propagation integral."""

    norm2: np.ndarray      # |g_2|^2 for the bottom row g_2
    centre: np.ndarray     # <g_1, g_2> / |g_2|^2
    det_sq: np.ndarray     # |det g|^2 (modulus squared)

    @classmethod
    def of(cls, mats: np.ndarray) -> "_RankThreeGeometry":
        g1, g2 = mats[:, 0, :], mats[:, 1, :]
        norm2 = np.sum(np.abs(g2) ** 2, axis=-1)
        centre = np.sum(g1 * np.conj(g2), axis=-1) / norm2
        return cls(norm2, centre, np.abs(np.linalg.det(mats)) ** 2)


def _gaussian_fourier(fld: LocalField, alpha: np.ndarray) -> np.ndarray:
    """int_F psi(u) exp(-alpha |u|^2) du in closed form."""
    if fld.is_real:
        return np.sqrt(np.pi / alpha) * np.exp(-np.pi ** 2 / alpha)
    return (2 * np.pi / alpha) * np.exp(-4 * np.pi ** 2 / alpha)


def _inner_table(inner: ReprDescriptor, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """omega(a_2) W_0(diag(a_1/a_2, 1)) averaged over K_2 against Phi_0, on a radial grid."""
    fld = inner.field
    y = r1[:, None] / r2[None, :]
    table = np.zeros(y.shape, dtype=complex)
    table[:] = whittaker_gl2_closed(inner, y)
    n2 = fld.norm(r2)[None, :]
    if inner.is_spherical:
        return table * n2 ** sum(inner.ts)
    comp = inner.components[0]
    # the K_2 average of the D_kappa phase against Phi_0 leaves |a_2|^kappa
    return table * n2 ** (2 * comp.t) * r2[None, :] ** comp.kappa


def _propagate_rank_three_at(rep: ReprDescriptor, mats: np.ndarray, level: int, budget: int,
                             unipotent=None, radial=None) -> np.ndarray:
    fld = rep.field
    sigma, inner = _propagation_data(rep)
    geo = _RankThreeGeometry.of(mats)
    d = fld.degree
    r, w = de_nodes(HalfLine(0.0), level)
    check_budget(mats.shape[0] * r.size, budget)
    m = r ** 2
    alpha = d * np.pi * geo.norm2[:, None] / m[None, :]
    rows = (_gaussian_fourier(fld, alpha) if unipotent is None else unipotent(alpha)) \
        * _gaussian(fld, geo.det_sq[:, None] / (geo.norm2[:, None] * m[None, :]))
    last_row = _gaussian(fld, m) if radial is None else radial(r)
    cols = _gaussian(fld, geo.norm2[:, None] / m[None, :]) * last_row[None, :]
    live1 = np.max(np.abs(rows), axis=0) > 0
    live2 = np.max(np.abs(cols), axis=0) > 0
    r1, r2 = r[live1], r[live2]
    c = CONVENTIONS.radial_factor(fld)
    w1 = c * w[live1] / r1
    w2 = c * w[live2] / r2
    n1, n2 = fld.norm(r1), fld.norm(r2)
    table = _inner_table(inner, r1, r2)
    table = table * (n2[None, :] / n1[:, None]) * (n1[:, None] * n2[None, :]) ** (-sigma - 0.5)
    table = table * w1[:, None] * w2[None, :]
    return np.sum((rows[:, live1] @ table) * cols[:, live2], axis=-1)


def _propagate_rank_three(rep: ReprDescriptor, g, spec: QuadratureSpec) -> QuadratureResult:
    sigma, inner = _propagation_data(rep)
    if not has_full_closed_form(inner):
        raise UnsupportedError(
            f"GL_3 propagation needs a spherical or discrete-series GL_2 part, got {inner}"
        )
    fld = rep.field
    mats = _matrices(fld, g, 2)
    batch_shape = mats.shape[:-2]
    mats = mats.reshape(-1, 2, 2)
    geo = _RankThreeGeometry.of(mats)
    outer = fld.norm(np.sqrt(geo.det_sq)) ** (sigma + 1) * CONVENTIONS.psi(fld, geo.centre)
    previous, value, error = None, None, np.inf
    converged, level = False, spec.level
    for level in range(spec.level, spec.max_level + 1):
        value = outer * _propagate_rank_three_at(rep, mats, level, spec.budget)
        if previous is not None:
            error = np.abs(value - previous)
            logger.debug("GL_3 propagation level %d: max error %.3e", level, float(np.max(error)))
            if np.all(error <= spec.tolerance * np.abs(value) + spec.abs_tolerance):
                converged = True
                break
        previous = value
    return QuadratureResult(value.reshape(batch_shape), np.asarray(error).reshape(batch_shape) if previous is not None
                            else np.full(batch_shape, np.inf), converged, 0, level)


def whittaker_propagate(rep: ReprDescriptor, g, spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """W(diag(g, 1)) for n in {2, 3} through the propagation formula.

    For n = 2 ``g`` is a (batch of) nonzero field elements; for n = 3 a
    (batch of) 2x2 matrices. A leading discrete series D_kappa is routed
    through pi_0^* = |.|^{t + (kappa + 1)/2} + (remaining components).
    """
    _require_rank(rep, 2, 3)
    spec = spec or QuadratureSpec()
    if rep.n == 2:
        g = np.asarray(g.entries if isinstance(g, TorusPoint) else g, dtype=complex)
        if np.any(g == 0):
            raise DomainError("propagation is evaluated at nonzero g")
        return _propagate_rank_two(rep, g, spec)
    return _propagate_rank_three(rep, g, spec)


# --- the dual propagation formula for spherical representations ---

def _hermite_sum(freq: np.ndarray, x: np.ndarray, wt: np.ndarray) -> np.ndarray:
    return np.exp(1j * freq[:, None] * x[None, :]) @ wt


def _numeric_fourier(fld: LocalField, c: np.ndarray, points: int) -> np.ndarray:
    """int_F exp(-d pi |w|^2) psi(c w) dw by Gauss-Hermite; 0 once the exact value drops below exp(-40).

    Over C, psi(c w) splits over the real and imaginary parts of w, so the
    rule is a product of two one-dimensional sums.
    """
    c = np.asarray(c, dtype=complex)
    live = fld.degree * np.pi * np.abs(c) ** 2 < HERMITE_CUTOFF
    out = np.zeros(c.shape, dtype=complex)
    points = max(points, HERMITE_POINTS)
    if fld.is_real:
        x, wt = gauss_hermite_rule(points, np.pi)
        out[live] = _hermite_sum(TWO_PI * c[live].real, x, wt)
        return out
    y, wt = gauss_hermite_rule(points, 2 * np.pi)
    cl = c[live]
    out[live] = 2 * _hermite_sum(4 * np.pi * cl.real, y, wt) * _hermite_sum(-4 * np.pi * cl.imag, y, wt)
    return out


def _numeric_unipotent(fld: LocalField, alpha: np.ndarray, points: int) -> np.ndarray:
    """int_F psi(-u) exp(-alpha |u|^2) du by Gauss-Hermite; 0 once the exact value drops below exp(-40)."""
    out = np.zeros(alpha.shape, dtype=complex)
    live = (np.pi ** 2 * fld.degree ** 2 / alpha) < HERMITE_CUTOFF
    a = alpha[live]
    x, wt = gauss_hermite_rule(max(points, HERMITE_POINTS), 1.0)
    if fld.is_real:
        out[live] = _hermite_sum(-TWO_PI / np.sqrt(a), x, wt) / np.sqrt(a)
        return out
    # the imaginary direction carries no phase and integrates to sqrt(pi)
    out[live] = 2 * np.sqrt(np.pi) * _hermite_sum(-4 * np.pi / np.sqrt(a), x, wt) / a
    return out


def whittaker_propagate_dual(sph: ReprDescriptor, g, spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """W'(diag(g, 1)) in the psi-bar Whittaker model of a spherical representation.

    The v- and u-integrals are done numerically by Gauss-Hermite and the radial
    integrals one level finer than ``spec``, so this serves as an independent
    check of ``whittaker_propagate`` on torus points, where both agree.
    """
    _require_rank(sph, 2, 3)
    if not sph.is_spherical:
        raise UnsupportedError("the dual propagation formula is implemented for spherical representations")
    spec = (spec or QuadratureSpec()).refined()
    fld = sph.field
    t1 = sph.ts[0]
    inner = ReprDescriptor(fld, sph.components[1:])
    if sph.n == 2:
        g = np.asarray(g.entries if isinstance(g, TorusPoint) else g, dtype=complex)

        def integrand(h):
            x = g.reshape(-1)[:, None, None]
            hh = h[None, ...]
            fourier = _numeric_fourier(fld, hh * np.ones(x.shape), spec.points)
            return (fld.norm(hh) ** (inner.ts[0] - t1) * _gaussian(fld, np.abs(x / hh) ** 2) * fourier)

        result = integrate_units(integrand, fld, spec)
        value = fld.norm(g.reshape(-1)) ** (t1 + 0.5) * result.value
        return QuadratureResult(value.reshape(g.shape), np.asarray(result.error).reshape(g.shape),
                                result.converged, result.evaluations, result.level)
    mats = _matrices(fld, g, 2)
    batch_shape = mats.shape[:-2]
    mats = mats.reshape(-1, 2, 2)
    geo = _RankThreeGeometry.of(mats)
    rep = ReprDescriptor(fld, (character(fld, 0, t1),) + inner.components)
    outer = fld.norm(np.sqrt(geo.det_sq)) ** (t1 + 1) * CONVENTIONS.psi_bar(fld, geo.centre)

    def unipotent(alpha):
        return _numeric_unipotent(fld, alpha.ravel(), spec.points).reshape(alpha.shape)

    def last_row(r):
        # the v-integral, by quadrature instead of exp(-d pi |a_2|^2)
        return _numeric_fourier(fld, r, spec.points)

    values = []
    for level in (spec.level - 1, spec.level):
        values.append(outer * _propagate_rank_three_at(rep, mats, level, spec.budget, unipotent, last_row))
    error = np.abs(values[1] - values[0])
    converged = bool(np.all(error <= spec.tolerance * np.abs(values[1]) + spec.abs_tolerance))
    return QuadratureResult(values[1].reshape(batch_shape), error.reshape(batch_shape), converged, 0, spec.level)


# --- convolution sections ---

def pieri_region(rep: ReprDescriptor, s: complex) -> None:
    s = complex(s)
    for comp in rep.components:
        bound = -comp.t.real if comp.is_character else -comp.t.real + (comp.kappa - 1) / 2
        if not s.real > bound:
            raise ConvergenceError(f"the convolution integral needs Re s > {bound} for {comp}; got s = {s}")


def _schwartz_rank_one(rep: ReprDescriptor, x: np.ndarray) -> np.ndarray:
    fld = rep.field
    poly = zonal_product(rep)
    return np.conj(eval_poly(poly, x[..., None])) * _gaussian(fld, np.abs(x) ** 2)


def pieri_integral(rep: ReprDescriptor, s: complex, h=None,
                   spec: Optional[QuadratureSpec] = None) -> Tuple[QuadratureResult, complex]:
    """(int W(hg) Phi(g) |det g|^{s + (n-1)/2} dg, L(s, pi) W(h)) for n in {1, 2}."""
    _require_rank(rep, 1, 2)
    pieri_region(rep, s)
    spec = spec or QuadratureSpec()
    s = complex(s)
    fld = rep.field
    if rep.n == 1:
        h = complex(1.0 if h is None else np.asarray(h.entries[0] if isinstance(h, TorusPoint) else h))

        def integrand(x):
            return whittaker_gl1(rep, h * x) * _schwartz_rank_one(rep, x) * fld.norm(x) ** s

        result = integrate_units(integrand, fld, spec)
        return result, complex(l_factor(rep, s)) * complex(whittaker_gl1(rep, h))
    if not fld.is_real:
        raise UnsupportedError("the GL_2(C) convolution integral has 8 real dimensions; not supported")
    if not has_full_closed_form(rep):
        raise UnsupportedError(f"the GL_2 convolution integral needs a closed-form W off the torus; got {rep}")
    hm = np.eye(2, dtype=complex) if h is None else _matrices(fld, h, 2)
    fine = _pieri_rank_two(rep, s, hm, spec.level, spec)
    coarse = _pieri_rank_two(rep, s, hm, spec.level - 1, spec)
    rhs = complex(l_factor(rep, s)) * complex(whittaker_gl2_full(rep, hm))
    error = abs(fine - coarse)
    converged = error <= spec.tolerance * abs(fine) + spec.abs_tolerance
    return QuadratureResult(fine, error, converged, 0, spec.level), rhs


def pieri_residual(rep: ReprDescriptor, s: complex, h=None, spec: Optional[QuadratureSpec] = None) -> ResidualEstimate:
    """|int W(hg) Phi(g) |det g|^{s + (n-1)/2} dg - L(s, pi) W(h)| with its quadrature error."""
    lhs, rhs = pieri_integral(rep, s, h, spec)
    return ResidualEstimate(float(abs(lhs.value - rhs)), float(lhs.error), "radial" if rep.n == 1 else "tensor")


def _pieri_rank_two(rep: ReprDescriptor, s: complex, hm: np.ndarray, level: int, spec: QuadratureSpec) -> complex:
    fld = rep.field
    poly = zonal_product(rep)
    dim = newform_ktype_dimension(rep)
    degree = poly.total_degree
    r, w = de_nodes(HalfLine(0.0), level)
    live = np.pi / r ** 2 < NEGLIGIBLE_EXPONENT
    signs = np.array([1.0, -1.0])
    a1 = (r[:, None] * signs[None, :]).ravel()
    a1w = np.repeat(w / r, 2)
    a2 = (r[live][:, None] * signs[None, :]).ravel()
    a2w = np.repeat(w[live] / r[live], 2)
    gh, ghw = gauss_hermite_rule(spec.points // 2, 1.0)
    ks, kw = exact_group_rule(GroupKind.ORTHOGONAL, 2, 2 * degree + 1)
    check_budget(a1.size * a2.size * gh.size * kw.size, spec.budget)
    total = 0j
    for j in range(a2.size):
        b = a2[j]
        # Gauss-Hermite for the Gaussian exp(-pi a_2^2 u^2)
        scale = 1.0 / (np.sqrt(np.pi) * abs(b))
        u = gh * scale
        uw = ghw * scale
        A1, U, K = np.meshgrid(np.arange(a1.size), np.arange(u.size), np.arange(kw.size), indexing="ij")
        x = a1[A1]
        g = np.zeros(A1.shape + (2, 2), dtype=complex)
        g[..., 0, 0] = x
        g[..., 0, 1] = u[U] * b
        g[..., 1, 1] = b
        g = g @ ks[K]
        values = whittaker_gl2_full(rep, hm @ g)
        phi = dim * np.conj(eval_poly(poly, g[..., 1, :])) * np.exp(-np.pi * (x ** 2 + b ** 2))
        det = np.abs(x * b) ** (s + 0.5)
        weight = a1w[A1] * uw[U] * kw[K] * abs(b / x)
        total += np.sum(values * phi * det * weight) * a2w[j]
    return total
