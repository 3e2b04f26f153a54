"""Rankin-Selberg and Godement-Jacquet zeta integrals of newforms, and the verification suite.

Every integral returns a ``QuadratureResult`` so that callers see the
quadrature error next to the value; the L-factor it should equal comes from
``newform_utils.special``.
"""
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Optional, Sequence

import numpy as np

from newform_utils.branching import binom_identity, oldform_dim_bruteforce, spherical_ktypes
from newform_utils.conventions import CONVENTIONS
from newform_utils.errors import ConvergenceError, DomainError, NewformError, UnsupportedError
from newform_utils.harmonics import (
    ResidualEstimate,
    eval_poly,
    exact_group_rule,
    gauss_hermite_rule,
    harmonic_basis,
    hecke_residual,
    reproducing_residual,
    zonal_product,
)
from newform_utils.invariants import conductor_exponent, epsilon_factor, newform_ktype_dimension, oldform_dim
from newform_utils.profile_manager import CheckConfig, CliConfig
from newform_utils.quadrature import (
    HalfLine,
    Interval,
    QuadratureResult,
    QuadratureSpec,
    check_budget,
    de_nodes,
    integrate_units,
)
from newform_utils.repcore import (
    GroupKind,
    ReprDescriptor,
    contragredient,
    field_from_symbol,
    format_complex,
    format_descriptor,
    parse_complex,
    parse_descriptor,
)
from newform_utils.special import l_factor, rs_l_factor
from newform_utils.whittaker import (
    central_character,
    check_jacquet_region,
    has_full_closed_form,
    pieri_integral,
    whittaker_gl1,
    whittaker_gl2_closed,
    whittaker_gl2_full,
    whittaker_gl2_jacquet,
    whittaker_propagate,
    whittaker_propagate_dual,
)

logger = logging.getLogger(__name__)

WORKERS = int(os.getenv("NEWFORM_WORKERS", "4"))
# window in y for Jacquet-based integrands; outside it the integrand is below 1e-6 of the total
JACQUET_WINDOW = (1e-4, 20.0)


# --- helpers ---

def _require(rep: ReprDescriptor, n: int, role: str = "representation") -> None:
    if rep.n != n:
        raise DomainError(f"{role} must be a representation of GL_{n}, got GL_{rep.n}")


def _same_field(rep: ReprDescriptor, sph: ReprDescriptor) -> None:
    if rep.field != sph.field:
        raise DomainError("both representations must live over the same field")
    if not sph.is_spherical:
        raise UnsupportedError("the second representation must be spherical")


def l_shifts(rep: ReprDescriptor) -> List[complex]:
    """Shifts a_j with L(s, pi) = prod zeta(s + a_j); the integrals converge for Re(s + a_j) > 0."""
    fld = rep.field
    out = []
    for comp in rep.components:
        if comp.is_character:
            out.append(comp.t + abs(comp.kappa) / fld.degree)
        else:
            out.append(comp.t + (comp.kappa - 1) / 2)
    return out


def check_region(rep: ReprDescriptor, s: complex, shifts: Sequence[complex] = (0j,), what: str = "integral") -> None:
    for a in l_shifts(rep):
        for b in shifts:
            if not (s + a + b).real > 0:
                raise ConvergenceError(
                    f"the {what} converges for Re(s + a_j) > 0; s = {format_complex(s)} "
                    f"gives {format_complex(s + a + b)}"
                )


def _schwartz(rep: ReprDescriptor, x: np.ndarray, conjugate_point: bool = False) -> np.ndarray:
    """Phi(x) = conj(P(x)) exp(-d pi |x|^2) for GL_1; ``conjugate_point`` gives the contragredient datum."""
    poly = zonal_product(rep)
    point = np.conj(x) if conjugate_point else x
    return np.conj(eval_poly(poly, point[..., None])) * np.exp(-rep.field.degree * np.pi * np.abs(x) ** 2)


def _coarse_error(values: np.ndarray, weights: np.ndarray, axes: Sequence[int]) -> float:
    """|fine - coarse| where coarse drops every other node along ``axes`` and doubles the weights."""
    fine = np.sum(values * weights)
    index = tuple(slice(None, None, 2) if ax in axes else slice(None) for ax in range(values.ndim))
    coarse = np.sum(values[index] * weights[index]) * 2 ** len(axes)
    return float(abs(fine - coarse))


# --- GL_1 ---

def tate_integral(rep: ReprDescriptor, sph: ReprDescriptor, s: complex,
                  spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """int_{F^x} W(x) W'(x) Phi(x) |x|^s d^x x for GL_1 x GL_1; equals L(s, pi x pi')."""
    _require(rep, 1)
    _require(sph, 1, "second representation")
    _same_field(rep, sph)
    s = complex(s)
    t_prime = sph.ts[0]
    check_region(rep, s, (t_prime,), "Tate integral")
    fld = rep.field

    def integrand(x):
        return whittaker_gl1(rep, x) * fld.norm(x) ** (t_prime + s) * _schwartz(rep, x)

    return integrate_units(integrand, fld, spec)


def gj_integral(rep: ReprDescriptor, s: complex, spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """Z(s, beta, Phi) = int beta(x) Phi(x) |x|^s d^x x with beta(x) = chi^kappa(x)|x|^t."""
    _require(rep, 1)
    s = complex(s)
    check_region(rep, s, what="Godement-Jacquet integral")
    fld = rep.field

    def integrand(x):
        return whittaker_gl1(rep, x) * _schwartz(rep, x) * fld.norm(x) ** s

    return integrate_units(integrand, fld, spec)


def contragredient_gj_integral(rep: ReprDescriptor, s: complex,
                               spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """Z(s, beta~, Phi~) with beta~(x) = beta(x^-1) and Phi~(x) = conj(P(conj x)) exp(-d pi |x|^2); equals L(s, pi~)."""
    _require(rep, 1)
    s = complex(s)
    dual = contragredient(rep)
    check_region(dual, s, what="Godement-Jacquet integral")
    fld = rep.field

    def integrand(x):
        return whittaker_gl1(rep, 1.0 / x) * _schwartz(rep, x, conjugate_point=True) * fld.norm(x) ** s

    return integrate_units(integrand, fld, spec)


def _fourier_pairs(rep: ReprDescriptor, ys: np.ndarray, points: int):
    fld = rep.field
    poly = zonal_product(rep)
    if fld.is_real:
        x, wt = gauss_hermite_rule(points, np.pi)
        values = np.conj(eval_poly(poly, x[:, None])) * wt
        return np.exp(-2j * np.pi * ys.real[:, None] * x[None, :]) @ values
    y, wt = gauss_hermite_rule(points, 2 * np.pi)
    z = (y[:, None] + 1j * y[None, :]).ravel()
    values = np.conj(eval_poly(poly, z[:, None])) * np.outer(wt, wt).ravel()
    return CONVENTIONS.additive_scale(fld) * (np.exp(-4j * np.pi * (ys[:, None] * z[None, :]).real) @ values)


def epsilon_fourier_values(rep: ReprDescriptor, ys, spec: Optional[QuadratureSpec] = None):
    """(Phi~(y), i^{c} Phi^(y), error) with Phi^(y) = int Phi(x) psi(-xy) dx by Gauss-Hermite."""
    _require(rep, 1)
    spec = spec or QuadratureSpec()
    ys = np.atleast_1d(np.asarray(ys, dtype=complex))
    if rep.field.is_real and np.any(ys.imag != 0):
        raise DomainError("Fourier points over R must be real")
    scale = 1j ** conductor_exponent(rep)
    fine = scale * _fourier_pairs(rep, ys, 2 * spec.points)
    coarse = scale * _fourier_pairs(rep, ys, spec.points)
    return _schwartz(rep, ys, conjugate_point=True), fine, np.abs(fine - coarse)


def epsilon_fourier_residual(rep: ReprDescriptor, points, spec: Optional[QuadratureSpec] = None) -> ResidualEstimate:
    lhs, rhs, err = epsilon_fourier_values(rep, points, spec)
    return ResidualEstimate(float(np.max(np.abs(lhs - rhs))), float(np.max(err)), "gauss-hermite")


# --- GL_2 x GL_1 ---

def rs_21(rep: ReprDescriptor, sph: ReprDescriptor, s: complex,
          spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """int_{F^x} W(diag(g, 1)) W'(g) |g|^{s - 1/2} d^x g; equals L(s, pi x pi')."""
    _require(rep, 2)
    _require(sph, 1, "second representation")
    _same_field(rep, sph)
    s = complex(s)
    check_region(rep, s, sph.ts, "GL_2 x GL_1 integral")
    fld = rep.field

    def integrand(x):
        return whittaker_gl2_closed(rep, x) * whittaker_gl1(sph, x) * fld.norm(x) ** (s - 0.5)

    return integrate_units(integrand, fld, spec)


# --- GL_2 x GL_2 ---

def _central_integral(rep: ReprDescriptor, sph: ReprDescriptor, s: complex, degree: int,
                      spec: QuadratureSpec) -> QuadratureResult:
    fld = rep.field

    def integrand(x):
        return (central_character(rep, x) * central_character(sph, x) * x ** degree
                * fld.norm(x) ** (2 * s) * np.exp(-fld.degree * np.pi * np.abs(x) ** 2))

    return integrate_units(integrand, fld, spec)


def _radial_nodes(jacquet: bool, level: int):
    if not jacquet:
        r, w = de_nodes(HalfLine(0.0), level)
        return r, w / r
    tau, w = de_nodes(Interval(*np.log(JACQUET_WINDOW)), level)
    return np.exp(tau), w


def rs_22(rep: ReprDescriptor, sph: ReprDescriptor, s: complex,
          spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """Psi(s, W, W', Phi) over N_2 \\ GL_2(R) = A_2 x K_2; equals L(s, pi x pi').

    The central variable separates: a = a_2 diag(y, 1) turns the integral into
    (int over a_2 with the central characters) x (int over y and K_2).
    Off-torus values of W come from the closed form when available and from
    the Jacquet integral otherwise.
    """
    _require(rep, 2)
    _require(sph, 2, "second representation")
    _same_field(rep, sph)
    if not rep.field.is_real:
        raise UnsupportedError("GL_2(C) x GL_2(C) has 8 real dimensions; not supported")
    s = complex(s)
    check_region(rep, s, sph.ts, "GL_2 x GL_2 integral")
    spec = spec or QuadratureSpec()
    fld = rep.field
    poly = zonal_product(rep)
    degree = poly.total_degree
    dim = newform_ktype_dimension(rep)
    closed = has_full_closed_form(rep)
    if not closed:
        check_jacquet_region(rep)

    central = _central_integral(rep, sph, s, degree, spec)
    r, wr = _radial_nodes(not closed, spec.level)
    y = np.concatenate([r, -r])
    wy = np.concatenate([wr, wr])
    ks, kw = exact_group_rule(GroupKind.ORTHOGONAL, 2, 2 * degree + 1)
    check_budget(y.size * kw.size, spec.budget)
    g = np.zeros((y.size, kw.size, 2, 2), dtype=complex)
    g[..., 0, 0] = y[:, None]
    g[..., 1, 1] = 1.0
    g = g @ ks[None, :, :, :]
    if closed:
        w_values = whittaker_gl2_full(rep, g)
        w_error = 0.0
    else:
        jac = whittaker_gl2_jacquet(rep, g, spec)
        w_values, w_error = jac.value, float(np.max(jac.error))
    dual = whittaker_gl2_closed(sph, y)[:, None]
    phi = dim * np.conj(eval_poly(poly, ks[:, 1, :]))[None, :]
    kernel = dual * phi * np.abs(y[:, None]) ** (s - 1)
    values = w_values * kernel
    weights = wy[:, None] * kw[None, :]
    inner = np.sum(values * weights)
    # the +/- halves each carry every other node of the coarse rule
    half = r.size
    inner_error = _coarse_error(values[:half], weights[:half], (0,)) + _coarse_error(values[half:], weights[half:], (0,))
    inner_error += w_error * float(np.sum(np.abs(kernel) * weights))
    value = central.value * inner
    error = abs(central.value) * inner_error + float(central.error) * abs(inner)
    logger.debug("rs_22 %s x %s at s=%s: %s (+- %.2e)", rep, sph, s, value, error)
    return QuadratureResult(value, error, bool(error <= spec.tolerance * abs(value) + spec.abs_tolerance),
                            central.evaluations + values.size, spec.level)


# --- GL_3 x GL_2 ---

def split_first(rep: ReprDescriptor):
    """(pi_1, pi_0) for rep = pi_1 + pi_0 with a leading character and a spherical GL_2 part."""
    _require(rep, 3)
    first = rep.components[0]
    rest = ReprDescriptor(rep.field, rep.components[1:])
    if not first.is_character or not rest.is_spherical:
        raise UnsupportedError(
            f"GL_3 x GL_2 integrals need a leading character followed by a spherical GL_2 part, got {rep}"
        )
    return ReprDescriptor(rep.field, (first,)), rest


def rs_32(rep: ReprDescriptor, sph: ReprDescriptor, s: complex, spec: Optional[QuadratureSpec] = None,
          path: Literal["reduction", "direct"] = "reduction") -> QuadratureResult:
    """Psi(s, W, W') for GL_3 x GL_2; equals L(s, pi x pi').

    ``reduction`` evaluates Psi(s, W_0, W', Phi_0) L(s, pi_1 x pi') through
    ``rs_22``; ``direct`` integrates propagated GL_3 values against W' over
    the torus of GL_2 (K_2-invariance of both factors removes the K_2 variable).
    """
    pi1, pi0 = split_first(rep)
    _require(sph, 2, "second representation")
    _same_field(rep, sph)
    s = complex(s)
    check_region(rep, s, sph.ts, "GL_3 x GL_2 integral")
    spec = spec or QuadratureSpec()
    if path == "reduction":
        inner = rs_22(pi0, sph, s, spec)
        factor = complex(rs_l_factor(pi1, sph, s))
        return QuadratureResult(inner.value * factor, inner.error * abs(factor), inner.converged,
                                inner.evaluations, inner.level)
    if path != "direct":
        raise DomainError(f"unknown path {path!r}; expected 'reduction' or 'direct'")
    return _rs_32_direct(rep, sph, s, spec)


def _rs_32_direct(rep: ReprDescriptor, sph: ReprDescriptor, s: complex, spec: QuadratureSpec) -> QuadratureResult:
    fld = rep.field
    r, w = de_nodes(HalfLine(0.0), spec.level)
    check_budget(r.size ** 2, spec.budget)
    c = CONVENTIONS.radial_factor(fld)
    a1, a2 = np.meshgrid(r, r, indexing="ij")
    mats = np.zeros(a1.shape + (2, 2), dtype=complex)
    mats[..., 0, 0] = a1
    mats[..., 1, 1] = a2
    inner_spec = spec.with_(max_level=min(spec.max_level, spec.level + 2))
    propagated = whittaker_propagate(rep, mats, inner_spec)
    dual = central_character(sph, a2) * whittaker_gl2_closed(sph, a1 / a2)
    n1, n2 = fld.norm(a1), fld.norm(a2)
    values = propagated.value * dual * (n2 / n1) * (n1 * n2) ** (s - 0.5)
    weights = c ** 2 * np.outer(w / r, w / r)
    value = complex(np.sum(values * weights))
    error = _coarse_error(values, weights, (0, 1)) + float(np.sum(np.abs(propagated.error * dual) * weights))
    logger.debug("rs_32 direct %s x %s at s=%s: %s (+- %.2e)", rep, sph, s, value, error)
    return QuadratureResult(value, error, propagated.converged, values.size, spec.level)


# --- reports ---

@dataclass
class ReportPoint:
    s: Optional[complex]
    at: Optional[str]
    lhs: complex
    rhs: complex
    abs_residual: float
    quad_err: float

    @classmethod
    def of(cls, lhs, rhs, quad_err=0.0, s=None, at=None) -> "ReportPoint":
        lhs, rhs = complex(lhs), complex(rhs)
        return cls(s, at, lhs, rhs, float(abs(lhs - rhs)), float(quad_err))

    def residual(self, relative: bool) -> float:
        if relative and self.rhs != 0:
            return self.abs_residual / abs(self.rhs)
        return self.abs_residual

    def allowance(self, tolerance: float, relative: bool) -> float:
        if relative and self.rhs != 0:
            return tolerance + self.quad_err / abs(self.rhs)
        return tolerance + self.quad_err

    def to_dict(self) -> Dict[str, object]:
        return {
            "s": None if self.s is None else format_complex(self.s),
            "at": self.at,
            "lhs": format_complex(self.lhs),
            "rhs": format_complex(self.rhs),
            "abs_residual": self.abs_residual,
            "quad_err": self.quad_err,
        }


@dataclass
class VerificationReport:
    identity: str
    label: str
    descriptor: List[str]
    tolerance: float
    relative: bool
    points: List[ReportPoint] = field(default_factory=list)
    verdict: str = "pass"
    message: str = ""
    seconds: float = 0.0

    def decide(self) -> None:
        if self.verdict == "error":
            return
        ok = all(p.residual(self.relative) <= p.allowance(self.tolerance, self.relative) for p in self.points)
        self.verdict = "pass" if ok else "fail"

    @property
    def max_residual(self) -> float:
        return max((p.residual(self.relative) for p in self.points), default=0.0)

    def to_dict(self, timing: bool = True) -> Dict[str, object]:
        out = {
            "identity": self.identity,
            "label": self.label,
            "descriptor": self.descriptor,
            "points": [p.to_dict() for p in self.points],
            "tolerance": self.tolerance,
            "relative": self.relative,
            "verdict": self.verdict,
            "message": self.message,
        }
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


# --- checks ---

CheckRunner = Callable[[CheckConfig, QuadratureSpec], List[ReportPoint]]


def _rep(check: CheckConfig) -> ReprDescriptor:
    if not check.descriptor:
        raise DomainError(f"check {check.name!r} needs a descriptor")
    return parse_descriptor(check.descriptor)


def _twist(check: CheckConfig) -> ReprDescriptor:
    if not check.twist:
        raise DomainError(f"check {check.name!r} needs a twist descriptor")
    return parse_descriptor(check.twist)


def _s_grid(check: CheckConfig) -> List[complex]:
    return [parse_complex(s) for s in check.s_grid]


def _scalar_points(check: CheckConfig) -> List[complex]:
    return [parse_complex(p[0]) for p in check.points]


def _over_s(check: CheckConfig, spec: QuadratureSpec, lhs_fn, rhs_fn) -> List[ReportPoint]:
    out = []
    for s in _s_grid(check):
        lhs = lhs_fn(s, spec)
        out.append(ReportPoint.of(lhs.value, rhs_fn(s), lhs.error, s=s))
    return out


def _check_tate(check, spec):
    rep, sph = _rep(check), _twist(check)
    return _over_s(check, spec, lambda s, sp: tate_integral(rep, sph, s, sp), lambda s: rs_l_factor(rep, sph, s))


def _check_gj(check, spec):
    rep = _rep(check)
    return _over_s(check, spec, lambda s, sp: gj_integral(rep, s, sp), lambda s: l_factor(rep, s))


def _check_gj_contragredient(check, spec):
    rep = _rep(check)
    dual = contragredient(rep)
    return _over_s(check, spec, lambda s, sp: contragredient_gj_integral(rep, s, sp), lambda s: l_factor(dual, s))


def _check_rs_21(check, spec):
    rep, sph = _rep(check), _twist(check)
    return _over_s(check, spec, lambda s, sp: rs_21(rep, sph, s, sp), lambda s: rs_l_factor(rep, sph, s))


def _check_rs_22(check, spec):
    rep, sph = _rep(check), _twist(check)
    return _over_s(check, spec, lambda s, sp: rs_22(rep, sph, s, sp), lambda s: rs_l_factor(rep, sph, s))


def _check_rs_32(check, spec):
    rep, sph = _rep(check), _twist(check)
    return _over_s(check, spec, lambda s, sp: rs_32(rep, sph, s, sp), lambda s: rs_l_factor(rep, sph, s))


def _check_rs_32_direct(check, spec):
    rep, sph = _rep(check), _twist(check)
    out = []
    for s in _s_grid(check):
        direct = rs_32(rep, sph, s, spec, path="direct")
        reduced = rs_32(rep, sph, s, spec, path="reduction")
        out.append(ReportPoint.of(direct.value, reduced.value, direct.error + reduced.error, s=s))
    return out


def _check_pieri(check, spec):
    rep = _rep(check)
    out = []
    for s in _s_grid(check):
        lhs, rhs = pieri_integral(rep, s, None, spec)
        out.append(ReportPoint.of(lhs.value, rhs, lhs.error, s=s))
    return out


def _harmonic_setup(check: CheckConfig):
    params = check.params
    fld = field_from_symbol(str(params.get("field", "R")))
    n = int(params.get("n", 2))
    degrees = [int(d) for d in params.get("degrees", [1])]
    return fld, n, degrees


def _vector(fld, coords: Sequence[str]) -> np.ndarray:
    v = np.array([parse_complex(c) for c in coords], dtype=complex)
    if fld.is_real and np.any(v.imag != 0):
        raise DomainError("points of R^n must be real")
    return v


def _check_hecke(check, spec):
    fld, n, degrees = _harmonic_setup(check)
    out = []
    for idx, P in enumerate(harmonic_basis(fld, n, degrees)):
        for coords in check.points:
            est = hecke_residual(fld, n, P, _vector(fld, coords), spec.points)
            out.append(ReportPoint.of(est.residual, 0.0, est.error, at=f"basis[{idx}] @ ({', '.join(coords)})"))
    return out


def _check_reproducing(check, spec):
    fld, n, degrees = _harmonic_setup(check)
    rng = np.random.default_rng(spec.seed)
    out = []
    for idx, P in enumerate(harmonic_basis(fld, n, degrees)):
        for coords in check.points:
            est = reproducing_residual(fld, n, degrees, P, _vector(fld, coords), rng=rng, samples=spec.samples)
            # Monte Carlo estimates are held to three standard errors
            out.append(ReportPoint.of(est.residual, 0.0, 3.0 * est.error,
                                      at=f"basis[{idx}] @ ({', '.join(coords)}) [{est.method}]"))
    return out


def _check_whittaker_oracle(check, spec):
    rep = _rep(check)
    ys = np.array(_scalar_points(check), dtype=complex)
    g = np.zeros(ys.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = ys
    g[..., 1, 1] = 1.0
    jac = whittaker_gl2_jacquet(rep, g, spec)
    closed = whittaker_gl2_closed(rep, ys)
    return [ReportPoint.of(jac.value[i], closed[i], jac.error[i], at=format_complex(y)) for i, y in enumerate(ys)]


def _check_propagation(check, spec):
    rep = _rep(check)
    ys = np.array(_scalar_points(check), dtype=complex)
    if rep.n == 2:
        prop = whittaker_propagate(rep, ys, spec)
        closed = whittaker_gl2_closed(rep, ys)
        return [ReportPoint.of(prop.value[i], closed[i], prop.error[i], at=format_complex(y)) for i, y in enumerate(ys)]
    g = np.zeros(ys.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = ys
    g[..., 1, 1] = 1.0
    prop = whittaker_propagate(rep, g, spec)
    dual = whittaker_propagate_dual(rep, g, spec)
    return [ReportPoint.of(prop.value[i], dual.value[i], prop.error[i] + dual.error[i], at=format_complex(y))
            for i, y in enumerate(ys)]


def _check_epsilon_fourier(check, spec):
    rep = _rep(check)
    ys = _scalar_points(check)
    lhs, rhs, err = epsilon_fourier_values(rep, ys, spec)
    out = [ReportPoint.of(lhs[i], rhs[i], err[i], at=format_complex(y)) for i, y in enumerate(ys)]
    eps = epsilon_factor(rep)
    out.append(ReportPoint.of(eps.value, 1j ** (-conductor_exponent(rep)), at="epsilon"))
    return out


def _check_oldform(check, spec):
    rep = _rep(check)
    c = conductor_exponent(rep)
    extra = int(check.params.get("extra", 8))
    return [ReportPoint.of(oldform_dim(rep, m), oldform_dim_bruteforce(rep, m), at=f"m={m}")
            for m in range(c + extra + 1)]


def _check_multiplicity_one(check, spec):
    rep = _rep(check)
    c = conductor_exponent(rep)
    out = []
    for m in range(c + 1):
        found = sum(mult for _, mult in spherical_ktypes(rep, m))
        out.append(ReportPoint.of(found, 1 if m == c else 0, at=f"degree={m}"))
    return out


def _check_binom(check, spec):
    top = int(check.params.get("max", 25))
    misses = sum(1 for k in range(top + 1) for m in range(top + 1) for n in range(top + 1)
                 if binom_identity(k, m, n)[0] != binom_identity(k, m, n)[1])
    return [ReportPoint.of(misses, 0, at=f"k, m, n <= {top}")]


CHECKS: Dict[str, CheckRunner] = {
    "tate": _check_tate,
    "gj": _check_gj,
    "gj_contragredient": _check_gj_contragredient,
    "rs_21": _check_rs_21,
    "rs_22": _check_rs_22,
    "rs_32": _check_rs_32,
    "rs_32_direct": _check_rs_32_direct,
    "pieri": _check_pieri,
    "hecke": _check_hecke,
    "reproducing": _check_reproducing,
    "whittaker_oracle": _check_whittaker_oracle,
    "propagation": _check_propagation,
    "epsilon_fourier": _check_epsilon_fourier,
    "oldform": _check_oldform,
    "multiplicity_one": _check_multiplicity_one,
    "binom": _check_binom,
}


def run_check(check: CheckConfig, config: CliConfig) -> VerificationReport:
    descriptors = [d for d in (check.descriptor, check.twist) if d]
    try:
        descriptors = [format_descriptor(parse_descriptor(d)) for d in descriptors]
    except NewformError:
        pass
    report = VerificationReport(
        identity=check.identity,
        label=check.name,
        descriptor=descriptors,
        tolerance=config.tolerance_for(check),
        relative=check.relative,
    )
    start = time.perf_counter()
    try:
        report.points = CHECKS[check.identity](check, config.spec_for(check))
        report.decide()
    except NewformError as exc:
        report.verdict = "error"
        report.message = f"{type(exc).__name__}: {exc}"
        logger.warning("check %s failed with %s", check.name, report.message)
    except Exception as exc:
        report.verdict = "error"
        report.message = f"{type(exc).__name__}: {exc}"
        logger.exception("check %s raised unexpectedly", check.name)
    report.seconds = time.perf_counter() - start
    logger.debug("check %s: %s (max residual %.3e, %.2fs)", check.name, report.verdict,
                 report.max_residual, report.seconds)
    return report


def verify_suite(config: CliConfig, workers: Optional[int] = None) -> List[VerificationReport]:
    """Run every configured check; reports come back in configured order."""
    if not config.checks:
        return []
    workers = workers or config.workers or WORKERS
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda check: run_check(check, config), config.checks))
