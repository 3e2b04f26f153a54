"""Complex Gamma, local zeta functions, K-Bessel and archimedean L-factors."""
import logging

import numpy as np

from newform_utils.conventions import CONVENTIONS, HaarConventions
from newform_utils.errors import DomainError, PoleError, UnsupportedError
from newform_utils.quadrature import QuadratureSpec, integrate
from newform_utils.repcore import COMPLEX, LocalField, ReprDescriptor, SquareIntegrableRep

__all__ = [
    "CONVENTIONS",
    "HaarConventions",
    "QuadratureSpec",
    "integrate",
    "gamma_complex",
    "zeta_F",
    "component_l_factor",
    "l_factor",
    "rs_l_factor",
    "bessel_k",
]

logger = logging.getLogger(__name__)

LANCZOS_G = 7.0
LANCZOS_COEFFICIENTS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
SQRT_TWO_PI = np.sqrt(2.0 * np.pi)


def _check_poles(z: np.ndarray) -> None:
    near = np.abs(z - np.round(z.real)) < 1e-14
    poles = near & (np.round(z.real) <= 0)
    if np.any(poles):
        raise PoleError(f"Gamma has a pole at {complex(z[poles].flat[0])}", at=complex(z[poles].flat[0]))


def _lanczos(z: np.ndarray) -> np.ndarray:
    zz = z - 1.0
    series = np.full(zz.shape, LANCZOS_COEFFICIENTS[0], dtype=complex)
    for k, c in enumerate(LANCZOS_COEFFICIENTS[1:], start=1):
        series = series + c / (zz + k)
    t = zz + LANCZOS_G + 0.5
    return SQRT_TWO_PI * np.exp((zz + 0.5) * np.log(t) - t) * series


def gamma_complex(z):
    """Gamma(z) for complex z (scalar or array), reflecting for Re z < 1/2."""
    arr = np.asarray(z, dtype=complex)
    _check_poles(arr)
    reflect = arr.real < 0.5
    direct = _lanczos(np.where(reflect, 1.0 - arr, arr))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(reflect, np.pi / (np.sin(np.pi * arr) * direct), direct)
    return out[()] if out.ndim == 0 else out


def zeta_F(fld: LocalField, s):
    s = np.asarray(s, dtype=complex)
    if fld.is_real:
        out = np.pi ** (-s / 2) * gamma_complex(s / 2)
    else:
        out = 2.0 * (2.0 * np.pi) ** (-s) * gamma_complex(s)
    return out[()] if np.ndim(out) == 0 else out


def component_l_factor(comp: SquareIntegrableRep, s):
    s = np.asarray(s, dtype=complex)
    if not comp.field.is_real:
        return zeta_F(comp.field, s + comp.t + abs(comp.kappa) / 2)
    if comp.is_character:
        return zeta_F(comp.field, s + comp.t + comp.kappa)
    return zeta_F(COMPLEX, s + comp.t + (comp.kappa - 1) / 2)


def l_factor(rep: ReprDescriptor, s):
    """L(s, pi) as the product of the component factors."""
    out = np.ones(np.shape(s), dtype=complex)
    for idx, comp in enumerate(rep.components):
        try:
            out = out * component_l_factor(comp, s)
        except PoleError as exc:
            raise PoleError(f"L(s, pi) has a pole at s = {s}", at=exc.at, component=idx) from None
    return out[()] if out.ndim == 0 else out


def rs_l_factor(rep: ReprDescriptor, sph: ReprDescriptor, s):
    """L(s, pi x pi') for spherical pi' = |.|^{t'_1} + ... + |.|^{t'_m}."""
    if sph.field != rep.field:
        raise DomainError("both representations must live over the same field")
    if not sph.is_spherical:
        raise UnsupportedError("Rankin-Selberg factors are implemented for a spherical second argument only")
    out = np.ones(np.shape(s), dtype=complex)
    for t_prime in sph.ts:
        out = out * l_factor(rep, np.asarray(s, dtype=complex) + t_prime)
    return out[()] if out.ndim == 0 else out


def _bessel_cutoff(nu_re: float, x: np.ndarray) -> float:
    # solve x cosh T - |Re nu| T - x = 40 by fixed-point iteration
    xmin = float(np.min(x))
    T = 1.0
    for _ in range(50):
        T_next = float(np.arccosh(1.0 + (40.0 + abs(nu_re) * T) / xmin))
        if abs(T_next - T) <= 1e-12 * T_next:
            return T_next
        T = T_next
    logger.debug("bessel cutoff iteration stopped at T = %.6g for |Re nu| = %.3g", T, abs(nu_re))
    return T


def bessel_k(nu, x, step: float = 1.0 / 16.0, with_error: bool = False):
    """K_nu(x) = int_0^oo exp(-x cosh t) cosh(nu t) dt by the trapezoidal rule in t.

    The integrand is analytic in a strip around the real axis, so the rule
    converges geometrically in 1/step; ``with_error`` also returns the
    difference to the rule with twice the step.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("bessel_k needs x > 0")
    nu = complex(nu)
    flat = x_arr.ravel()
    T = _bessel_cutoff(nu.real, flat)
    t = np.arange(0.0, T + step, step)
    weights = np.full(t.shape, step)
    weights[0] = 0.5 * step
    out = np.empty(flat.shape, dtype=complex)
    coarse = np.empty(flat.shape, dtype=complex)
    chunk = max(1, 2_000_000 // t.size)
    cosh_t = np.cosh(t)
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk, None]
        base = -xs * cosh_t[None, :]
        values = 0.5 * (np.exp(base + nu * t) + np.exp(base - nu * t))
        out[start:start + chunk] = values @ weights
        coarse[start:start + chunk] = values[:, ::2] @ (2.0 * weights[::2])
    out = out.reshape(x_arr.shape)
    if with_error:
        return (out[()] if out.ndim == 0 else out), np.abs(out - coarse.reshape(x_arr.shape))
    return out[()] if out.ndim == 0 else out
