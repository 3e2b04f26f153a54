import numpy as np
import pytest

from newform_utils.errors import ConvergenceError, DomainError, UnsupportedError
from newform_utils.harmonics import haar_sample
from newform_utils.quadrature import QuadratureSpec
from newform_utils.repcore import COMPLEX, REAL, GroupKind, parse_descriptor
from newform_utils.whittaker import (
    GroupPoint,
    InducedNewform,
    TorusPoint,
    canonical_constant,
    central_character,
    iwasawa,
    pieri_integral,
    pieri_residual,
    whittaker_gl1,
    whittaker_gl2_closed,
    whittaker_gl2_full,
    whittaker_gl2_jacquet,
    whittaker_propagate,
    whittaker_propagate_dual,
)

SPHERICAL = "R: chi^0 t=0.3 ; chi^0 t=-0.3"
RAMIFIED = "R: chi^1 t=0.1 ; chi^0 t=-0.1"
HOLOMORPHIC = "R: D^3 t=0"


def _torus(ys):
    ys = np.asarray(ys, dtype=complex)
    g = np.zeros(ys.shape + (2, 2), dtype=complex)
    g[..., 0, 0] = ys
    g[..., 1, 1] = 1.0
    return g


@pytest.mark.parametrize("n, complex_entries", [(2, False), (2, True), (3, False), (3, True), (4, True)])
def test_iwasawa_reconstructs(n, complex_entries):
    rng = np.random.default_rng(n)
    m = rng.standard_normal((5, n, n)) + (1j * rng.standard_normal((5, n, n)) if complex_entries else 0)
    u, a, k = iwasawa(m)
    assert np.allclose(u @ (a[..., :, None] * k), m)
    assert np.allclose(np.tril(u, -1), 0) and np.allclose(np.diagonal(u, axis1=-2, axis2=-1), 1)
    assert np.allclose(k @ np.conj(np.swapaxes(k, -1, -2)), np.eye(n))
    if n == 2:
        assert np.all(np.abs(a[..., -1].imag) < 1e-12) and np.all(a[..., -1].real > 0)


def test_group_point_caches_decomposition():
    p = GroupPoint(REAL, [[1.0, 2.0], [3.0, 4.0]])
    assert p.reconstruction_residual() < 1e-12
    assert GroupPoint.from_torus(TorusPoint(REAL, (2.0, -1.0))).n == 2
    with pytest.raises(DomainError):
        GroupPoint(REAL, [[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(DomainError):
        TorusPoint(REAL, (1.0, 0.0))
    with pytest.raises(DomainError):
        TorusPoint(REAL, (1j,))


def test_gl1_whittaker_is_the_character():
    rep = parse_descriptor("C: chi^2 t=0.5")
    z = 0.5 + 0.5j
    assert whittaker_gl1(rep, z) == pytest.approx((z / abs(z)) ** 2 * abs(z) ** 1.0)
    assert whittaker_gl1(parse_descriptor("R: chi^1 t=0"), -2.0) == pytest.approx(-1.0)


def test_canonical_constant_of_characters_and_discrete_series():
    assert canonical_constant(parse_descriptor("R: chi^1 t=0.3")) == pytest.approx(1.0)
    # i^kappa zeta_R(kappa) zeta_R(kappa + 1) for D_kappa
    assert canonical_constant(parse_descriptor("R: D^2 t=0")) == pytest.approx(-1.0 / (2.0 * np.pi ** 2), rel=1e-12)


def test_induced_newform_is_invariant_under_the_smaller_group():
    rep = parse_descriptor("C: chi^2 t=0.2 ; chi^-1 t=0 ; chi^0 t=-0.2")
    f = InducedNewform(rep)
    rng = np.random.default_rng(0)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    k = np.eye(3, dtype=complex)
    k[:2, :2] = haar_sample(GroupKind.UNITARY, 2, rng).matrix
    assert f(g @ k) == pytest.approx(f(g), rel=1e-10)


@pytest.mark.parametrize("text", [SPHERICAL, RAMIFIED, HOLOMORPHIC])
def test_jacquet_integral_matches_closed_form(text):
    rep = parse_descriptor(text)
    ys = np.array([0.15, 0.7, 1.6, -0.4])
    result = whittaker_gl2_jacquet(rep, _torus(ys))
    closed = whittaker_gl2_closed(rep, ys)
    assert np.all(np.abs(result.value - closed) <= 1e-6 * np.abs(closed) + result.error)


def test_jacquet_integral_off_the_torus_matches_full_closed_form():
    rep = parse_descriptor(HOLOMORPHIC)
    theta = 0.7
    k = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    g = np.array([[0.8, 0.3], [0.0, 1.0]]) @ k
    value = whittaker_gl2_jacquet(rep, g).value
    assert value == pytest.approx(whittaker_gl2_full(rep, g), rel=1e-6)


def test_jacquet_region_is_checked():
    with pytest.raises(ConvergenceError):
        whittaker_gl2_jacquet(parse_descriptor("R: chi^0 t=0.2i ; chi^0 t=-0.2i"), _torus([1.0]))


def test_full_closed_form_equivariance():
    rep = parse_descriptor("R: chi^0 t=0.2i ; chi^0 t=-0.2i")
    g = np.array([[1.3, 0.4], [-0.2, 0.9]])
    u = np.array([[1.0, 0.35], [0.0, 1.0]])
    assert whittaker_gl2_full(rep, u @ g) == pytest.approx(np.exp(2j * np.pi * 0.35) * whittaker_gl2_full(rep, g))
    z = 1.7
    assert whittaker_gl2_full(rep, z * g) == pytest.approx(central_character(rep, z) * whittaker_gl2_full(rep, g))
    with pytest.raises(UnsupportedError):
        whittaker_gl2_full(parse_descriptor(RAMIFIED), g)


@pytest.mark.parametrize("text", ["R: chi^0 t=0.2i ; chi^0 t=-0.2i", HOLOMORPHIC, RAMIFIED, "C: chi^1 t=0 ; chi^-1 t=0"])
def test_rank_two_propagation_matches_closed_form(text):
    rep = parse_descriptor(text)
    ys = np.array([0.1, 0.4, 1.0, -0.3, -1.2])
    if not rep.field.is_real:
        ys = ys * np.exp(0.4j)
    result = whittaker_propagate(rep, ys)
    closed = whittaker_gl2_closed(rep, ys)
    assert np.all(np.abs(result.value - closed) <= 1e-6 * np.abs(closed) + result.error)


def test_rank_two_dual_propagation_matches_closed_form():
    rep = parse_descriptor("R: chi^0 t=0.2 ; chi^0 t=-0.1")
    ys = np.array([0.3, 1.1])
    result = whittaker_propagate_dual(rep, ys, QuadratureSpec(level=4, points=48))
    closed = whittaker_gl2_closed(rep, ys)
    assert result.converged
    assert np.all(np.abs(result.value - closed) <= 1e-6 * np.abs(closed) + result.error)


def test_propagation_rejects_bad_input():
    with pytest.raises(DomainError):
        whittaker_propagate(parse_descriptor(HOLOMORPHIC), np.array([0.0, 1.0]))
    with pytest.raises(DomainError):
        whittaker_propagate(parse_descriptor("R: chi^0 t=0"), np.array([1.0]))
    with pytest.raises(UnsupportedError):
        whittaker_propagate_dual(parse_descriptor(RAMIFIED), np.array([1.0]))


@pytest.mark.parametrize("text, s", [("R: chi^1 t=0.1", 1.5), ("R: chi^0 t=0.2i", 0.75 + 1j), ("C: chi^-2 t=0", 1.0)])
def test_rank_one_convolution_section(text, s):
    rep = parse_descriptor(text)
    lhs, rhs = pieri_integral(rep, s, h=0.7 if rep.field.is_real else 0.7j)
    assert lhs.value == pytest.approx(rhs, rel=1e-8)
    assert pieri_residual(rep, s).residual < 1e-8


def test_convolution_section_region_and_support():
    with pytest.raises(ConvergenceError):
        pieri_integral(parse_descriptor("R: chi^0 t=0"), -0.5)
    with pytest.raises(UnsupportedError):
        pieri_integral(parse_descriptor("C: chi^1 t=0 ; chi^-1 t=0"), 2.0)
    with pytest.raises(UnsupportedError):
        pieri_integral(parse_descriptor(RAMIFIED), 2.0)


@pytest.mark.slow
@pytest.mark.parametrize("text", ["R: chi^0 t=0.2i ; chi^0 t=-0.2i", HOLOMORPHIC])
def test_rank_two_convolution_section(text):
    rep = parse_descriptor(text)
    lhs, rhs = pieri_integral(rep, 2.0, spec=QuadratureSpec(level=4, points=32, budget=50_000_000))
    assert abs(lhs.value - rhs) <= 1e-4 * abs(rhs) + lhs.error


@pytest.mark.slow
def test_rank_three_propagation_against_dual_formula():
    rep = parse_descriptor("R: chi^0 t=0.1 ; chi^0 t=0 ; chi^0 t=-0.1")
    spec = QuadratureSpec(level=3, max_level=5, tolerance=1e-5, points=24, budget=50_000_000)
    g = _torus([0.5, 1.0])
    prop = whittaker_propagate(rep, g, spec)
    dual = whittaker_propagate_dual(rep, g, spec)
    assert np.all(np.abs(prop.value - dual.value) <= 1e-4 * np.abs(dual.value) + prop.error + dual.error)
