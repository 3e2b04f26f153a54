import numpy as np
import pytest
import sympy

from newform_utils.errors import DomainError, UnsupportedError
from newform_utils.harmonics import (
    dim_harmonics,
    eval_exact,
    eval_poly,
    exact_group_rule,
    haar_batch,
    haar_sample,
    harmonic_basis,
    hecke_residual,
    is_harmonic,
    real_variables,
    reproducing_residual,
    zonal,
    zonal_product,
)
from newform_utils.repcore import COMPLEX, REAL, GroupKind, parse_descriptor


def _real_degrees(n, top):
    return [(p,) for p in range(top + 1) if n > 1 or p <= 1]


def _complex_degrees(n, top):
    return [(p, q) for p in range(top + 1) for q in range(top + 1 - p) if n > 1 or p * q == 0]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dimension_formula_matches_laplacian_kernel(n):
    for degrees in _real_degrees(n, 4):
        assert dim_harmonics(REAL, n, degrees) == len(harmonic_basis(REAL, n, degrees)), degrees
    for degrees in _complex_degrees(n, 4):
        assert dim_harmonics(COMPLEX, n, degrees) == len(harmonic_basis(COMPLEX, n, degrees)), degrees


def test_basis_elements_are_harmonic_and_homogeneous():
    for P in harmonic_basis(COMPLEX, 2, (2, 1)):
        assert is_harmonic(P)
        assert P.is_homogeneous_of_bidegree()


def test_basis_contains_harmonic_monomials():
    x1, x2 = real_variables(2)
    basis = harmonic_basis(REAL, 2, (2,))
    assert len(basis) == 2
    # x1 x2 has zero Laplacian and must lie in the span of the basis
    rows = [sympy.Poly(P.as_expr(), x1, x2).coeff_monomial(x1 * x2) for P in basis]
    assert any(c != 0 for c in rows)
    assert len(harmonic_basis(COMPLEX, 1, (3, 0))) == 1


def test_zonal_real_plane_degree_two():
    x1, x2 = real_variables(2)
    P = zonal(REAL, 2, (2,))
    assert sympy.expand(P.as_expr() - (x2 ** 2 - x1 ** 2)) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_real_zonals_are_harmonic_and_normalised(n):
    for (p,) in _real_degrees(n, 5):
        P = zonal(REAL, n, (p,))
        assert is_harmonic(P)
        e_n = [0] * (n - 1) + [1]
        assert eval_exact(P, e_n) == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_complex_zonals_are_harmonic_and_normalised(n):
    for degrees in _complex_degrees(n, 5):
        P = zonal(COMPLEX, n, degrees)
        assert is_harmonic(P)
        e_n = [0] * (n - 1) + [1]
        assert eval_exact(P, e_n) == 1


def test_zonal_is_invariant_under_the_smaller_group():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    P = zonal(COMPLEX, 4, (2, 1))
    k = np.eye(4, dtype=complex)
    k[:3, :3] = haar_sample(GroupKind.UNITARY, 3, rng).matrix
    assert eval_poly(P, x @ k) == pytest.approx(eval_poly(P, x), abs=1e-12)


def test_zonal_product_of_discrete_series_and_character():
    P = zonal_product(parse_descriptor("R: D^2 t=0 ; chi^1 t=0"))
    assert P.degrees == (3,)
    x1, x2, x3 = real_variables(3)
    assert sympy.expand(P.as_expr() - (x2 ** 2 - x1 ** 2) * x3) == 0
    Q = zonal_product(parse_descriptor("C: chi^2 t=0 ; chi^-1 t=0"))
    assert Q.degrees == (2, 1)


def test_degree_validation():
    with pytest.raises(DomainError):
        zonal(REAL, 1, (2,))
    with pytest.raises(DomainError):
        zonal(COMPLEX, 1, (1, 1))
    with pytest.raises(DomainError):
        dim_harmonics(REAL, 2, (1, 1))
    with pytest.raises(DomainError):
        eval_poly(zonal(REAL, 3, (1,)), np.ones(2))


@pytest.mark.parametrize(
    "fld, n, degrees",
    [(REAL, 1, (1,)), (REAL, 2, (2,)), (REAL, 2, (3,)), (REAL, 3, (2,)), (REAL, 4, (1,)),
     (COMPLEX, 1, (2, 0)), (COMPLEX, 2, (1, 1)), (COMPLEX, 2, (2, 1))],
)
def test_hecke_identity(fld, n, degrees):
    rng = np.random.default_rng(1)
    w = 0.6 * rng.standard_normal(n)
    if not fld.is_real:
        w = w + 0.6j * rng.standard_normal(n)
    for P in harmonic_basis(fld, n, degrees):
        est = hecke_residual(fld, n, P, w)
        assert est.residual < 1e-6, (P, est)


def test_hecke_identity_refuses_large_dimensions():
    P = zonal(REAL, 7, (1,))
    with pytest.raises(UnsupportedError):
        hecke_residual(REAL, 7, P, np.zeros(7))


@pytest.mark.parametrize("fld, n, degrees", [(COMPLEX, 1, (3, 0)), (REAL, 2, (3,)), (COMPLEX, 2, (1, 1)), (COMPLEX, 2, (2, 0))])
def test_reproducing_kernel_exact_groups(fld, n, degrees):
    rng = np.random.default_rng(2)
    point = rng.standard_normal(n) + (0 if fld.is_real else 1j * rng.standard_normal(n))
    for P in harmonic_basis(fld, n, degrees):
        est = reproducing_residual(fld, n, degrees, P, point)
        assert est.method == "exact"
        assert est.residual < 1e-8


def test_reproducing_kernel_monte_carlo_within_three_sigma():
    rng = np.random.default_rng(20240611)
    point = np.array([0.3, -0.5, 0.8])
    for P in harmonic_basis(REAL, 3, (2,)):
        est = reproducing_residual(REAL, 3, (2,), P, point, rng=rng, samples=20000)
        assert est.method == "monte-carlo"
        assert est.passes(1e-12)


def test_haar_samples_are_unitary():
    rng = np.random.default_rng(0)
    assert haar_sample(GroupKind.UNITARY, 4, rng).unitarity_residual() < 1e-12
    assert haar_sample(GroupKind.ORTHOGONAL, 5, rng).unitarity_residual() < 1e-12
    batch = haar_batch(GroupKind.ORTHOGONAL, 3, rng, 10)
    assert batch.shape == (10, 3, 3)
    assert np.allclose(batch @ np.swapaxes(batch, -1, -2), np.eye(3))


def test_exact_rules():
    ks, w = exact_group_rule(GroupKind.ORTHOGONAL, 2, 3)
    assert w.sum() == pytest.approx(1.0)
    # every nontrivial character of SO(2) up to the rule degree averages to zero
    theta = np.arctan2(ks[:, 1, 0], ks[:, 0, 0])
    assert abs(np.sum(w * np.exp(2j * theta))) < 1e-12
    assert exact_group_rule(GroupKind.ORTHOGONAL, 3, 2) is None
