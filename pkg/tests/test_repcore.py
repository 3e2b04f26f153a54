import numpy as np
import pytest

from newform_utils.errors import DescriptorSyntaxError, DomainError
from newform_utils.repcore import (
    COMPLEX,
    REAL,
    ComponentKind,
    GroupKind,
    HighestWeight,
    canonicalize,
    character,
    concatenate,
    contragredient,
    discrete_series,
    format_complex,
    format_descriptor,
    parse_complex,
    parse_descriptor,
    spherical,
)


def test_parse_single_real_character():
    rep = parse_descriptor("R: chi^1 t=0.5")
    assert rep.field == REAL
    assert rep.n == 1 and rep.r == 1
    assert rep.kappas == (1,)
    assert rep.ts == (0.5 + 0j,)


def test_parse_complex_characters():
    rep = parse_descriptor("C: chi^3 t=0 ; chi^-1 t=0")
    assert rep.field == COMPLEX
    assert rep.kappas == (3, -1)
    assert rep.n == 2


def test_parse_discrete_series_and_character():
    rep = parse_descriptor("R: D^3 t=0 ; chi^0 t=-0.2")
    assert rep.n == 3 and rep.r == 2
    assert rep.components[0].kind is ComponentKind.DISCRETE_SERIES
    assert rep.components[0].block_size == 2
    assert rep.slots() == [(0, rep.components[0]), (2, rep.components[1])]


def test_parse_complex_twist_parameter():
    rep = parse_descriptor("C: chi^2 t=0.5-1.25i")
    assert rep.ts == (complex(0.5, -1.25),)
    assert parse_descriptor("R: chi^0 t=2i").ts == (2j,)


def test_format_reads_back():
    text = "R: D^3 t=0.0 ; chi^0 t=-0.2"
    assert format_descriptor(parse_descriptor(text)) == text


@pytest.mark.parametrize(
    "text",
    ["X: chi^0 t=0", "R chi^0 t=0", "R: chi^0", "R: chi^0 t=0 ;", "R: psi^0 t=0", "R: chi^0 t=0 extra"],
)
def test_syntax_errors_carry_position(text):
    with pytest.raises(DescriptorSyntaxError) as info:
        parse_descriptor(text)
    assert 0 <= info.value.position <= len(text)
    assert "^" in str(info.value)


@pytest.mark.parametrize("text", ["R: chi^2 t=0", "R: D^1 t=0", "C: D^3 t=0"])
def test_domain_errors(text):
    with pytest.raises(DomainError):
        parse_descriptor(text)


def test_canonicalize_orders_by_real_part():
    rep = parse_descriptor("R: chi^0 t=-0.3 ; chi^1 t=0.4")
    ordered = canonicalize(rep)
    assert [c.t.real for c in ordered.components] == [0.4, -0.3]
    assert ordered.was_ordered is False
    assert canonicalize(ordered).was_ordered is True


def test_contragredient_negates_parameters():
    rep = parse_descriptor("C: chi^3 t=0.25 ; chi^-1 t=-0.5")
    dual = contragredient(rep)
    assert sorted(dual.kappas) == [-3, 1]
    assert sorted(t.real for t in dual.ts) == [-0.25, 0.5]
    real = contragredient(parse_descriptor("R: D^4 t=0.1"))
    assert real.kappas == (4,) and real.ts == (-0.1 + 0j,)


def test_constructors_and_sums():
    rep = concatenate(spherical(REAL, [0.1, -0.1]), parse_descriptor("R: D^2 t=0"))
    assert rep.n == 4
    assert rep.is_spherical is False
    assert spherical(COMPLEX, [0, 0]).is_spherical
    assert discrete_series(5).kappa == 5
    assert character(COMPLEX, -2, 1j).contragredient().kappa == 2
    with pytest.raises(DomainError):
        concatenate(spherical(REAL, [0]), spherical(COMPLEX, [0]))


def test_highest_weight_validation():
    # (3, 1, 0) is mu_1 = 3, one middle entry eta = 1, one trailing zero
    assert HighestWeight(GroupKind.ORTHOGONAL, (3, 1, 0)).shape() == (1, 1)
    assert HighestWeight(GroupKind.ORTHOGONAL, (1, 1, 0)).shape() == (1, 1)
    assert str(HighestWeight(GroupKind.UNITARY, (2, 0, -1))) == "(2,0,-1)"
    with pytest.raises(DomainError):
        HighestWeight(GroupKind.UNITARY, (0, 1))
    with pytest.raises(DomainError):
        HighestWeight(GroupKind.ORTHOGONAL, (2, -1))


def test_non_finite_values_read_back_only_on_request():
    for z in (complex(np.inf, 0), complex(-np.inf, 0), complex(1.5, np.inf), complex(0, -np.inf)):
        assert parse_complex(format_complex(z), allow_nonfinite=True) == z
    nan = parse_complex(format_complex(complex(np.nan, 2.0)), allow_nonfinite=True)
    assert np.isnan(nan.real) and nan.imag == 2.0
    with pytest.raises(DomainError):
        parse_complex("inf")
    with pytest.raises(DomainError):
        parse_complex("1-nani")
    with pytest.raises(DomainError):
        parse_descriptor("R: chi^0 t=inf")


def test_parse_complex_rejects_trailing_text():
    assert parse_complex("1+0.5i") == complex(1, 0.5)
    assert parse_complex(" -2.5e-1 ") == -0.25
    with pytest.raises(DescriptorSyntaxError):
        parse_complex("1 + x")
