import random
from math import comb

import pytest

from newform_utils.branching import oldform_dim_bruteforce, spherical_ktypes
from newform_utils.errors import DomainError, UnsupportedError
from newform_utils.invariants import (
    automorphic_induction,
    conductor_exponent,
    cumulative_oldform_dim,
    epsilon_factor,
    newform_is_minimal,
    newform_ktype,
    newform_ktype_dimension,
    oldform_dim,
    summary,
)
from newform_utils.repcore import (
    COMPLEX,
    REAL,
    GroupKind,
    HighestWeight,
    ReprDescriptor,
    character,
    discrete_series,
    parse_descriptor,
)


def _random_descriptor(rng: random.Random, max_n: int = 4) -> ReprDescriptor:
    if rng.random() < 0.5:
        n = rng.randint(2, max_n)
        comps = [character(COMPLEX, rng.randint(-3, 3), rng.uniform(-1, 1)) for _ in range(n)]
        return ReprDescriptor(COMPLEX, tuple(comps))
    comps, size = [], 0
    target = rng.randint(2, max_n)
    while size < target:
        if target - size >= 2 and rng.random() < 0.4:
            comps.append(discrete_series(rng.randint(2, 4), rng.uniform(-1, 1)))
            size += 2
        else:
            comps.append(character(REAL, rng.randint(0, 1), rng.uniform(-1, 1)))
            size += 1
    return ReprDescriptor(REAL, tuple(comps))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("R: D^12 t=0", 12),
        ("R: chi^0 t=0.3i ; chi^0 t=-0.3i", 0),
        ("R: chi^1 t=0.3i ; chi^1 t=-0.3i", 2),
        ("R: D^3 t=0 ; chi^0 t=-0.2", 3),
        ("C: chi^3 t=0 ; chi^-1 t=0", 4),
    ],
)
def test_conductor_exponents(text, expected):
    assert conductor_exponent(parse_descriptor(text)) == expected


def test_newform_ktypes():
    assert newform_ktype(parse_descriptor("R: D^3 t=0 ; chi^0 t=-0.2")) == HighestWeight(GroupKind.ORTHOGONAL, (3, 0, 0))
    assert newform_ktype(parse_descriptor("C: chi^3 t=0 ; chi^-1 t=0 ; chi^2 t=0")) == HighestWeight(
        GroupKind.UNITARY, (5, 0, -1)
    )
    assert newform_ktype(parse_descriptor("C: chi^-2 t=0")) == HighestWeight(GroupKind.UNITARY, (-2,))
    assert newform_ktype_dimension(parse_descriptor("R: D^3 t=0")) == 2
    assert newform_ktype_dimension(parse_descriptor("R: chi^1 t=0 ; chi^1 t=0 ; chi^0 t=0")) == 5


def test_epsilon_factor_is_i_to_minus_conductor():
    rep = parse_descriptor("R: D^3 t=0")
    eps = epsilon_factor(rep)
    assert eps.value == pytest.approx(1j ** -3)
    assert str(eps) == "i^1"
    rng = random.Random(7)
    for _ in range(50):
        rep = _random_descriptor(rng)
        assert epsilon_factor(rep).value == pytest.approx(1j ** (-conductor_exponent(rep)))


def test_epsilon_factor_is_multiplicative():
    a = parse_descriptor("C: chi^3 t=0")
    b = parse_descriptor("C: chi^-2 t=0.5 ; chi^1 t=0")
    both = ReprDescriptor(COMPLEX, a.components + b.components)
    assert epsilon_factor(both) == epsilon_factor(a) * epsilon_factor(b)


def test_oldform_dimensions_follow_binomials():
    rep = parse_descriptor("R: D^3 t=0 ; chi^0 t=-0.2")
    c = conductor_exponent(rep)
    assert oldform_dim(rep, c) == 1
    assert oldform_dim(rep, c + 1) == 0
    assert oldform_dim(rep, c + 4) == comb(2 + 1, 1)
    assert oldform_dim(rep, c - 1) == 0
    assert cumulative_oldform_dim(rep, c + 4) == 1 + 2 + 3


def test_oldform_dimensions_match_branching_count():
    rng = random.Random(20240611)
    for _ in range(50):
        rep = _random_descriptor(rng)
        c = conductor_exponent(rep)
        for m in range(c + 9):
            assert oldform_dim(rep, m) == oldform_dim_bruteforce(rep, m), (rep, m)


def test_multiplicity_one_at_the_conductor():
    rng = random.Random(11)
    for _ in range(200):
        rep = _random_descriptor(rng)
        c = conductor_exponent(rep)
        for m in range(c):
            assert all(mult == 0 for _, mult in spherical_ktypes(rep, m)), (rep, m)
        found = [(tau, mult) for tau, mult in spherical_ktypes(rep, c) if mult]
        assert found == [(newform_ktype(rep), 1)], rep


def test_automorphic_induction_adds_rank_to_conductor():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 4)
        rep = ReprDescriptor(COMPLEX, tuple(character(COMPLEX, rng.randint(-5, 5), rng.uniform(-1, 1)) for _ in range(n)))
        induced = automorphic_induction(rep)
        assert induced.field == REAL and induced.n == 2 * n
        assert conductor_exponent(induced) == conductor_exponent(rep) + n
    with pytest.raises(DomainError):
        automorphic_induction(parse_descriptor("R: chi^0 t=0"))


def test_rank_one_oldforms_need_the_convention_flag():
    rep = parse_descriptor("C: chi^2 t=0")
    with pytest.raises(UnsupportedError):
        oldform_dim(rep, 2)
    assert oldform_dim(rep, 2, allow_rank_one=True) == 1
    assert oldform_dim(rep, 4, allow_rank_one=True) == 0
    assert "oldform_convention" in summary(rep)


def test_negative_degree_is_rejected():
    with pytest.raises(DomainError):
        oldform_dim(parse_descriptor("R: D^2 t=0"), -1)


def test_minimal_ktype_comparison():
    assert newform_is_minimal(parse_descriptor("R: D^3 t=0"))
    assert not newform_is_minimal(parse_descriptor("C: chi^1 t=0 ; chi^1 t=0"))


def test_summary_keys():
    info = summary(parse_descriptor("R: D^3 t=0"), extra=4)
    assert info["conductor_exponent"] == 3
    assert info["newform_ktype"] == [3, 0]
    assert info["epsilon"]["power_of_i"] == 1
    assert info["epsilon"]["display"] == "i^{-3}"
    assert list(info["oldform_dims"]) == [str(m) for m in range(8)]
