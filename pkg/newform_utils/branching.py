"""Branching multiplicities for U(n) and O(n) restriction chains.

All counts are exact integers obtained from interlacing patterns; nothing here
integrates characters numerically.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator, List, Tuple, Union

from sympy.utilities.iterables import partitions

from newform_utils.errors import DomainError, UnsupportedError
from newform_utils.repcore import (
    GroupKind,
    HighestWeight,
    ReprDescriptor,
    compact_group,
    is_valid_weight,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchTerm:
    sub_weight: HighestWeight
    # an integer for U(1) and O(1), an O(2) weight for restrict_o2
    det_weight: Union[int, HighestWeight]
    multiplicity: int = 1


def _interlacing(entries: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    ranges = [range(entries[j + 1], entries[j] + 1) for j in range(len(entries) - 1)]
    for nu in itertools.product(*ranges):
        yield tuple(nu)


def _require(w: HighestWeight, group: GroupKind, min_n: int) -> None:
    if w.group is not group:
        raise DomainError(f"expected a weight of {group.value}(n), got {w.group.value}({w.n})")
    if w.n < min_n:
        raise UnsupportedError(f"restriction needs n >= {min_n}, got n = {w.n}")


def restrict_u(w: HighestWeight) -> List[BranchTerm]:
    """U(n) -> U(n-1) x U(1)."""
    _require(w, GroupKind.UNITARY, 2)
    total = sum(w.entries)
    terms = []
    for nu in _interlacing(w.entries):
        terms.append(BranchTerm(HighestWeight(GroupKind.UNITARY, nu), total - sum(nu)))
    return terms


def restrict_o(w: HighestWeight) -> List[BranchTerm]:
    """O(n) -> O(n-1) x O(1).

    Interlacing patterns that are not weights of O(n-1) carry no representation
    and are dropped.
    """
    _require(w, GroupKind.ORTHOGONAL, 2)
    total = sum(w.entries)
    terms = []
    for nu in _interlacing(w.entries):
        if not is_valid_weight(GroupKind.ORTHOGONAL, nu):
            continue
        terms.append(BranchTerm(HighestWeight(GroupKind.ORTHOGONAL, nu), (total - sum(nu)) % 2))
    return terms


def is_single_row(w: HighestWeight) -> bool:
    return all(e == 0 for e in w.entries[1:])


def restrict_o2(w: HighestWeight) -> List[BranchTerm]:
    """O(n) -> O(n-2) x O(2) for single-row weights (mu_1, 0, ..., 0)."""
    _require(w, GroupKind.ORTHOGONAL, 3)
    if not is_single_row(w):
        raise UnsupportedError(f"restrict_o2 handles single-row weights only, got {w}")
    mu1 = w.entries[0]
    terms = []
    for lam1 in range(mu1 + 1):
        for nu1 in range((mu1 - lam1) % 2, mu1 - lam1 + 1, 2):
            nu = (nu1,) + (0,) * (w.n - 3)
            if not is_valid_weight(GroupKind.ORTHOGONAL, nu):
                continue
            terms.append(
                BranchTerm(
                    HighestWeight(GroupKind.ORTHOGONAL, nu),
                    HighestWeight(GroupKind.ORTHOGONAL, (lam1, 0)),
                )
            )
    return terms


# --- dimensions ---

def weyl_dimension(entries: Tuple[int, ...]) -> int:
    n = len(entries)
    out = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            out *= Fraction(entries[i] - entries[j] + j - i, j - i)
    return int(out)


@lru_cache(maxsize=None)
def orthogonal_dimension(entries: Tuple[int, ...]) -> int:
    if len(entries) == 1:
        return 1
    w = HighestWeight(GroupKind.ORTHOGONAL, entries)
    return sum(orthogonal_dimension(t.sub_weight.entries) for t in restrict_o(w))


def ktype_dimension(w: HighestWeight) -> int:
    if w.group is GroupKind.UNITARY:
        return weyl_dimension(w.entries)
    return orthogonal_dimension(w.entries)


# --- multiplicities ---

@lru_cache(maxsize=None)
def _mult_unitary(entries: Tuple[int, ...], kappas: Tuple[int, ...]) -> int:
    if len(entries) == 1:
        return int(entries[0] == kappas[0])
    w = HighestWeight(GroupKind.UNITARY, entries)
    return sum(
        _mult_unitary(t.sub_weight.entries, kappas[:-1])
        for t in restrict_u(w)
        if t.det_weight == kappas[-1]
    )


def _o2_block_contains(lam1: int, kappa: int) -> bool:
    # D_kappa restricted to O(2) is the sum of (l, 0) over l >= kappa, l = kappa mod 2
    return lam1 >= kappa and (lam1 - kappa) % 2 == 0


@lru_cache(maxsize=None)
def _mult_orthogonal(entries: Tuple[int, ...], blocks: Tuple[Tuple[int, int], ...]) -> int:
    size, kappa = blocks[-1]
    if len(blocks) == 1:
        if size == 1:
            return int(entries == (kappa,))
        return int(entries[1] == 0 and _o2_block_contains(entries[0], kappa))
    w = HighestWeight(GroupKind.ORTHOGONAL, entries)
    if size == 1:
        return sum(
            _mult_orthogonal(t.sub_weight.entries, blocks[:-1])
            for t in restrict_o(w)
            if t.det_weight == kappa
        )
    if not is_single_row(w):
        raise UnsupportedError(f"multiplicities with discrete series blocks need a single-row weight, got {w}")
    return sum(
        _mult_orthogonal(t.sub_weight.entries, blocks[:-1])
        for t in restrict_o2(w)
        if _o2_block_contains(t.det_weight.entries[0], kappa)
    )


def mult_chain(rep: ReprDescriptor, tau: HighestWeight) -> int:
    """dim Hom_K(tau, pi|_K) for the maximal compact subgroup K of GL_n(F)."""
    group = compact_group(rep.field)
    if tau.group is not group:
        raise DomainError(f"{rep.field} descriptors restrict to {group.value}(n), got a {tau.group.value}(n) weight")
    if tau.n != rep.n:
        raise DomainError(f"weight has length {tau.n}, representation has rank {rep.n}")
    if group is GroupKind.UNITARY:
        return _mult_unitary(tau.entries, rep.kappas)
    # block order does not change the multiplicity; peel O(1) factors first
    blocks = sorted(((c.block_size, c.kappa) for c in rep.components), key=lambda b: -b[0])
    return _mult_orthogonal(tau.entries, tuple(blocks))


@lru_cache(maxsize=None)
def trivial_on_restriction(tau: HighestWeight) -> Tuple[bool, int]:
    if tau.n < 2:
        raise UnsupportedError("restriction to K_{n-1} needs n >= 2")
    terms = restrict_u(tau) if tau.group is GroupKind.UNITARY else restrict_o(tau)
    count = sum(t.multiplicity for t in terms if t.sub_weight.is_zero)
    return count > 0, count


def binom_identity(k: int, m: int, n: int) -> Tuple[int, int]:
    lhs = sum(comb(j + m, m) * comb(k - j + n, n) for j in range(k + 1))
    rhs = comb(k + m + n + 1, m + n + 1)
    return lhs, rhs


# --- brute-force enumeration ---

def _partitions_at_most(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    if parts <= 0:
        return
    for p in partitions(total, m=parts):
        yield tuple(sorted((k for k, v in p.items() for _ in range(v)), reverse=True))


@lru_cache(maxsize=None)
def ktypes_of_degree(group: GroupKind, n: int, degree: int) -> Tuple[HighestWeight, ...]:
    out: List[HighestWeight] = []
    if group is GroupKind.ORTHOGONAL:
        for alpha in _partitions_at_most(degree, n):
            entries = alpha + (0,) * (n - len(alpha))
            if is_valid_weight(group, entries):
                out.append(HighestWeight(group, entries))
        return tuple(sorted(out, key=lambda w: w.entries, reverse=True))
    for p in range(degree + 1):
        for alpha in _partitions_at_most(p, n):
            for beta in _partitions_at_most(degree - p, n - len(alpha)):
                middle = (0,) * (n - len(alpha) - len(beta))
                entries = alpha + middle + tuple(-b for b in reversed(beta))
                out.append(HighestWeight(group, entries))
    return tuple(sorted(set(out), key=lambda w: w.entries, reverse=True))


def spherical_ktypes(rep: ReprDescriptor, degree: int) -> List[Tuple[HighestWeight, int]]:
    """K-types of the given Howe degree with a K_{n-1}-fixed vector, with their multiplicity in pi."""
    group = compact_group(rep.field)
    out = []
    for tau in ktypes_of_degree(group, rep.n, degree):
        has_fixed, _ = trivial_on_restriction(tau)
        if has_fixed:
            out.append((tau, mult_chain(rep, tau)))
    return out


def oldform_dim_bruteforce(rep: ReprDescriptor, degree: int) -> int:
    total = 0
    for tau, mult in spherical_ktypes(rep, degree):
        _, fixed = trivial_on_restriction(tau)
        total += mult * fixed
    logger.debug("brute-force oldform count for %s at degree %d: %d", rep, degree, total)
    return total
