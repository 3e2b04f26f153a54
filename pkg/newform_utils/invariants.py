import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Tuple

from newform_utils.branching import ktype_dimension
from newform_utils.errors import DomainError, UnsupportedError
from newform_utils.repcore import (
    REAL,
    GroupKind,
    HighestWeight,
    ReprDescriptor,
    SquareIntegrableRep,
    character,
    compact_group,
    discrete_series,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpsilonFactor:
    """The root number i^power_of_i; the conductor exponent c gives power_of_i = -c mod 4."""

    power_of_i: int

    def __post_init__(self):
        object.__setattr__(self, "power_of_i", self.power_of_i % 4)

    @property
    def value(self) -> complex:
        return (1, 1j, -1, -1j)[self.power_of_i]

    def __mul__(self, other: "EpsilonFactor") -> "EpsilonFactor":
        return EpsilonFactor(self.power_of_i + other.power_of_i)

    def __str__(self) -> str:
        return f"i^{self.power_of_i}"


def component_conductor(comp: SquareIntegrableRep) -> int:
    return abs(comp.kappa)


def conductor_exponent(rep: ReprDescriptor) -> int:
    return sum(component_conductor(c) for c in rep.components)


def newform_ktype(rep: ReprDescriptor) -> HighestWeight:
    n = rep.n
    kappas = rep.kappas
    if rep.field.is_real:
        entries = (sum(kappas),) + (0,) * (n - 1)
        return HighestWeight(GroupKind.ORTHOGONAL, entries)
    top = sum(max(k, 0) for k in kappas)
    bottom = sum(min(k, 0) for k in kappas)
    if n == 1:
        return HighestWeight(GroupKind.UNITARY, (top + bottom,))
    return HighestWeight(GroupKind.UNITARY, (top,) + (0,) * (n - 2) + (bottom,))


def newform_ktype_dimension(rep: ReprDescriptor) -> int:
    return ktype_dimension(newform_ktype(rep))


def oldform_dim(rep: ReprDescriptor, m: int, allow_rank_one: bool = False) -> int:
    """Dimension of the K_{n-1}-fixed vectors in K-types of Howe degree m.

    For n = 1 the convention dim = [m == c] is used only when
    ``allow_rank_one`` is set.
    """
    if m < 0:
        raise DomainError(f"degree must be nonnegative, got {m}")
    c = conductor_exponent(rep)
    if rep.n < 2:
        if not allow_rank_one:
            raise UnsupportedError("oldform dimensions are defined for n >= 2")
        return int(m == c)
    if m < c or (m - c) % 2:
        return 0
    return comb((m - c) // 2 + rep.n - 2, rep.n - 2)


def cumulative_oldform_dim(rep: ReprDescriptor, m: int, allow_rank_one: bool = False) -> int:
    return sum(oldform_dim(rep, k, allow_rank_one) for k in range(m + 1))


def oldform_table(rep: ReprDescriptor, extra: int = 10) -> Dict[int, int]:
    c = conductor_exponent(rep)
    return {m: oldform_dim(rep, m, allow_rank_one=True) for m in range(c + extra + 1)}


def epsilon_factor(rep: ReprDescriptor) -> EpsilonFactor:
    return EpsilonFactor(-conductor_exponent(rep))


def howe_degree(w: HighestWeight) -> int:
    if w.group is GroupKind.UNITARY:
        return sum(abs(e) for e in w.entries)
    return sum(w.entries)


def vogan_norm_sq(w: HighestWeight) -> int:
    n = w.n
    if w.group is GroupKind.UNITARY:
        return sum((mu + n + 1 - 2 * j) ** 2 for j, mu in enumerate(w.entries, start=1))
    m, _ = w.shape()
    head = sum((w.entries[j - 1] + n - 2 * j) ** 2 for j in range(1, m + 1))
    tail = sum((n - 2 * j) ** 2 for j in range(m + 1, n // 2 + 1))
    return head + tail


def minimal_ktype(rep: ReprDescriptor) -> HighestWeight:
    """Minimal K-type in Vogan's sense: the kappa-list sorted in decreasing order."""
    kappas = sorted(rep.kappas, reverse=True)
    group = compact_group(rep.field)
    if group is GroupKind.UNITARY:
        return HighestWeight(group, tuple(kappas))
    return HighestWeight(group, tuple(kappas) + (0,) * (rep.n - rep.r))


def newform_is_minimal(rep: ReprDescriptor) -> bool:
    return minimal_ktype(rep) == newform_ktype(rep)


def automorphic_induction(rep: ReprDescriptor) -> ReprDescriptor:
    if rep.field.is_real:
        raise DomainError("automorphic induction starts from a descriptor over C")
    comps: List[SquareIntegrableRep] = []
    for comp in rep.components:
        if comp.kappa == 0:
            comps.extend([character(REAL, 0, comp.t), character(REAL, 1, comp.t)])
        else:
            comps.append(discrete_series(abs(comp.kappa) + 1, comp.t))
    return ReprDescriptor(REAL, tuple(comps))


def summary(rep: ReprDescriptor, extra: int = 10) -> Dict[str, object]:
    c = conductor_exponent(rep)
    tau = newform_ktype(rep)
    eps = epsilon_factor(rep)
    out: Dict[str, object] = {
        "conductor_exponent": c,
        "newform_ktype": list(tau.entries),
        "newform_ktype_dimension": ktype_dimension(tau),
        "epsilon": {"power_of_i": eps.power_of_i, "display": f"i^{{-{c}}}"},
        "minimal_ktype": list(minimal_ktype(rep).entries),
        "newform_is_minimal": newform_is_minimal(rep),
        "oldform_dims": {str(m): d for m, d in oldform_table(rep, extra).items()},
    }
    if rep.n == 1:
        out["oldform_convention"] = "rank one: dim = 1 exactly at m = c"
    logger.debug("invariants for %s: c=%d tau=%s", rep, c, tau)
    return out
