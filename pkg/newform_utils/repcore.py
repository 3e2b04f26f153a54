"""Local fields, essentially square-integrable representations and their isobaric sums.

Descriptors are written as, for example::

    R: D^3 t=0 ; chi^0 t=-0.2
    C: chi^3 t=0 ; chi^-1 t=0.5-1.25i

``parse_descriptor`` reads this grammar and ``format_descriptor`` writes it back.
"""
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from newform_utils.errors import DescriptorSyntaxError, DomainError


class FieldKind(str, Enum):
    REAL = "R"
    COMPLEX = "C"


@dataclass(frozen=True)
class LocalField:
    kind: FieldKind

    @property
    def degree(self) -> int:
        return 1 if self.kind is FieldKind.REAL else 2

    @property
    def is_real(self) -> bool:
        return self.kind is FieldKind.REAL

    @property
    def symbol(self) -> str:
        return self.kind.value

    def norm(self, x):
        """Normalised absolute value: |x| over R, the squared modulus over C."""
        x = np.asarray(x)
        return np.abs(x) if self.is_real else np.abs(x) ** 2

    def sign_character(self, x, kappa: int):
        """sgn(x)^kappa over R, (x/|x|)^kappa over C."""
        x = np.asarray(x)
        if self.is_real:
            return np.sign(x.real) ** (kappa % 2)
        return (x / np.abs(x)) ** kappa

    def __str__(self) -> str:
        return self.symbol


REAL = LocalField(FieldKind.REAL)
COMPLEX = LocalField(FieldKind.COMPLEX)


def field_from_symbol(symbol: str) -> LocalField:
    try:
        return LocalField(FieldKind(symbol.strip().upper()))
    except ValueError:
        raise DomainError(f"unknown field {symbol!r}; expected R or C")


class ComponentKind(str, Enum):
    CHARACTER = "chi"
    DISCRETE_SERIES = "D"


@dataclass(frozen=True)
class SquareIntegrableRep:
    field: LocalField
    kind: ComponentKind
    kappa: int
    t: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "t", complex(self.t))
        object.__setattr__(self, "kappa", int(self.kappa))
        if not np.isfinite(self.t):
            raise DomainError(f"the parameter t must be finite, got {self.t}")
        if self.kind is ComponentKind.CHARACTER:
            if self.field.is_real and self.kappa not in (0, 1):
                raise DomainError(f"a character of R^x has kappa in {{0, 1}}, got {self.kappa}")
        else:
            if not self.field.is_real:
                raise DomainError("discrete series components exist only over R")
            if self.kappa < 2:
                raise DomainError(f"discrete series D^kappa needs kappa >= 2, got {self.kappa}")

    @property
    def block_size(self) -> int:
        return 1 if self.kind is ComponentKind.CHARACTER else 2

    @property
    def is_character(self) -> bool:
        return self.kind is ComponentKind.CHARACTER

    @property
    def conductor(self) -> int:
        return abs(self.kappa)

    def contragredient(self) -> "SquareIntegrableRep":
        kappa = -self.kappa if (self.is_character and not self.field.is_real) else self.kappa
        return replace(self, kappa=kappa, t=-self.t)

    def twist(self, shift: complex) -> "SquareIntegrableRep":
        return replace(self, t=self.t + complex(shift))


@dataclass(frozen=True)
class ReprDescriptor:
    field: LocalField
    components: Tuple[SquareIntegrableRep, ...]
    # set by canonicalize: True when the input was already Langlands-ordered
    was_ordered: Optional[bool] = field(default=None, compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise DomainError("a descriptor needs at least one component")
        for idx, comp in enumerate(comps):
            if comp.field != self.field:
                raise DomainError(f"component {idx} lives over {comp.field}, descriptor over {self.field}")

    @property
    def n(self) -> int:
        return sum(c.block_size for c in self.components)

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def kappas(self) -> Tuple[int, ...]:
        return tuple(c.kappa for c in self.components)

    @property
    def ts(self) -> Tuple[complex, ...]:
        return tuple(c.t for c in self.components)

    @property
    def is_spherical(self) -> bool:
        return all(c.is_character and c.kappa == 0 for c in self.components)

    @property
    def is_langlands_ordered(self) -> bool:
        re_t = [c.t.real for c in self.components]
        return all(a >= b for a, b in zip(re_t, re_t[1:]))

    def slots(self) -> List[Tuple[int, SquareIntegrableRep]]:
        """Zero-based starting slot of each component inside GL_n."""
        out, pos = [], 0
        for comp in self.components:
            out.append((pos, comp))
            pos += comp.block_size
        return out

    def __str__(self) -> str:
        return format_descriptor(self)


class GroupKind(str, Enum):
    UNITARY = "U"
    ORTHOGONAL = "O"


def compact_group(fld: LocalField) -> GroupKind:
    return GroupKind.ORTHOGONAL if fld.is_real else GroupKind.UNITARY


@dataclass(frozen=True)
class HighestWeight:
    group: GroupKind
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise DomainError("a highest weight needs at least one entry")
        if any(a < b for a, b in zip(entries, entries[1:])):
            raise DomainError(f"entries must be non-increasing: {entries}")
        if self.group is GroupKind.ORTHOGONAL and orthogonal_shape(entries) is None:
            raise DomainError(f"{entries} is not a highest weight of O({len(entries)})")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def shape(self) -> Tuple[int, int]:
        """(m, eta) for an orthogonal weight (mu_1..mu_m, eta..eta, 0..0)."""
        if self.group is not GroupKind.ORTHOGONAL:
            raise DomainError("shape() is defined for orthogonal weights only")
        return orthogonal_shape(self.entries)  # type: ignore[return-value]

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"


def orthogonal_shape(entries: Sequence[int]) -> Optional[Tuple[int, int]]:
    n = len(entries)
    if any(e < 0 for e in entries):
        return None
    for m in range(n // 2 + 1):
        head, middle, tail = entries[:m], entries[m:n - m], entries[n - m:]
        if any(e < 1 for e in head) or any(e != 0 for e in tail):
            continue
        if len(set(middle)) > 1:
            continue
        eta = middle[0] if middle else 0
        if eta in (0, 1):
            return m, eta
    return None


def is_valid_weight(group: GroupKind, entries: Sequence[int]) -> bool:
    if any(a < b for a, b in zip(entries, entries[1:])):
        return False
    return group is GroupKind.UNITARY or orthogonal_shape(entries) is not None


# --- constructors ---

def character(fld: LocalField, kappa: int, t: complex = 0j) -> SquareIntegrableRep:
    return SquareIntegrableRep(fld, ComponentKind.CHARACTER, kappa, t)


def discrete_series(kappa: int, t: complex = 0j) -> SquareIntegrableRep:
    return SquareIntegrableRep(REAL, ComponentKind.DISCRETE_SERIES, kappa, t)


def descriptor(fld: LocalField, components: Iterable[SquareIntegrableRep]) -> ReprDescriptor:
    return ReprDescriptor(fld, tuple(components))


def spherical(fld: LocalField, ts: Iterable[complex]) -> ReprDescriptor:
    return ReprDescriptor(fld, tuple(character(fld, 0, t) for t in ts))


def concatenate(first: ReprDescriptor, second: ReprDescriptor) -> ReprDescriptor:
    if first.field != second.field:
        raise DomainError("cannot form an isobaric sum over different fields")
    return ReprDescriptor(first.field, first.components + second.components)


def canonicalize(rep: ReprDescriptor) -> ReprDescriptor:
    ordered = tuple(sorted(rep.components, key=lambda c: -c.t.real))
    return ReprDescriptor(rep.field, ordered, was_ordered=ordered == rep.components)


def contragredient(rep: ReprDescriptor) -> ReprDescriptor:
    return canonicalize(ReprDescriptor(rep.field, tuple(c.contragredient() for c in rep.components)))


# --- grammar ---

_UFLOAT = r"(?:inf|nan|(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
_FLOAT = r"[+-]?" + _UFLOAT


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def fail(self, message: str):
        raise DescriptorSyntaxError(message, self.text, self.pos)

    def peek(self, literal: str) -> bool:
        self.skip_ws()
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str) -> None:
        if not self.peek(literal):
            self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def match(self, pattern: str, what: str) -> str:
        self.skip_ws()
        m = re.compile(pattern).match(self.text, self.pos)
        if not m:
            self.fail(f"expected {what}")
        self.pos = m.end()
        return m.group(0)


def _parse_complex(sc: _Scanner) -> complex:
    real = float(sc.match(_FLOAT, "a number"))
    if sc.peek("i"):
        sc.expect("i")
        return complex(0.0, real)
    sc.skip_ws()
    if sc.pos < len(sc.text) and sc.text[sc.pos] in "+-":
        sign = -1.0 if sc.text[sc.pos] == "-" else 1.0
        sc.pos += 1
        imag = float(sc.match(_UFLOAT, "an imaginary part"))
        sc.expect("i")
        return complex(real, sign * imag)
    return complex(real, 0.0)


def _parse_component(sc: _Scanner, fld: LocalField) -> SquareIntegrableRep:
    start = sc.pos
    if sc.peek("chi"):
        sc.expect("chi")
        sc.expect("^")
        kappa = int(sc.match(r"[+-]?\d+", "an integer exponent"))
        kind = ComponentKind.CHARACTER
    elif sc.peek("D"):
        sc.expect("D")
        sc.expect("^")
        kappa = int(sc.match(r"\d+", "a weight"))
        kind = ComponentKind.DISCRETE_SERIES
    else:
        sc.fail("expected 'chi^' or 'D^'")
    sc.expect("t")
    sc.expect("=")
    t = _parse_complex(sc)
    try:
        return SquareIntegrableRep(fld, kind, kappa, t)
    except DomainError as exc:
        raise DomainError(f"{exc} (component starting at position {start})") from None


def parse_complex(text: str, allow_nonfinite: bool = False) -> complex:
    """Inverse of ``format_complex``; inf and nan parts are refused unless ``allow_nonfinite``."""
    sc = _Scanner(text)
    z = _parse_complex(sc)
    if not sc.at_end():
        sc.fail("unexpected text after the number")
    if not allow_nonfinite and not np.isfinite(z):
        raise DomainError(f"expected a finite number, got {text.strip()!r}")
    return z


def parse_descriptor(text: str) -> ReprDescriptor:
    sc = _Scanner(text)
    symbol = sc.match(r"[RC]", "field 'R' or 'C'")
    fld = field_from_symbol(symbol)
    sc.expect(":")
    comps = [_parse_component(sc, fld)]
    while not sc.at_end():
        sc.expect(";")
        comps.append(_parse_component(sc, fld))
    return ReprDescriptor(fld, tuple(comps))


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(float(z.real))
    if z.real == 0:
        return f"{z.imag!r}i"
    sign = "-" if z.imag < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def format_component(comp: SquareIntegrableRep) -> str:
    head = "chi" if comp.is_character else "D"
    return f"{head}^{comp.kappa} t={format_complex(comp.t)}"


def format_descriptor(rep: ReprDescriptor) -> str:
    return f"{rep.field.symbol}: " + " ; ".join(format_component(c) for c in rep.components)
