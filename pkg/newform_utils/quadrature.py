"""Quadrature engine shared by the analytic modules.

Double-exponential rules are nested in the step size, so refining a level only
evaluates the new (odd) nodes; the reported error is the difference between the
last two levels. Integrands are vectorized: ``f(x)`` receives an array of nodes
of shape ``(m,)`` and returns an array of shape ``(..., m)``; leading axes are
carried through as a batch.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from newform_utils.conventions import CONVENTIONS
from newform_utils.errors import BudgetExceeded, DomainError
from newform_utils.repcore import LocalField

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * np.pi


class Scheme(str, Enum):
    GAUSS_LEGENDRE = "gauss_legendre"
    DOUBLE_EXPONENTIAL = "double_exponential"
    TENSOR_PRODUCT = "tensor_product"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: Scheme = Scheme.DOUBLE_EXPONENTIAL
    level: int = 4
    max_level: int = 9
    tolerance: float = 1e-10
    abs_tolerance: float = 1e-14
    points: int = 32
    samples: int = 20000
    seed: int = 0
    angular_points: int = 16
    panels: int = 24
    budget: int = 2_000_000

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.tolerance > 0 or self.abs_tolerance < 0:
            raise DomainError(f"tolerances must be positive, got {self.tolerance}, {self.abs_tolerance}")
        if not 1 <= self.level <= self.max_level <= 14:
            raise DomainError(f"need 1 <= level <= max_level <= 14, got {self.level}, {self.max_level}")
        if self.points < 2 or self.samples < 2 or self.angular_points < 1 or self.panels < 4:
            raise DomainError("points, samples, angular_points and panels are too small")
        if self.budget <= 0:
            raise DomainError(f"node budget must be positive, got {self.budget}")

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)

    def refined(self, steps: int = 1) -> "QuadratureSpec":
        """Same rule one (or more) level finer, used for two-level self-consistency checks."""
        max_level = min(14, self.max_level + steps)
        return replace(
            self,
            level=min(self.level + steps, max_level),
            max_level=max_level,
            points=self.points * 2 ** steps,
            angular_points=self.angular_points * 2 ** steps,
        )


# --- domains ---

@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError(f"empty interval [{self.a}, {self.b}]")


@dataclass(frozen=True)
class HalfLine:
    """[a, oo); the integrand should decay at least algebraically."""

    a: float = 0.0


@dataclass(frozen=True)
class RealLine:
    pass


@dataclass(frozen=True)
class Product:
    factors: Tuple[Union[Interval, HalfLine, RealLine], ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise DomainError("a product domain needs at least one factor")


Domain = Union[Interval, HalfLine, RealLine, Product]


@dataclass
class QuadratureResult:
    value: Union[complex, np.ndarray]
    error: Union[float, np.ndarray]
    converged: bool
    evaluations: int
    level: int = 0


def check_budget(nodes: int, budget: int) -> None:
    if nodes > budget:
        raise BudgetExceeded(nodes, budget)


def _accepts(value, error, spec: QuadratureSpec) -> bool:
    return bool(np.all(error <= spec.tolerance * np.abs(value) + spec.abs_tolerance))


# --- double-exponential rules ---

def _t_range(domain) -> Tuple[float, float]:
    if isinstance(domain, Interval):
        return -3.5, 3.5
    if isinstance(domain, HalfLine):
        return -4.5, 4.0
    if isinstance(domain, RealLine):
        return -4.0, 4.0
    raise DomainError(f"no double-exponential map for {domain!r}")


def _de_map(domain, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes x(t) and Jacobians x'(t)."""
    u = HALF_PI * np.sinh(t)
    du = HALF_PI * np.cosh(t)
    if isinstance(domain, Interval):
        c, d = 0.5 * (domain.a + domain.b), 0.5 * (domain.b - domain.a)
        # distance to the nearer endpoint, kept accurate near the ends
        gap = d * 2.0 / (1.0 + np.exp(2.0 * np.abs(u)))
        x = np.where(u < 0, domain.a + gap, domain.b - gap)
        x = np.where(np.abs(u) < 1.0, c + d * np.tanh(u), x)
        w = d * du / np.cosh(u) ** 2
        keep = (x > domain.a) & (x < domain.b)
        return x[keep], w[keep]
    if isinstance(domain, HalfLine):
        e = np.exp(u)
        return domain.a + e, du * e
    return np.sinh(u), du * np.cosh(u)


def de_nodes(domain, level: int, odd_only: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights (step included) of the DE rule with step 2**-level.

    With ``odd_only`` only the nodes new at this level are returned, weighted
    with the step of this level.
    """
    lo, hi = _t_range(domain)
    h = 2.0 ** -level
    k = np.arange(int(np.ceil(lo / h)), int(np.floor(hi / h)) + 1)
    if odd_only:
        k = k[k % 2 != 0]
    x, w = _de_map(domain, k * h)
    return x, w * h


def _nested_de(f: Callable, domain, spec: QuadratureSpec) -> QuadratureResult:
    x, w = de_nodes(domain, spec.level)
    total = np.sum(np.asarray(f(x)) * w, axis=-1)
    evaluations = x.size
    previous, error = None, np.inf
    for level in range(spec.level + 1, spec.max_level + 1):
        xn, wn = de_nodes(domain, level, odd_only=True)
        evaluations += xn.size
        check_budget(evaluations, spec.budget)
        previous = total
        total = 0.5 * total + np.sum(np.asarray(f(xn)) * wn, axis=-1)
        error = np.abs(total - previous)
        logger.debug("DE level %d: %d nodes, max error %.3e", level, evaluations, np.max(error))
        if _accepts(total, error, spec):
            return QuadratureResult(total, error, True, evaluations, level)
    return QuadratureResult(total, error, False, evaluations, spec.max_level)


# --- Gauss rules ---

def gauss_legendre(points: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(points)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def _gauss_legendre(f: Callable, domain: Interval, spec: QuadratureSpec) -> QuadratureResult:
    x1, w1 = gauss_legendre(spec.points, domain.a, domain.b)
    x2, w2 = gauss_legendre(2 * spec.points, domain.a, domain.b)
    coarse = np.sum(np.asarray(f(x1)) * w1, axis=-1)
    fine = np.sum(np.asarray(f(x2)) * w2, axis=-1)
    error = np.abs(fine - coarse)
    return QuadratureResult(fine, error, _accepts(fine, error, spec), x1.size + x2.size, 0)


# --- tensor products and Monte Carlo ---

def _tensor_at(f: Callable, domain: Product, level: int, budget: int):
    rules = [de_nodes(d, level) for d in domain.factors]
    check_budget(int(np.prod([x.size for x, _ in rules])), budget)
    grids = np.meshgrid(*[x for x, _ in rules], indexing="ij")
    weights = np.ones(grids[0].shape)
    for axis, (_, w) in enumerate(rules):
        shape = [1] * len(rules)
        shape[axis] = w.size
        weights = weights * w.reshape(shape)
    values = np.asarray(f(*grids))
    return np.sum(values * weights), grids[0].size


def _tensor(f: Callable, domain: Product, spec: QuadratureSpec) -> QuadratureResult:
    previous, evaluations = None, 0
    value, error = None, np.inf
    for level in range(spec.level, spec.max_level + 1):
        value, count = _tensor_at(f, domain, level, spec.budget)
        evaluations += count
        if previous is not None:
            error = abs(value - previous)
            logger.debug("tensor level %d: %d nodes, error %.3e", level, count, error)
            if _accepts(value, error, spec):
                return QuadratureResult(value, error, True, evaluations, level)
        previous = value
    return QuadratureResult(value, error, False, evaluations, spec.max_level)


def _monte_carlo(f: Callable, domain, spec: QuadratureSpec) -> QuadratureResult:
    factors = domain.factors if isinstance(domain, Product) else (domain,)
    if not all(isinstance(d, Interval) for d in factors):
        raise DomainError("Monte Carlo integration needs a bounded box")
    check_budget(spec.samples, spec.budget)
    rng = np.random.default_rng(spec.seed)
    lows = np.array([d.a for d in factors])
    highs = np.array([d.b for d in factors])
    pts = lows + (highs - lows) * rng.random((spec.samples, len(factors)))
    volume = float(np.prod(highs - lows))
    values = np.asarray(f(*pts.T))
    value = volume * np.mean(values)
    error = volume * np.std(values) / np.sqrt(spec.samples)
    return QuadratureResult(value, error, _accepts(value, error, spec), spec.samples, 0)


def integrate(f: Callable, domain: Domain, spec: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """Integrate ``f`` over ``domain`` with the rule selected by ``spec.scheme``.

    Args:
        f: vectorized integrand; one array argument per coordinate.
        domain: Interval, HalfLine, RealLine or a Product of those.
        spec: rule, levels and tolerances.

    Returns:
        QuadratureResult with the value, the nested-rule error estimate and a
        ``converged`` flag (False when the estimate still exceeds the tolerance
        at ``max_level``).
    """
    spec = spec or QuadratureSpec()
    if spec.scheme is Scheme.MONTE_CARLO:
        return _monte_carlo(f, domain, spec)
    if isinstance(domain, Product):
        if len(domain.factors) == 1:
            return integrate(f, domain.factors[0], spec)
        return _tensor(f, domain, spec)
    if spec.scheme is Scheme.GAUSS_LEGENDRE:
        if not isinstance(domain, Interval):
            raise DomainError("Gauss-Legendre needs a finite interval")
        return _gauss_legendre(f, domain, spec)
    return _nested_de(f, domain, spec)


def unit_circle(fld: LocalField, angular_points: int) -> np.ndarray:
    """Equally weighted sample of the norm-one elements of F."""
    if fld.is_real:
        return np.array([1.0, -1.0])
    return np.exp(2j * np.pi * np.arange(angular_points) / angular_points)


def integrate_units(f: Callable, fld: LocalField, spec: Optional[QuadratureSpec] = None,
                    angular_points: Optional[int] = None) -> QuadratureResult:
    """Integral of ``f`` over F^x against the multiplicative Haar measure d^x x.

    ``f`` is called with a 2-d array of field elements, radii along the first
    axis and unit-circle points along the second; leading batch axes of the
    result are preserved.
    """
    spec = spec or QuadratureSpec()
    units = unit_circle(fld, angular_points or spec.angular_points)
    scale = CONVENTIONS.radial_factor(fld)

    def radial(r):
        values = np.asarray(f(r[:, None] * units[None, :]))
        return scale * np.mean(values, axis=-1) / r

    return _nested_de(radial, HalfLine(0.0), spec.with_(scheme=Scheme.DOUBLE_EXPONENTIAL))


# --- oscillatory integrals ---

def wynn_epsilon(partial: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Accelerate partial sums (axis 0) with Wynn's epsilon algorithm.

    Returns the deepest even-column estimate and its distance to the previous one.
    Extrapolation stops, per batch element, at the first column holding a
    numerically zero difference; that element keeps its last estimate.
    """
    partial = np.asarray(partial)
    if partial.shape[0] < 2:
        return partial[-1], np.zeros(partial.shape[1:])[()]
    eps = 64 * np.finfo(float).eps
    estimate = partial[-1].copy()
    error = np.abs(partial[-1] - partial[-2])
    stopped = np.zeros(partial.shape[1:], dtype=bool)
    prev = np.zeros_like(partial)
    cur = partial
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(partial.shape[0] - 1):
            diff = cur[1:] - cur[:-1]
            scale = np.maximum(np.abs(cur[1:]), np.abs(cur[:-1]))
            degenerate = ~(np.abs(diff) > eps * scale)
            stopped = stopped | np.any(degenerate, axis=0)
            if np.all(stopped):
                break
            nxt = prev[1:cur.shape[0]] + 1.0 / np.where(degenerate, 1.0, diff)
            prev, cur = cur, nxt
            if k % 2 == 1:
                take = ~stopped & np.isfinite(cur[-1])
                error = np.where(take, np.abs(cur[-1] - estimate), error)
                estimate = np.where(take, cur[-1], estimate)
    return estimate[()], error[()]


def _one_sided(G: Callable, omega: float, phase: float, trig: Callable, head: float,
               spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray, int]:
    """int_0^oo G(x) trig(omega x) dx with panels between consecutive zeros of trig."""
    period = np.pi / omega
    first = int(np.ceil(head / period - phase))
    breaks = (np.arange(first, first + spec.panels + 1) + phase) * period
    head_result = _nested_de(lambda x: G(x) * trig(omega * x), Interval(0.0, breaks[0]), spec)
    xg, wg = leggauss(spec.points)
    half = 0.5 * period
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    nodes = (mids[:, None] + half * xg[None, :]).ravel()
    values = np.asarray(G(nodes)) * trig(omega * nodes)
    values = values.reshape(values.shape[:-1] + (spec.panels, spec.points))
    panel_sums = np.sum(values * (half * wg), axis=-1)
    partial = head_result.value[..., None] + np.cumsum(panel_sums, axis=-1)
    tail, tail_error = wynn_epsilon(np.moveaxis(partial, -1, 0))
    return tail, head_result.error + tail_error, head_result.evaluations + nodes.size


def oscillatory_fourier(F: Callable, omega: float, spec: Optional[QuadratureSpec] = None,
                        head: float = 2.0) -> QuadratureResult:
    """int_R F(x) exp(-i omega x) dx for F decaying at least algebraically.

    The integral is split into even and odd parts of F against cos and sin;
    [0, head] (extended to the next zero) is done with tanh-sinh and the tail
    as a sequence of half-period panels accelerated with Wynn's epsilon.
    """
    spec = spec or QuadratureSpec()

    def even(x):
        return F(x) + F(-x)

    def odd(x):
        return F(x) - F(-x)

    cos_part, cos_err, n1 = _one_sided(even, omega, 0.5, np.cos, head, spec)
    sin_part, sin_err, n2 = _one_sided(odd, omega, 0.0, np.sin, head, spec)
    value = cos_part - 1j * sin_part
    error = cos_err + sin_err
    return QuadratureResult(value, error, _accepts(value, error, spec), 2 * (n1 + n2), spec.level)
