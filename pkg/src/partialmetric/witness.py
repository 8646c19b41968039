"""A fixed-point-free self-map of an incomplete space satisfying condition (b).

The space is ``((0, 1], max)`` whose completion adds ``u = 0``.  Points are
sorted into shells ``P_n = {x : p(x, u) <= b**n}``; ``n(x)`` is the deepest
shell containing ``x`` and ``k(n)`` is the first index after which the
sequence ``x_i = 1/i`` stays inside ``P_n``.  The map sends ``x`` to
``x_{k(n(x) + 2)}`` (or ``x_{k(2)}`` when ``n(x) <= 0``), always two shells
deeper, so it contracts towards ``u`` and never fixes a point.

Shell boundaries ``b**n`` are compared as correctly rounded doubles, which
puts ``0.2``, ``0.04``, ``1/625`` and so on exactly on their boundaries.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .contraction import SelfMap, check_condition_b
from .core import DomainError, Point
from .solver import verify_fixed_point
from .spaces import CompletionView, make_punctured_interval

DEFAULT_INDEX_BUDGET = 10**300
WARM_RANGE = range(0, 201)


class IndexBudgetExceeded(RuntimeError):
    """``k(n)`` is larger than the configured index budget."""


def _as_fraction(b) -> Fraction:
    if isinstance(b, float):
        return Fraction(repr(b))
    return Fraction(b)


@dataclass(frozen=True)
class WitnessMap:
    view: CompletionView = field(default_factory=make_punctured_interval)
    b: Fraction = Fraction(1, 5)
    r: float = 0.5
    index_budget: int = DEFAULT_INDEX_BUDGET
    k_cache: dict = field(default_factory=dict, compare=False, repr=False)
    _powers: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        b = _as_fraction(self.b)
        if not 0 < b < 1:
            raise ValueError(f"b must lie in (0, 1), got {self.b!r}")
        object.__setattr__(self, "b", b)
        for n in WARM_RANGE:
            self._powers[n] = self._power(n)
        for n in WARM_RANGE:
            try:
                self.k_cache[n] = self._k(n)
            except IndexBudgetExceeded:
                break

    @property
    def u(self) -> Point:
        return self.view.u

    def seq(self, i: int) -> float:
        return float(self.view.sequence(i))

    def p_u(self, x: Point) -> float:
        return self.view.eval(x, self.u)

    def _power(self, n: int) -> float:
        return float(self.b**n)

    def power(self, n: int) -> float:
        """``b**n`` as the correctly rounded double."""
        got = self._powers.get(n)
        return self._power(n) if got is None else got

    def in_shell(self, x: Point, n: int) -> bool:
        return self.p_u(x) <= self.power(n)

    def _k(self, n: int) -> int:
        if n <= 0:
            return 1
        hi = math.ceil(1 / self.b**n)
        if hi > self.index_budget:
            raise IndexBudgetExceeded(
                f"k({n}) >= {hi:.3e} exceeds the index budget {self.index_budget:.3e}"
            )
        # first index whose double lands in the shell; x_i is nonincreasing
        lo = max(1, hi - (hi >> 40) - 2)
        if self.seq(lo) <= self.power(n):
            lo = 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.seq(mid) <= self.power(n):
                hi = mid
            else:
                lo = mid + 1
        return hi


def partition_index(w: WitnessMap, x: Point) -> int:
    """Largest integer ``n`` with ``p(x, u) <= b**n``."""
    x = w.view.base.validate(x)
    v = w.p_u(x)
    if v <= 0:
        raise DomainError(f"p({x!r}, u) = {v!r}; the shell index needs p(x, u) > 0")
    n = math.floor(math.log(v) / math.log(w.b))
    while w.in_shell(x, n + 1):
        n += 1
    while not w.in_shell(x, n):
        n -= 1
    return n


def stabilization_index(w: WitnessMap, n: int) -> int:
    """Smallest ``k`` with ``x_i`` in ``P_n`` for every ``i >= k``."""
    got = w.k_cache.get(n)
    return w._k(n) if got is None else got


def apply_witness(w: WitnessMap, x: Point) -> Point:
    n = partition_index(w, x)
    return w.seq(stabilization_index(w, 2 if n <= 0 else n + 2))


def as_selfmap(w: WitnessMap) -> SelfMap:
    # orbits revisit the same sequence points; the map is pure so memoise it
    cached = functools.lru_cache(maxsize=1 << 16)(lambda x: apply_witness(w, x))
    return SelfMap(cached, label=f"witness(b={w.b})")


@dataclass(frozen=True)
class WitnessAudit:
    samples: int
    seed: int
    b: Fraction
    r: float
    eps: float
    checks: dict
    worst_margins: dict
    image_diameter_sampled: float
    image_diameter_closed_form: float

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "b": float(self.b),
            "r": self.r,
            "eps": self.eps,
            "checks": dict(self.checks),
            "worst_margins": dict(self.worst_margins),
            "image_diameter": {
                "sampled": self.image_diameter_sampled,
                "closed_form": self.image_diameter_closed_form,
            },
            "passed": self.passed,
        }


def audit_witness(
    w: WitnessMap, samples: int = 10_000, seed: int = 0, eps: float = 1e-12, depth: int = 64
) -> WitnessAudit:
    """Check, on sampled points and pairs, every inequality the construction relies on.

    Per point: no pm1 fixed point at ``eps``; ``p(fx,u) <= b p(x,u)``;
    ``p(fx,u) <= b/(1-b) p(x,fx)``.  Per pair: condition (b) at ``depth``
    and the finiteness bound
    ``delta(O(x,y,f)) <= p(x,y) + p(x,fx) + p(y,fy) + delta(f(X))``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    space = w.view.base
    f = as_selfmap(w)
    rng = np.random.default_rng(seed)
    xs = [space.sampler(rng) for _ in range(samples)]
    ys = [space.sampler(rng) for _ in range(samples)]
    b = float(w.b)
    ratio = float(w.b / (1 - w.b))

    no_fixed, m_contract, m_iii = True, math.inf, math.inf
    images = {}
    for x in xs:
        fx = f(x)
        images[x] = fx
        fixed, _ = verify_fixed_point(space, f, x, eps)
        no_fixed = no_fixed and not fixed and fx != x
        m_contract = min(m_contract, b * w.p_u(x) - w.p_u(fx))
        m_iii = min(m_iii, ratio * space.eval(x, fx) - w.p_u(fx))

    for y in ys:
        images.setdefault(y, f(y))
    img = sorted(set(images.values()))
    image_diam = float(space.pairwise(img).max())
    closed_form = space.eval(w.seq(stabilization_index(w, 2)), w.seq(stabilization_index(w, 2)))

    verdict = check_condition_b(space, f, w.r, list(zip(xs, ys)), depth)
    m_fin = math.inf
    for rec in verdict.records:
        x, y = rec.x, rec.y
        bound = (
            space.eval(x, y) + space.eval(x, images[x]) + space.eval(y, images[y]) + image_diam
        )
        m_fin = min(m_fin, bound - rec.delta_depth)

    checks = {
        "no_fixed_point": no_fixed,
        "contraction_to_u": m_contract >= 0,
        "bound_iii": m_iii >= 0,
        "condition_b": verdict.satisfied,
        "finiteness": m_fin >= 0,
    }
    margins = {
        "contraction_to_u": m_contract,
        "bound_iii": m_iii,
        "condition_b": verdict.worst_margin,
        "finiteness": m_fin,
    }
    return WitnessAudit(
        samples, seed, w.b, w.r, eps, checks, margins, image_diam, closed_form
    )
