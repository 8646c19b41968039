"""Orbits, orbit diameters, gauge functions and contraction-condition checks.

Orbits include their seed: ``O(x, f) = {f^0 x, f^1 x, ...}``.  The
diameter of a set is the supremum of ``p`` over all pairs drawn from it,
diagonal pairs included, so a one-point set has diameter ``p(x, x)``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ContractError, DomainError, Point

DEFAULT_CAP = 1e12
DEFAULT_PSI_GRID = tuple(float(t) for t in np.geomspace(1e-6, 1e2, 161))
DECAY_FLOOR = 1e-9
DEFAULT_DECAY_BUDGET = 100_000


@dataclass(frozen=True)
class SelfMap:
    apply: Callable[[Point], Point]
    label: str = "f"

    def __call__(self, x: Point) -> Point:
        return self.apply(x)


def spot_check_selfmap(space, f: SelfMap, samples: int = 100, seed: int = 0) -> None:
    """Raise :class:`DomainError` if ``f`` sends a sampled point outside the carrier."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = space.sampler(rng)
        fx = f(x)
        if not space.contains(fx):
            raise DomainError(f"{f.label} maps {x!r} to {fx!r}, outside {space.label}")


@dataclass(frozen=True)
class OrbitRecord:
    seeds: tuple
    depth: int
    points: tuple
    diameter_at_depth: tuple
    divergence_flag: bool
    # True when the truncated set is closed under f on a finite carrier,
    # i.e. the diameter is the exact orbit diameter.
    exact: bool = False

    @property
    def diameter(self) -> float:
        return self.diameter_at_depth[-1]


def iterate(space, f: SelfMap, x: Point, depth: int) -> list:
    """``[x, f x, ..., f^depth x]``, each iterate checked against the carrier."""
    pts = [space.validate(x)]
    for k in range(depth):
        nxt = f(pts[-1])
        if not space.contains(nxt):
            raise DomainError(
                f"{f.label}: iterate {k + 1} = {nxt!r} leaves {space.label}"
            )
        pts.append(nxt)
    return pts


def _looks_divergent(diam: Sequence[float], cap: float) -> bool:
    last = diam[-1]
    if not math.isfinite(last) or last > cap:
        return True
    d = len(diam) - 1
    if d < 2:
        return False
    h = d // 2
    first, second = diam[h] - diam[0], diam[d] - diam[h]
    # geometric stabilisation makes the second half grow less than the first
    return second > 0 and second >= first


def orbit_diameter(
    space, f: SelfMap, x: Point, y: Optional[Point] = None, depth: int = 64,
    cap: float = DEFAULT_CAP,
) -> OrbitRecord:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    xs = iterate(space, f, x, depth)
    ys = iterate(space, f, y, depth) if y is not None else None

    if ys is None:
        order = xs
        per_level = 1
    else:
        order = [p for pair in zip(xs, ys) for p in pair]
        per_level = 2
    m = space.pairwise(order)
    row_max = np.tril(m).max(axis=1)
    level_max = row_max.reshape(depth + 1, per_level).max(axis=1)
    diam = tuple(float(v) for v in np.maximum.accumulate(level_max))

    exact = False
    if getattr(space, "is_finite", False):
        members = set(order)
        exact = f(xs[-1]) in members and (ys is None or f(ys[-1]) in members)

    seeds = (xs[0],) if ys is None else (xs[0], ys[0])
    points = tuple(xs) if ys is None else tuple(xs) + tuple(ys)
    return OrbitRecord(seeds, depth, points, diam, _looks_divergent(diam, cap), exact)


@dataclass(frozen=True)
class PsiAudit:
    grid_size: int
    zero_at_origin: bool
    monotone_failures: tuple
    not_below_identity: tuple
    right_continuity_falsified: tuple
    decay_iterations: Optional[int]
    decay_budget: int

    @property
    def passed(self) -> bool:
        return (
            self.zero_at_origin
            and not self.monotone_failures
            and not self.not_below_identity
            and not self.right_continuity_falsified
            and self.decay_iterations is not None
        )

    @property
    def right_continuity(self) -> str:
        return "falsified" if self.right_continuity_falsified else "not falsified"

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "grid_size": self.grid_size,
            "zero_at_origin": self.zero_at_origin,
            "monotone_failures": [list(p) for p in self.monotone_failures],
            "not_below_identity": list(self.not_below_identity),
            "right_continuity": self.right_continuity,
            "right_continuity_falsified": list(self.right_continuity_falsified),
            "decay_iterations": self.decay_iterations,
            "decay_budget": self.decay_budget,
        }


@dataclass(frozen=True)
class PsiSpec:
    eval: Callable[[float], float]
    label: str = "psi"
    audit: Optional[PsiAudit] = field(default=None, compare=False)

    def __call__(self, t: float) -> float:
        return self.eval(t)


def audit_psi(
    psi: PsiSpec,
    grid: Sequence[float] = DEFAULT_PSI_GRID,
    right_limit_steps: int = 12,
    decay_budget: int = DEFAULT_DECAY_BUDGET,
) -> PsiAudit:
    """Falsification audit of gauge membership on a grid.

    Right-continuity can only be falsified, never confirmed, at sampling
    resolution; the decay check iterates ``s -> psi(s)`` from ``max(grid)``
    and records how many steps it takes to drop below ``DECAY_FLOOR``.
    """
    g = [float(t) for t in grid]
    if not g or any(t <= 0 for t in g) or any(a > b for a, b in zip(g, g[1:])):
        raise ValueError("grid must be nonempty, positive and sorted ascending")
    vals = [psi(t) for t in g]

    monotone = tuple((a, b) for a, b, va, vb in zip(g, g[1:], vals, vals[1:]) if vb < va)
    above = tuple(t for t, v in zip(g, vals) if not v < t)

    jumps = []
    for t, v in zip(g, vals):
        gap = abs(psi(t + 10.0 ** -right_limit_steps) - v)
        if gap > 1e-6 * max(1.0, abs(v)):
            jumps.append(t)

    s, steps = g[-1], 0
    while s >= DECAY_FLOOR and steps < decay_budget:
        s = psi(s)
        steps += 1
    return PsiAudit(
        grid_size=len(g),
        zero_at_origin=psi(0.0) == 0.0,
        monotone_failures=monotone,
        not_below_identity=above,
        right_continuity_falsified=tuple(jumps),
        decay_iterations=steps if s < DECAY_FLOOR else None,
        decay_budget=decay_budget,
    )


def certify_psi(psi: PsiSpec, **audit_kwargs) -> PsiSpec:
    """Return ``psi`` with its audit attached, as required by condition checks."""
    return replace(psi, audit=audit_psi(psi, **audit_kwargs))


@functools.lru_cache(maxsize=64)
def linear_psi(r: float) -> PsiSpec:
    """Audited ``psi(t) = r t``; the decay budget is sized from ``r``."""
    if not 0 <= r < 1:
        raise ValueError(f"r must lie in [0, 1), got {r!r}")
    s0 = DEFAULT_PSI_GRID[-1]
    need = 1 if r == 0 else math.ceil(math.log(s0 / DECAY_FLOOR) / math.log(1 / r)) + 10
    return certify_psi(
        PsiSpec(lambda t: r * t, f"{r!r}*t"), decay_budget=max(need, DEFAULT_DECAY_BUDGET)
    )


class ConditionKind(str, enum.Enum):
    SATISFIED = "Satisfied"
    INCONCLUSIVE = "Inconclusive"
    VIOLATED_EXACT = "ViolatedExact"


_SEVERITY = {ConditionKind.SATISFIED: 0, ConditionKind.INCONCLUSIVE: 1, ConditionKind.VIOLATED_EXACT: 2}


@dataclass(frozen=True)
class PairRecord:
    x: Point
    y: Point
    p_fxfy: float
    delta_depth: Optional[float]
    bound: float
    margin: float
    verdict: ConditionKind

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "p_fxfy": self.p_fxfy,
            "delta_depth": self.delta_depth,
            "bound": self.bound,
            "margin": self.margin,
            "verdict": self.verdict.value,
        }


@dataclass(frozen=True)
class ConditionVerdict:
    kind: ConditionKind
    checked_pairs: int
    worst_margin: float
    depth: int
    records: tuple = ()
    p_adapted: bool = False

    @property
    def satisfied(self) -> bool:
        return self.kind is ConditionKind.SATISFIED

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "checked_pairs": self.checked_pairs,
            "worst_margin": self.worst_margin,
            "depth": self.depth,
            "p_adapted": self.p_adapted,
            "pairs": [r.to_dict() for r in self.records],
        }


def _summarise(records, depth, p_adapted=False) -> ConditionVerdict:
    kind = max((r.verdict for r in records), key=_SEVERITY.get, default=ConditionKind.SATISFIED)
    worst = min((r.margin for r in records), default=math.inf)
    return ConditionVerdict(kind, len(records), worst, depth, tuple(records), p_adapted)


def merge_verdicts(*parts: ConditionVerdict) -> ConditionVerdict:
    """Combine verdicts computed on disjoint partitions of a pair list."""
    if not parts:
        raise ValueError("nothing to merge")
    records = [r for v in parts for r in v.records]
    return _summarise(records, parts[0].depth, parts[0].p_adapted)


def check_condition_a(
    space, f: SelfMap, psi: PsiSpec, pairs, depth: int = 64
) -> ConditionVerdict:
    """Check ``p(fx, fy) <= psi(delta(O(x, y, f)))`` pair by pair.

    The diameter is taken over orbits truncated at ``depth``; it can only
    grow with depth and ``psi`` is nondecreasing, so a pair that holds at
    the truncated diameter holds at the true one.  A failing pair is
    ``ViolatedExact`` only when the truncated orbit set is already closed
    under ``f`` on a finite carrier, otherwise ``Inconclusive``.
    """
    if psi.audit is None:
        raise ContractError(f"{psi.label} has not been audited; use certify_psi first")
    if not psi.audit.passed:
        raise ContractError(f"{psi.label} failed its audit: {psi.audit.to_dict()}")
    records = []
    for x, y in pairs:
        orb = orbit_diameter(space, f, x, y, depth)
        if depth:
            fx, fy = orb.points[1], orb.points[depth + 2]
        else:
            fx, fy = f(orb.seeds[0]), f(orb.seeds[1])
        lhs = space.eval(fx, fy)
        delta = orb.diameter
        bound = psi(delta)
        margin = bound - lhs
        if margin >= 0:
            kind = ConditionKind.SATISFIED
        elif orb.exact:
            kind = ConditionKind.VIOLATED_EXACT
        else:
            kind = ConditionKind.INCONCLUSIVE
        records.append(PairRecord(orb.seeds[0], orb.seeds[1], lhs, delta, bound, margin, kind))
    return _summarise(records, depth)


def check_condition_b(space, f: SelfMap, r: float, pairs, depth: int = 64) -> ConditionVerdict:
    """``check_condition_a`` with the linear gauge ``psi(t) = r t``."""
    if not 0 <= r < 1:
        raise ValueError(f"r must lie in [0, 1), got {r!r}")
    return check_condition_a(space, f, linear_psi(r), pairs, depth)


class Classical(str, enum.Enum):
    KANNAN = "K"
    CHATTERJEA = "Ch"


def check_kannan_chatterjea(
    space, f: SelfMap, alpha: float, which: Classical | str, pairs
) -> ConditionVerdict:
    """Kannan or Chatterjea inequality with ``p`` in place of a metric.

    No orbit truncation is involved, so a failing pair is an exact
    violation.  Reports are flagged ``p_adapted``.
    """
    if not 0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2), got {alpha!r}")
    which = Classical(which)
    records = []
    for x, y in pairs:
        x, y = space.validate(x), space.validate(y)
        fx, fy = f(x), f(y)
        lhs = space.eval(fx, fy)
        if which is Classical.KANNAN:
            bound = alpha * (space.eval(x, fx) + space.eval(y, fy))
        else:
            bound = alpha * (space.eval(x, fy) + space.eval(y, fx))
        margin = bound - lhs
        kind = ConditionKind.SATISFIED if margin >= 0 else ConditionKind.VIOLATED_EXACT
        records.append(PairRecord(x, y, lhs, None, bound, margin, kind))
    return _summarise(records, 0, p_adapted=True)
