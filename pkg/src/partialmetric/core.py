"""Partial metric spaces: evaluation, axiom auditing and ball membership.

A partial metric ``p`` on a set ``X`` is a nonnegative symmetric function
whose self-distance ``p(x, x)`` may be positive.  It must satisfy

* pm1: ``x == y`` iff ``p(x, x) == p(x, y) == p(y, y)``
* pm2: ``0 <= p(x, x) <= p(x, y)``
* pm3: ``p(x, y) == p(y, x)``
* pm4: ``p(x, y) + p(z, z) <= p(x, z) + p(z, y)``

Points are plain Python values: floats for the interval carriers and
integer indices for finite tables.
"""
from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

Point = Any


class DomainError(ValueError):
    """A point lies outside the carrier of its space."""


class ContractError(RuntimeError):
    """An operation was called without its documented precondition."""


class CarrierKind(enum.Enum):
    NONNEGATIVE_REALS = "nonnegative_reals"
    PUNCTURED_UNIT_INTERVAL = "punctured_unit_interval"
    FINITE_TABLE = "finite_table"


class Axiom(str, enum.Enum):
    PM1 = "pm1"
    PM2 = "pm2"
    PM3 = "pm3"
    PM4 = "pm4"


@dataclass(frozen=True)
class PartialMetricSpace:
    kind: CarrierKind
    eval: Callable[[Point, Point], float]
    sampler: Callable[[np.random.Generator], Point]
    label: str
    # Vectorised evaluator over equal-shape arrays; optional speed path.
    veval: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    table: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @property
    def is_finite(self) -> bool:
        return self.kind is CarrierKind.FINITE_TABLE

    @property
    def size(self) -> Optional[int]:
        return None if self.table is None else self.table.shape[0]

    def points(self) -> range:
        if not self.is_finite:
            raise ContractError(f"{self.label}: only finite tables can be enumerated")
        return range(self.size)

    def validate(self, x: Point) -> Point:
        kind = self.kind
        if kind is CarrierKind.FINITE_TABLE:
            if isinstance(x, bool) or not isinstance(x, numbers.Integral):
                raise DomainError(f"{self.label}: point {x!r} is not an integer index")
            if not 0 <= x < self.size:
                raise DomainError(
                    f"{self.label}: index {x} outside carrier 0..{self.size - 1}"
                )
            return int(x)
        if type(x) is not float:
            if isinstance(x, bool) or not isinstance(x, numbers.Real):
                raise DomainError(f"{self.label}: point {x!r} is not a real number")
            x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"{self.label}: point {x!r} is not finite")
        if kind is CarrierKind.NONNEGATIVE_REALS and x < 0:
            raise DomainError(f"{self.label}: point {x!r} violates lower bound x >= 0")
        if kind is CarrierKind.PUNCTURED_UNIT_INTERVAL:
            if x <= 0:
                raise DomainError(f"{self.label}: point {x!r} violates lower bound x > 0")
            if x > 1:
                raise DomainError(f"{self.label}: point {x!r} violates upper bound x <= 1")
        return x

    def contains(self, x: Point) -> bool:
        try:
            self.validate(x)
        except DomainError:
            return False
        return True

    def same_point(self, x: Point, y: Point, tol: float = 0.0) -> bool:
        if self.is_finite:
            return x == y
        return abs(x - y) <= tol

    def pairwise(self, xs: Sequence[Point]) -> np.ndarray:
        """Matrix ``M[i, j] = p(xs[i], xs[j])``."""
        if self.veval is not None:
            a = np.asarray(xs)
            return self.veval(a[:, None], a[None, :])
        m = len(xs)
        out = np.empty((m, m))
        for i in range(m):
            for j in range(i, m):
                out[i, j] = out[j, i] = self.eval(xs[i], xs[j])
        return out


@dataclass(frozen=True)
class Violation:
    axiom: Axiom
    witness: tuple
    residual: float


@dataclass(frozen=True)
class AxiomAuditReport:
    trials: int
    violations: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def by_axiom(self, axiom: Axiom) -> list:
        return [v for v in self.violations if v.axiom is axiom]

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "passed": self.passed,
            "violations": [
                {"axiom": v.axiom.value, "witness": list(v.witness), "residual": v.residual}
                for v in self.violations
            ],
        }


def eval_p(space: PartialMetricSpace, x: Point, y: Point) -> float:
    x = space.validate(x)
    y = space.validate(y)
    return space.eval(x, y)


def _pair_violations(space, x, y, tol):
    pxx, pxy, pyx, pyy = space.eval(x, x), space.eval(x, y), space.eval(y, x), space.eval(y, y)
    found = []
    if pxy < -tol:
        found.append(Violation(Axiom.PM2, (x, y), -pxy))
    for self_d in (pxx, pyy):
        if self_d < -tol:
            found.append(Violation(Axiom.PM2, (x, y), -self_d))
    # pm2 in both orientations; residual is the larger excess
    excess = max(pxx - pxy, pyy - pyx)
    if excess > tol:
        found.append(Violation(Axiom.PM2, (x, y), excess))
    if abs(pxy - pyx) > tol:
        found.append(Violation(Axiom.PM3, (x, y), abs(pxy - pyx)))

    spread = max(abs(pxx - pxy), abs(pyy - pxy))
    equal_points = space.same_point(x, y, tol)
    if spread <= tol and not equal_points:
        gap = 1.0 if space.is_finite else abs(x - y)
        found.append(Violation(Axiom.PM1, (x, y), gap))
    elif equal_points and spread > tol:
        found.append(Violation(Axiom.PM1, (x, y), spread))
    return found


def check_axioms_at(
    space: PartialMetricSpace, x: Point, y: Point, z: Point, tol: float = 0.0
) -> AxiomAuditReport:
    """Check pm1-pm3 on the pair ``(x, y)`` and pm4 on ``(x, y, z)``.

    Residuals are the amount by which an inequality fails; for the
    forward half of pm1 it is the separation of the two distinct points.
    """
    x, y, z = space.validate(x), space.validate(y), space.validate(z)
    found = _pair_violations(space, x, y, tol)
    lhs = space.eval(x, y) + space.eval(z, z)
    rhs = space.eval(x, z) + space.eval(z, y)
    if lhs - rhs > tol:
        found.append(Violation(Axiom.PM4, (x, y, z), lhs - rhs))
    return AxiomAuditReport(trials=1, violations=tuple(found))


def audit_axioms(
    space: PartialMetricSpace, trials: int = 10_000, seed: int = 0, tol: float = 0.0
) -> AxiomAuditReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(trials):
        x, y, z = space.sampler(rng), space.sampler(rng), space.sampler(rng)
        found.extend(check_axioms_at(space, x, y, z, tol).violations)
    return AxiomAuditReport(trials=trials, violations=tuple(found))


def ball_contains(space: PartialMetricSpace, center: Point, radius: float, y: Point) -> bool:
    """Membership in the open ball ``{y : p(c, y) < radius + p(c, c)}``."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    center, y = space.validate(center), space.validate(y)
    # compare the excess over the self-distance: radius + p(c, c) can round
    # back to p(c, c) when radius is below half an ulp of it
    return space.eval(center, y) - space.eval(center, center) < radius
