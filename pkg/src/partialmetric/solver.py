"""Picard iteration with fixed-point certificates.

Equality of ``x`` and ``f(x)`` is decided the partial metric way, through
the pm1 triple ``p(x, x) = p(x, fx) = p(fx, fx)``.  A small ``p(x, fx)``
alone says nothing, because self-distances need not vanish.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .contraction import SelfMap, iterate, orbit_diameter
from .convergence import ConvergenceReport, SequenceTrace, analyze_proper_convergence
from .core import DomainError, Point

ORBIT_DEPTH = 64


def triple_residual(space, x: Point, fx: Point) -> float:
    pxy = space.eval(x, fx)
    return max(abs(space.eval(x, x) - pxy), abs(space.eval(fx, fx) - pxy))


def verify_fixed_point(space, f: SelfMap, x: Point, tol: float = 1e-9):
    """Return ``(is_fixed, residual)`` for the pm1 test on ``(x, f(x))``."""
    x = space.validate(x)
    res = triple_residual(space, x, f(x))
    return res < tol, res


@dataclass(frozen=True)
class FixedPointCertificate:
    x_star: Point
    iterations: int
    triple_residual: float
    self_distance: float
    orbit_residual: float
    tol: float
    proper: Optional[ConvergenceReport] = None

    @property
    def valid(self) -> bool:
        return self.triple_residual < self.tol

    def to_dict(self) -> dict:
        return {
            "x_star": self.x_star,
            "iterations": self.iterations,
            "triple_residual": self.triple_residual,
            "self_distance": self.self_distance,
            "orbit_residual": self.orbit_residual,
            "proper": None if self.proper is None else self.proper.to_dict(),
            "valid": self.valid,
        }


def _checked(space, f, x, index):
    y = f(x)
    if not space.contains(y):
        raise DomainError(f"{f.label}: iterate {index} = {y!r} leaves {space.label}")
    return y


def picard_solve(
    space,
    f: SelfMap,
    x0: Point,
    max_iter: int = 1000,
    tol: float = 1e-9,
    horizon: int = 100,
    window: int = 32,
) -> FixedPointCertificate:
    """Iterate ``x_{n+1} = f(x_n)`` until two consecutive iterates pass pm1.

    The later of the two is the candidate ``x*`` and ``iterations`` is its
    index in the orbit, so ``x* = f^iterations(x0)``.  On success the orbit
    from ``x0`` up to ``horizon`` is checked for proper convergence to
    ``x*`` over its last ``window`` terms.  When the budget runs out the
    iterate with the smallest residual is returned in an invalid
    certificate.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    x = space.validate(x0)
    fx = _checked(space, f, x, 1)
    res = triple_residual(space, x, fx)
    best = (math.inf, x, 0)
    for n in range(1, max_iter + 1):
        ffx = _checked(space, f, fx, n + 1)
        res_next = triple_residual(space, fx, ffx)
        if res_next < best[0]:
            best = (res_next, fx, n)
        if res < tol and res_next < tol:
            return _certificate(space, f, x0, fx, n, res_next, tol, horizon, window, True)
        x, fx, res = fx, ffx, res_next
    res_best, x_best, n_best = best
    return _certificate(space, f, x0, x_best, n_best, res_best, tol, horizon, window, False)


def _certificate(space, f, x0, x_star, n, res, tol, horizon, window, converged):
    orbit = orbit_diameter(space, f, x_star, depth=ORBIT_DEPTH)
    proper = None
    if converged:
        orbit_from_x0 = iterate(space, f, x0, horizon)
        trace = SequenceTrace.from_points(orbit_from_x0[1:], space)
        proper = analyze_proper_convergence(trace, x_star, min(window, horizon), tol)
    return FixedPointCertificate(
        x_star=x_star,
        iterations=n,
        triple_residual=res,
        self_distance=space.eval(x_star, x_star),
        orbit_residual=orbit.diameter,
        tol=tol,
        proper=proper,
    )


def orbit_sup_gap(space, f: SelfMap, x: Point, depth: int = ORBIT_DEPTH) -> float:
    """``delta(O(x, f)) - sup_m p(x, f^m x)`` over the truncated orbit.

    Zero at a candidate produced under an orbital contraction; a nonzero
    gap flags that the orbit diameter is attained away from the seed.
    """
    orb = orbit_diameter(space, f, x, depth=depth)
    sup_from_seed = max(space.eval(orb.points[0], q) for q in orb.points)
    return orb.diameter - sup_from_seed


@dataclass(frozen=True)
class DualSeedTrace:
    diameters: tuple
    cross: tuple
    inner_depth: int

    def first_below(self, level: float) -> Optional[int]:
        for n, d in enumerate(self.diameters):
            if d < level:
                return n
        return None

    def to_dict(self) -> dict:
        return {
            "inner_depth": self.inner_depth,
            "rows": [
                {"n": n, "delta": d, "cross": c}
                for n, (d, c) in enumerate(zip(self.diameters, self.cross))
            ],
        }


def dual_seed_diagnostic(
    space, f: SelfMap, x0: Point, y0: Point, depth: int = 40, inner_depth: int = ORBIT_DEPTH
) -> DualSeedTrace:
    """``d_n = delta(O(x_n, y_n, f))`` and ``p(x_n, y_n)`` for ``n = 0..depth``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    total = depth + inner_depth
    xs = iterate(space, f, x0, total)
    ys = iterate(space, f, y0, total)
    diam, cross = [], []
    for n in range(depth + 1):
        tail_x, tail_y = xs[n : n + inner_depth + 1], ys[n : n + inner_depth + 1]
        diam.append(float(space.pairwise(list(tail_x) + list(tail_y)).max()))
        cross.append(space.eval(xs[n], ys[n]))
    return DualSeedTrace(tuple(diam), tuple(cross), inner_depth)
