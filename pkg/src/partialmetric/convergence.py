"""Finite-resolution classification of sequences in a partial metric space.

Every verdict is "certified at resolution (N, W, eps)": the residuals over
the last ``W`` of ``N`` terms are all below ``eps``.  ``NOT_CERTIFIED``
means nothing was established at that resolution, not that the sequence
diverges.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import ContractError, Point

DEFAULT_HORIZON = 10_000
DEFAULT_WINDOW = 64
DEFAULT_TOL = 1e-9


class Verdict(str, enum.Enum):
    CERTIFIED = "CertifiedAtResolution"
    NOT_CERTIFIED = "NotCertified"


class Kind(str, enum.Enum):
    TAU = "Tau"
    PROPER = "Proper"
    CAUCHY = "Cauchy"
    PAIRWISE_IDENTITY = "PairwiseIdentity"


@dataclass(frozen=True)
class SequenceTrace:
    """Terms ``generator(1) .. generator(horizon)`` of a sequence in ``space``.

    ``space`` is a :class:`~partialmetric.core.PartialMetricSpace` or a
    :class:`~partialmetric.spaces.CompletionView`.
    """

    generator: Callable[[int], Point]
    horizon: int
    space: object

    @classmethod
    def from_points(cls, points: Sequence[Point], space) -> "SequenceTrace":
        pts = tuple(points)
        return cls(lambda n: pts[n - 1], len(pts), space)

    def tail(self, window: int) -> list:
        if not 1 <= window <= self.horizon:
            raise ValueError(f"window {window} must lie in 1..{self.horizon}")
        start = self.horizon - window + 1
        return [self.space.validate(self.generator(n)) for n in range(start, self.horizon + 1)]


@dataclass(frozen=True)
class ConvergenceReport:
    verdict: Verdict
    kind: Kind
    max_tail_residual: float
    horizon: int
    window: int
    tol: float
    limit_value: Optional[float] = None
    anchor: Optional[Point] = None

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "kind": self.kind.value,
            "anchor": self.anchor,
            "limit_value": self.limit_value,
            "max_tail_residual": self.max_tail_residual,
            "resolution": {"N": self.horizon, "W": self.window, "eps": self.tol},
        }


def _report(kind, residual, trace, window, tol, **extra) -> ConvergenceReport:
    verdict = Verdict.CERTIFIED if residual < tol else Verdict.NOT_CERTIFIED
    return ConvergenceReport(verdict, kind, float(residual), trace.horizon, window, tol, **extra)


def analyze_tau_convergence(
    trace: SequenceTrace, x: Point, window: int = DEFAULT_WINDOW, tol: float = DEFAULT_TOL
) -> ConvergenceReport:
    """Residuals ``|p(x, x_n) - p(x, x)|`` on the tail."""
    sp = trace.space
    x = sp.validate(x)
    pxx = sp.eval(x, x)
    res = max(abs(sp.eval(x, xn) - pxx) for xn in trace.tail(window))
    return _report(Kind.TAU, res, trace, window, tol, anchor=x)


def analyze_proper_convergence(
    trace: SequenceTrace, x: Point, window: int = DEFAULT_WINDOW, tol: float = DEFAULT_TOL
) -> ConvergenceReport:
    """Tau-convergence plus ``|p(x_n, x_n) - p(x, x)|`` on the tail."""
    sp = trace.space
    x = sp.validate(x)
    pxx = sp.eval(x, x)
    res = 0.0
    for xn in trace.tail(window):
        res = max(res, abs(sp.eval(x, xn) - pxx), abs(sp.eval(xn, xn) - pxx))
    return _report(Kind.PROPER, res, trace, window, tol, anchor=x)


def _max_pair_residual(sp, pts, target) -> float:
    m = sp.pairwise(pts)
    return float(abs(m - target).max())


def detect_cauchy(
    trace: SequenceTrace, window: int = DEFAULT_WINDOW, tol: float = DEFAULT_TOL
) -> ConvergenceReport:
    """Estimate ``a = p(x_{N-1}, x_N)`` and check every tail pair against it."""
    if trace.horizon < 2:
        raise ValueError("Cauchy detection needs a horizon of at least 2")
    sp = trace.space
    a = sp.eval(
        sp.validate(trace.generator(trace.horizon - 1)),
        sp.validate(trace.generator(trace.horizon)),
    )
    res = _max_pair_residual(sp, trace.tail(window), a)
    return _report(Kind.CAUCHY, res, trace, window, tol, limit_value=a)


def check_pairwise_limit_identity(
    trace: SequenceTrace, x: Point, window: int = DEFAULT_WINDOW, tol: float = DEFAULT_TOL
) -> ConvergenceReport:
    """Check ``p(x_m, x_n) -> p(x, x)`` for a properly convergent trace.

    Raises :class:`ContractError` unless proper convergence to ``x``
    certifies at the same resolution.
    """
    proper = analyze_proper_convergence(trace, x, window, tol)
    if not proper.certified:
        raise ContractError(
            f"proper convergence to {x!r} is not certified "
            f"(residual {proper.max_tail_residual!r} >= {tol!r}); "
            "certify it with analyze_proper_convergence first"
        )
    sp = trace.space
    x = sp.validate(x)
    res = _max_pair_residual(sp, trace.tail(window), sp.eval(x, x))
    return _report(Kind.PAIRWISE_IDENTITY, res, trace, window, tol, anchor=x)


def enumerate_tau_limits(
    trace: SequenceTrace, grid: Sequence[Point], window: int = DEFAULT_WINDOW,
    tol: float = DEFAULT_TOL,
) -> list:
    """All grid points to which the trace tau-converges at this resolution."""
    if not grid:
        raise ValueError("grid must be nonempty")
    out = []
    for g in grid:
        rep = analyze_tau_convergence(trace, g, window, tol)
        if rep.certified:
            out.append((g, rep))
    return out


def trace_csv(trace: SequenceTrace, anchor: Optional[Point] = None) -> str:
    """CSV export with columns ``n, x_n`` and, given an anchor, the residual inputs."""
    sp = trace.space
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["n", "x_n"]
    if anchor is not None:
        anchor = sp.validate(anchor)
        header += ["p(x,x_n)", "p(x_n,x_n)"]
    w.writerow(header)
    for n in range(1, trace.horizon + 1):
        xn = sp.validate(trace.generator(n))
        row = [n, repr(xn)]
        if anchor is not None:
            row += [repr(sp.eval(anchor, xn)), repr(sp.eval(xn, xn))]
        w.writerow(row)
    return buf.getvalue()
