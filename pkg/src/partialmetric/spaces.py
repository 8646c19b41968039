"""Built-in partial metric spaces and finite-table validation."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .core import (
    Axiom,
    AxiomAuditReport,
    CarrierKind,
    DomainError,
    PartialMetricSpace,
    Point,
    Violation,
)

MAX_TABLE_SIZE = 512
# Per-axiom cap on listed witnesses during exhaustive validation.
MAX_WITNESSES = 64


class TableRejected(ValueError):
    """A finite table failed partial metric validation."""

    def __init__(self, report: AxiomAuditReport):
        self.report = report
        lines = [
            f"{v.axiom.value} at {v.witness}: residual {v.residual!r}"
            for v in report.violations
        ]
        super().__init__("table rejected:\n" + "\n".join(lines))


def _log_uniform(low: float, high: float) -> Callable[[np.random.Generator], float]:
    lo, hi = math.log(low), math.log(high)

    def sample(rng: np.random.Generator) -> float:
        return min(high, float(math.exp(rng.uniform(lo, hi))))

    return sample


def _max(x, y):
    return x if x >= y else y


def make_max_space() -> PartialMetricSpace:
    return PartialMetricSpace(
        kind=CarrierKind.NONNEGATIVE_REALS,
        eval=_max,
        sampler=_log_uniform(1e-6, 1e3),
        label="max on [0, inf)",
        veval=np.maximum,
    )


@dataclass(frozen=True)
class CompletionView:
    """A base space together with one point that exists only in its completion.

    ``dist_to_u`` gives ``p(x, u)`` for base points ``x``; ``u_self`` is
    ``p(u, u)``.  The view behaves like a space whose carrier is the base
    carrier plus ``u``.
    """

    base: PartialMetricSpace
    u: Point
    u_self: float
    dist_to_u: Callable[[Point], float]
    sequence: Callable[[int], Point]

    @property
    def label(self) -> str:
        return f"completion of {self.base.label}"

    @property
    def is_finite(self) -> bool:
        return False

    def is_u(self, x: Point) -> bool:
        return x == self.u

    def validate(self, x: Point) -> Point:
        if self.is_u(x):
            return self.u
        return self.base.validate(x)

    def contains(self, x: Point) -> bool:
        return self.is_u(x) or self.base.contains(x)

    def same_point(self, x: Point, y: Point, tol: float = 0.0) -> bool:
        return self.base.same_point(x, y, tol)

    def eval(self, x: Point, y: Point) -> float:
        xu, yu = self.is_u(x), self.is_u(y)
        if xu and yu:
            return self.u_self
        if xu:
            return self.dist_to_u(y)
        if yu:
            return self.dist_to_u(x)
        return self.base.eval(x, y)

    eval_ext = eval

    def pairwise(self, xs):
        m = len(xs)
        out = np.empty((m, m))
        for i in range(m):
            for j in range(i, m):
                out[i, j] = out[j, i] = self.eval(xs[i], xs[j])
        return out

    def sidecar(self) -> dict:
        return {"u": self.u, "self_distance": self.u_self}


def make_punctured_interval() -> CompletionView:
    """``((0, 1], max)`` with its missing limit ``u = 0`` (``p(u, u) = 0``).

    The shipped Cauchy sequence is ``x_i = 1/i``.
    """
    base = PartialMetricSpace(
        kind=CarrierKind.PUNCTURED_UNIT_INTERVAL,
        eval=_max,
        sampler=_log_uniform(1e-9, 1.0),
        label="max on (0, 1]",
        veval=np.maximum,
    )
    return CompletionView(
        base=base,
        u=0.0,
        u_self=0.0,
        dist_to_u=lambda x: x,
        sequence=lambda i: 1 / i,
    )


def _cap(found: list, items: Iterable) -> None:
    for n, item in enumerate(items):
        if n == MAX_WITNESSES:
            break
        found.append(item)


def validate_table(table, tol: float = 0.0) -> AxiomAuditReport:
    """Exhaustively check pm1-pm4 over all pairs and all n**3 triples."""
    t = np.asarray(table, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
        raise ValueError(f"table must be a nonempty square matrix, got shape {t.shape}")
    n = t.shape[0]
    if n > MAX_TABLE_SIZE:
        raise ValueError(f"table size {n} exceeds the cap of {MAX_TABLE_SIZE}")
    if not np.all(np.isfinite(t)):
        raise ValueError("table entries must be finite")

    found: list = []
    d = np.diag(t)

    neg = np.argwhere(t < -tol)
    _cap(found, (Violation(Axiom.PM2, (int(i), int(j)), float(-t[i, j])) for i, j in neg))

    excess = d[:, None] - t
    bad = np.argwhere(excess > tol)
    _cap(found, (Violation(Axiom.PM2, (int(i), int(j)), float(excess[i, j])) for i, j in bad))

    asym = np.abs(t - t.T)
    bad = np.argwhere(np.triu(asym > tol, k=1))
    _cap(found, (Violation(Axiom.PM3, (int(i), int(j)), float(asym[i, j])) for i, j in bad))

    spread = np.maximum(np.abs(d[:, None] - t), np.abs(d[None, :] - t))
    bad = np.argwhere(np.triu(spread <= tol, k=1))
    _cap(found, (Violation(Axiom.PM1, (int(i), int(j)), 1.0) for i, j in bad))

    pm4: list = []
    for z in range(n):
        # lhs[x, y] = p(x, y) + p(z, z); rhs[x, y] = p(x, z) + p(z, y)
        gap = t + t[z, z] - (t[:, z][:, None] + t[z, :][None, :])
        for x, y in np.argwhere(gap > tol):
            pm4.append(Violation(Axiom.PM4, (int(x), int(y), z), float(gap[x, y])))
            if len(pm4) == MAX_WITNESSES:
                break
        if len(pm4) == MAX_WITNESSES:
            break
    found.extend(pm4)
    return AxiomAuditReport(trials=n * n * n, violations=tuple(found))


def make_finite_space(table, tol: float = 0.0, label: str = "") -> PartialMetricSpace:
    """Validate ``table`` exhaustively and wrap it as a space.

    Raises :class:`TableRejected` carrying every violated axiom with
    witnesses when validation fails.
    """
    report = validate_table(table, tol)
    if not report.passed:
        raise TableRejected(report)
    t = np.array(table, dtype=float)
    t.setflags(write=False)
    n = t.shape[0]

    def ev(x, y):
        return float(t[x, y])

    def veval(a, b):
        return t[np.asarray(a, dtype=np.intp), np.asarray(b, dtype=np.intp)]

    return PartialMetricSpace(
        kind=CarrierKind.FINITE_TABLE,
        eval=ev,
        sampler=lambda rng: int(rng.integers(n)),
        label=label or f"finite table n={n}",
        veval=veval,
        table=t,
    )


def restrict(space: PartialMetricSpace, points) -> PartialMetricSpace:
    """Finite restriction of ``space`` to ``points`` (indexed in order)."""
    pts = [space.validate(x) for x in points]
    table = [[space.eval(a, b) for b in pts] for a in pts]
    return make_finite_space(table, label=f"{space.label} restricted to {pts}")


def format_table(table) -> str:
    t = np.asarray(table, dtype=float)
    rows = [str(t.shape[0])]
    rows += [" ".join(repr(float(v)) for v in row) for row in t]
    return "\n".join(rows) + "\n"


def parse_table(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty table file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValueError(f"first line must be an integer size, got {lines[0]!r}") from None
    if n < 1:
        raise ValueError(f"table size must be >= 1, got {n}")
    if len(lines) - 1 != n:
        raise ValueError(f"expected {n} rows, found {len(lines) - 1}")
    rows = []
    for k, ln in enumerate(lines[1:], start=1):
        vals = [float(v) for v in ln.split()]
        if len(vals) != n:
            raise ValueError(f"row {k} has {len(vals)} entries, expected {n}")
        rows.append(vals)
    return rows


def load_table(path: str | os.PathLike, tol: float = 0.0) -> PartialMetricSpace:
    with open(path) as fh:
        rows = parse_table(fh.read())
    return make_finite_space(rows, tol=tol, label=f"table {os.fspath(path)}")


def save_table(space: PartialMetricSpace, path: str | os.PathLike) -> None:
    if space.table is None:
        raise DomainError(f"{space.label} has no table to save")
    with open(path, "w") as fh:
        fh.write(format_table(space.table))


def save_completion(view: CompletionView, path: str | os.PathLike) -> str:
    """Write the carrier description to ``path`` and the ``u`` sidecar next to it.

    Returns the sidecar path.
    """
    path = os.fspath(path)
    with open(path, "w") as fh:
        if view.base.table is not None:
            fh.write(format_table(view.base.table))
        else:
            fh.write(view.base.kind.value + "\n")
    sidecar = path + ".completion.json"
    with open(sidecar, "w") as fh:
        json.dump(view.sidecar(), fh, sort_keys=True)
    return sidecar


def load_completion(path: str | os.PathLike) -> CompletionView:
    """Reload a view written by :func:`save_completion` for the built-in carrier."""
    path = os.fspath(path)
    with open(path) as fh:
        carrier = fh.read().strip()
    with open(path + ".completion.json") as fh:
        side = json.load(fh)
    if carrier != CarrierKind.PUNCTURED_UNIT_INTERVAL.value:
        raise ValueError(f"no completion is shipped for carrier {carrier!r}")
    view = make_punctured_interval()
    if side != view.sidecar():
        raise ValueError(f"sidecar {side} does not match the shipped completion")
    return view
