"""Control functions and certification of the omega-controlled inequalities.

For a composition (i_1, ..., i_p) of n the controlled quantity is

    I(t) = exp(n x0(t)) * J_p(t),
    J_m(u) = int_0^u J_{m-1}(v) exp(-i_m x0(v)) dx_{i_m}(v),   J_0 = 1,

so the earliest integration variable carries i_1. Every prefix of a
composition of n is itself a composition of a smaller number, which lets a
depth-first walk share J between all compositions with a common prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .drivers import (
    DriverFamily,
    TimeGrid,
    cumulative_stieltjes,
    merge_points,
    with_grid,
    DEFAULT_REFINEMENT,
)
from .report import Check, VerificationReport

COMPOSITION_CAP = 16
DEFAULT_SLACK = 1e-7
VERIFY_GRID_INTERVALS = 64
VERIFY_REFINEMENT = 1024


class ControlError(ValueError):
    pass


class CompositionCapError(ControlError):
    pass


@dataclass(frozen=True)
class Composition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(i) for i in self.parts)
        if not parts or min(parts) < 1:
            raise ControlError(f"invalid composition {self.parts!r}")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)


def _compositions(n: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def enumerate_compositions(n: int, cap: int = COMPOSITION_CAP) -> list[Composition]:
    """All 2**(n-1) compositions of n in lexicographic order."""
    if n < 1:
        raise ControlError("n must be >= 1")
    if n > cap:
        raise CompositionCapError(
            f"n={n} exceeds the composition cap {cap}: 2**{n - 1} compositions"
        )
    return [Composition(p) for p in _compositions(n)]


@dataclass(frozen=True)
class ControlFunction:
    """omega(s, t), either linear c (t - s) or bilinearly tabulated."""

    form: str
    rate: float = 0.0
    s_axis: np.ndarray | None = None
    t_axis: np.ndarray | None = None
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.form == "linear":
            if not (self.rate >= 0 and math.isfinite(self.rate)):
                raise ControlError("linear rate must be a finite nonnegative number")
        elif self.form == "table":
            s = np.array(self.s_axis, dtype=float)
            t = np.array(self.t_axis, dtype=float)
            v = np.array(self.table, dtype=float)
            if v.shape != (s.size, t.size):
                raise ControlError(f"table shape {v.shape} != ({s.size}, {t.size})")
            if s.size < 2 or t.size < 2 or np.any(np.diff(s) <= 0) or np.any(np.diff(t) <= 0):
                raise ControlError("table axes must be increasing with >= 2 points")
            object.__setattr__(self, "s_axis", s)
            object.__setattr__(self, "t_axis", t)
            object.__setattr__(self, "table", v)
        else:
            raise ControlError(f"unknown control form {self.form!r}")

    @classmethod
    def linear(cls, rate: float) -> "ControlFunction":
        return cls("linear", rate=float(rate))

    @classmethod
    def tabulate(cls, fn: Callable, points: Sequence[float]) -> "ControlFunction":
        p = np.asarray(points, dtype=float)
        S, Tt = np.meshgrid(p, p, indexing="ij")
        return cls("table", s_axis=p, t_axis=p, table=np.where(S <= Tt, fn(S, np.maximum(Tt, S)), 0.0))

    @property
    def T(self) -> float | None:
        return None if self.form == "linear" else float(self.t_axis[-1])

    def __call__(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.form == "linear":
            out = self.rate * np.maximum(t - s, 0.0)
        else:
            out = _bilinear(self.s_axis, self.t_axis, self.table, s, t)
        return float(out) if out.ndim == 0 else out

    def matrix(self, points: np.ndarray) -> np.ndarray:
        """W[i, j] = omega(points[i], points[j])."""
        return np.asarray(self(points[:, None], points[None, :]))

    def to_dict(self) -> dict:
        if self.form == "linear":
            return {"form": "linear", "rate": self.rate}
        return {
            "form": "table",
            "s": self.s_axis.tolist(),
            "t": self.t_axis.tolist(),
            "values": self.table.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ControlFunction":
        form = doc.get("form")
        if form == "linear":
            return cls.linear(doc["rate"])
        if form == "table":
            return cls("table", s_axis=doc["s"], t_axis=doc["t"], table=doc["values"])
        raise ControlError(f"unknown control form {form!r}")


def _bilinear(xa, ya, v, x, y):
    x, y = np.broadcast_arrays(x, y)
    x = np.clip(x, xa[0], xa[-1])
    y = np.clip(y, ya[0], ya[-1])
    i = np.clip(np.searchsorted(xa, x, side="right") - 1, 0, xa.size - 2)
    j = np.clip(np.searchsorted(ya, y, side="right") - 1, 0, ya.size - 2)
    fx = (x - xa[i]) / (xa[i + 1] - xa[i])
    fy = (y - ya[j]) / (ya[j + 1] - ya[j])
    return (
        v[i, j] * (1 - fx) * (1 - fy)
        + v[i + 1, j] * fx * (1 - fy)
        + v[i, j + 1] * (1 - fx) * fy
        + v[i + 1, j + 1] * fx * fy
    )


class IteratedIntegrals:
    """Shared machinery for the nested integrals on one refined grid."""

    def __init__(self, family: DriverFamily, fine: TimeGrid):
        self.family = family
        self.grid = fine
        x0 = family.x0(fine.points).real
        self.x0 = x0 - x0[0]
        self._weights: dict[int, np.ndarray] = {}
        self._dx: dict[int, np.ndarray] = {}

    def weight(self, i: int) -> np.ndarray:
        if i not in self._weights:
            self._weights[i] = np.exp(-i * self.x0)
        return self._weights[i]

    def dx(self, i: int) -> np.ndarray:
        if i not in self._dx:
            if i > self.family.truncation_level:
                raise ControlError(
                    f"part {i} exceeds the truncation level {self.family.truncation_level}"
                )
            self._dx[i] = self.family.path(i).increments(self.grid)
        return self._dx[i]

    def extend(self, J: np.ndarray, i: int) -> np.ndarray:
        return cumulative_stieltjes(J * self.weight(i), self.dx(i))

    def nested(self, parts: Sequence[int]) -> np.ndarray:
        J = np.ones(self.grid.points.size, dtype=complex)
        for i in parts:
            J = self.extend(J, i)
        return J

    def controlled(self, parts: Sequence[int]) -> np.ndarray:
        """exp(n x0(t)) J_p(t) at every node."""
        return np.exp(sum(parts) * self.x0) * self.nested(parts)

    def walk(self, n_max: int) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        """Depth-first (parts, J) for every composition with sum <= n_max.

        J is shared with descendants; consumers must not mutate it.
        """
        root = np.ones(self.grid.points.size, dtype=complex)

        def visit(prefix, total, J):
            for i in range(1, n_max - total + 1):
                child = self.extend(J, i)
                parts = prefix + (i,)
                yield parts, child
                yield from visit(parts, total + i, child)

        yield from visit((), 0, root)


def _truncated_grid(family: DriverFamily, grid: TimeGrid | None, t: float) -> TimeGrid:
    base = with_grid(family, grid)
    pts = merge_points(base.points[base.points < t], [t], t)
    return TimeGrid(pts)


def iterated_integral(
    family: DriverFamily,
    comp: Composition | Sequence[int],
    t: float,
    grid: TimeGrid | None = None,
    refinement: int = DEFAULT_REFINEMENT,
) -> complex:
    """exp(n x0(t)) times the nested integral for ``comp``, evaluated at t."""
    parts = comp.parts if isinstance(comp, Composition) else tuple(comp)
    Composition(parts)
    M = family.truncation_level
    if max(parts) > M:
        raise ControlError(f"part {max(parts)} exceeds the truncation level {M}")
    if not 0.0 <= t <= family.T:
        raise ControlError(f"t={t!r} outside [0, {family.T}]")
    if t == 0.0:
        return 0j
    fine = _truncated_grid(family, grid, t).refine(refinement)
    return complex(IteratedIntegrals(family, fine).controlled(parts)[-1])


def verify_controlled(
    family: DriverFamily,
    omega: ControlFunction,
    n_max: int,
    grid: TimeGrid | None = None,
    refinement: int = VERIFY_REFINEMENT,
    slack: float = DEFAULT_SLACK,
    cap: int = COMPOSITION_CAP,
) -> VerificationReport:
    """Check both controlled inequalities for every composition of n <= n_max.

    The bound on |I(t)| is checked at every node of ``grid``; the increment
    bound on every node pair s <= t. Slack is ``slack`` times the largest
    value the right-hand side takes on [0, T].
    """
    if n_max > cap:
        raise CompositionCapError(f"n_max={n_max} exceeds the composition cap {cap}")
    if n_max > family.truncation_level:
        raise ControlError(
            f"n_max={n_max} exceeds the truncation level {family.truncation_level}"
        )
    if grid is None:
        grid = family.default_grid(VERIFY_GRID_INTERVALS)
    check = with_grid(family, grid)
    fine = check.refine(refinement)
    idx = np.arange(len(check)) * refinement
    pts = check.points
    T = family.T

    engine = IteratedIntegrals(family, fine)
    w0t = np.asarray(omega(0.0, pts))
    w0T = float(omega(0.0, T))
    W = omega.matrix(pts)
    upper = np.triu(np.ones_like(W, dtype=bool))
    x0_nodes = engine.x0[idx]

    report = VerificationReport("omega-controlled inequalities")
    report.meta.update({
        "n_max": n_max,
        "omega_0T": w0T,
        "slack": slack,
        "check_nodes": len(check),
        "refinement": refinement,
    })
    worst_by_n: dict[int, float] = {}

    for parts, J in engine.walk(n_max):
        n = sum(parts)
        I = np.exp(n * x0_nodes) * J[idx]
        absI = np.abs(I)

        rhs = w0t**n / math.factorial(n)
        scale = w0T**n / math.factorial(n)
        margin = rhs + slack * scale - absI
        j = int(np.argmin(margin))
        report.add(Check(
            f"|I| bound n={n} comp={parts}",
            passed=bool(margin[j] >= 0),
            margin=float(margin[j]),
            witness={"n": n, "comp": list(parts), "t": float(pts[j]),
                     "lhs": float(absI[j]), "rhs": float(rhs[j])},
        ))
        worst_by_n[n] = min(worst_by_n.get(n, math.inf), float(margin[j]))

        D = np.abs(I[None, :] - I[:, None])
        coeff = w0T ** (n - 1) / math.factorial(n - 1)
        rhs2 = W * coeff
        margin2 = np.where(upper, rhs2 + slack * w0T * coeff - D, np.inf)
        a, b = np.unravel_index(int(np.argmin(margin2)), margin2.shape)
        report.add(Check(
            f"increment bound n={n} comp={parts}",
            passed=bool(margin2[a, b] >= 0),
            margin=float(margin2[a, b]),
            witness={"n": n, "comp": list(parts), "s": float(pts[a]), "t": float(pts[b]),
                     "lhs": float(D[a, b]), "rhs": float(rhs2[a, b])},
        ))
        worst_by_n[n] = min(worst_by_n[n], float(margin2[a, b]))

    report.meta["worst_margin_by_n"] = {str(k): v for k, v in sorted(worst_by_n.items())}
    failing = sorted({f.witness["n"] for f in report.failures()})
    report.meta["failing_n"] = failing
    return report


def check_superadditive(omega: ControlFunction, grid: TimeGrid, tol: float = 1e-12) -> VerificationReport:
    """omega(s,t) + omega(t,u) <= omega(s,u), omega(t,t) = 0 and omega >= 0 on grid nodes."""
    pts = grid.points
    W = omega.matrix(pts)
    scale = max(float(np.max(np.abs(W))), 1.0)
    atol = tol * scale
    report = VerificationReport("control function axioms")

    diag = np.abs(np.diag(W))
    k = int(np.argmax(diag))
    report.add(Check(
        "vanishes on the diagonal",
        passed=bool(diag[k] <= atol),
        margin=float(atol - diag[k]),
        witness={"t": float(pts[k]), "omega(t,t)": float(diag[k])},
    ))

    upper = np.triu(np.ones_like(W, dtype=bool))
    neg = np.where(upper, W, np.inf)
    a, b = np.unravel_index(int(np.argmin(neg)), neg.shape)
    report.add(Check(
        "nonnegative",
        passed=bool(neg[a, b] >= -atol),
        margin=float(neg[a, b] + atol),
        witness={"s": float(pts[a]), "t": float(pts[b]), "omega": float(neg[a, b])},
    ))

    # loop over the middle node to keep memory quadratic
    best = (math.inf, 0, 0, 0)
    for b in range(pts.size):
        excess = W[: b + 1, b, None] + W[None, b, b:] - W[: b + 1, b:]
        m = atol - excess
        a, c = np.unravel_index(int(np.argmin(m)), m.shape)
        if m[a, c] < best[0]:
            best = (float(m[a, c]), int(a), b, int(c) + b)
    worst, a, b, c = best
    report.add(Check(
        "super-additive",
        passed=bool(worst >= 0),
        margin=worst,
        witness={"s": float(pts[a]), "t": float(pts[b]), "u": float(pts[c]),
                 "omega(s,t)+omega(t,u)": float(W[a, b] + W[b, c]),
                 "omega(s,u)": float(W[a, c])},
    ))
    return report
