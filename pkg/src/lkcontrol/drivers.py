"""Piecewise-linear driving paths of bounded variation.

A path is stored by its breakpoints and values; between breakpoints it is
linear, so ``dx`` has a piecewise-constant density and every Stieltjes
integral against it reduces to smooth quadrature on each segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .report import Check, VerificationReport

DEFAULT_TRUNCATION = 16
DEFAULT_REFINEMENT = 64
DEFAULT_GRID_INTERVALS = 512

# nodes closer than this (relative to T) are merged when grids are combined
_MERGE_TOL = 1e-12


class DriverError(ValueError):
    """Invalid path, grid or family construction."""


class DomainError(ValueError):
    """Evaluation requested outside the unit disk."""


@dataclass(frozen=True)
class TimeGrid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DriverError("a time grid needs at least two points")
        if pts[0] != 0.0:
            raise DriverError(f"time grid must start at 0, got {pts[0]!r}")
        if not np.all(np.diff(pts) > 0):
            raise DriverError("time grid must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def T(self) -> float:
        return float(self.points[-1])

    def __len__(self) -> int:
        return self.points.size

    @classmethod
    def uniform(cls, T: float, intervals: int, extra: Sequence[float] = ()) -> "TimeGrid":
        """``intervals`` equal steps on [0, T], merged with the ``extra`` nodes."""
        if T <= 0:
            raise DriverError("T must be positive")
        if intervals < 1:
            raise DriverError("need at least one interval")
        pts = np.linspace(0.0, T, intervals + 1)
        return cls(merge_points(pts, extra, T))

    def refine(self, refinement: int) -> "TimeGrid":
        """Split every interval into ``refinement`` equal pieces."""
        if refinement < 1:
            raise DriverError("refinement must be >= 1")
        if refinement == 1:
            return self
        p = self.points
        frac = np.arange(refinement) / refinement
        inner = p[:-1, None] + np.diff(p)[:, None] * frac[None, :]
        return TimeGrid(np.append(inner.ravel(), p[-1]))

    def index_of(self, t: float) -> int:
        j = int(np.argmin(np.abs(self.points - t)))
        if abs(self.points[j] - t) > _MERGE_TOL * max(self.T, 1.0):
            raise DriverError(f"t={t!r} is not a grid node")
        return j


def merge_points(points, extra, T: float) -> np.ndarray:
    pts = np.concatenate([np.asarray(points, dtype=float), np.asarray(extra, dtype=float)])
    pts = np.unique(pts[(pts >= 0.0) & (pts <= T)])
    keep = np.concatenate([[True], np.diff(pts) > _MERGE_TOL * max(T, 1.0)])
    pts = pts[keep]
    pts[0] = 0.0
    pts[-1] = T
    return pts


@dataclass(frozen=True)
class DriverPath:
    breakpoints: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.breakpoints.points.shape:
            raise DriverError("one value per breakpoint is required")
        if not np.all(np.isfinite(vals)):
            raise DriverError("path values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def T(self) -> float:
        return self.breakpoints.T

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def __call__(self, t):
        """Linear interpolation; accepts scalars or arrays."""
        tp = self.breakpoints.points
        t = np.asarray(t, dtype=float)
        out = np.interp(t, tp, self.values.real) + 1j * np.interp(t, tp, self.values.imag)
        return complex(out) if out.ndim == 0 else out

    def increments(self, grid: TimeGrid) -> np.ndarray:
        """x(u_{j+1}) - x(u_j) over consecutive grid nodes."""
        return np.diff(self(grid.points))

    def total_variation(self, s: float = 0.0, t: float | None = None) -> float:
        """|dx|((s, t]) for the piecewise-linear path."""
        if t is None:
            t = self.T
        if s > t:
            raise DriverError(f"need s <= t, got s={s!r}, t={t!r}")
        if not (0.0 <= s and t <= self.T):
            raise DriverError("interval outside [0, T]")
        tp = self.breakpoints.points
        nodes = np.concatenate([[s], tp[(tp > s) & (tp < t)], [t]])
        return float(np.sum(np.abs(np.diff(self(nodes)))))

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def make_piecewise_linear(breakpoints: Sequence[float], values: Sequence[complex]) -> DriverPath:
    if len(breakpoints) != len(values):
        raise DriverError(
            f"{len(breakpoints)} breakpoints but {len(values)} values"
        )
    return DriverPath(TimeGrid(breakpoints), values)


def zero_path(T: float) -> DriverPath:
    return make_piecewise_linear([0.0, T], [0.0, 0.0])


def linear_path(T: float, slope: complex) -> DriverPath:
    return make_piecewise_linear([0.0, T], [0.0, slope * T])


@dataclass(frozen=True)
class DriverFamily:
    """x0 together with x_1..x_M.

    ``decay_ratio`` q declares that the paths beyond M satisfy
    sup|x_n| <= K q^n and |dx_n|([0, T]) <= K q^n, with K calibrated on the
    stored paths. It is an assumption, never verified.
    """

    x0: DriverPath
    xs: tuple[DriverPath, ...]
    decay_ratio: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))
        if not self.x0.is_real:
            raise DriverError("x0 must be real-valued")
        T = self.x0.T
        for n, p in enumerate(self.xs, start=1):
            if not math.isclose(p.T, T, rel_tol=0, abs_tol=_MERGE_TOL * max(T, 1.0)):
                raise DriverError(f"x_{n} ends at {p.T}, expected T={T}")
        if self.decay_ratio is not None and not 0.0 < self.decay_ratio < 1.0:
            raise DriverError("decay_ratio must lie in (0, 1)")

    @property
    def T(self) -> float:
        return self.x0.T

    @property
    def truncation_level(self) -> int:
        return len(self.xs)

    def path(self, n: int) -> DriverPath:
        """x_n for n >= 0; levels above the truncation are the zero path."""
        if n == 0:
            return self.x0
        if n <= len(self.xs):
            return self.xs[n - 1]
        return zero_path(self.T)

    def breakpoints(self) -> np.ndarray:
        pts = [self.x0.breakpoints.points] + [p.breakpoints.points for p in self.xs]
        return merge_points(np.concatenate(pts), (), self.T)

    def default_grid(self, intervals: int = DEFAULT_GRID_INTERVALS) -> TimeGrid:
        return TimeGrid.uniform(self.T, intervals, self.breakpoints())

    def decay_constant(self) -> float | None:
        """K = max_n max(sup|x_n|, |dx_n|([0,T])) / q^n over stored paths."""
        q = self.decay_ratio
        if q is None:
            return None
        if not self.xs:
            return 0.0
        return max(
            max(p.sup_abs(), p.total_variation()) / q**n
            for n, p in enumerate(self.xs, start=1)
        )


def with_grid(family: DriverFamily, grid: TimeGrid | None, intervals: int = DEFAULT_GRID_INTERVALS) -> TimeGrid:
    """The given grid (merged with the family breakpoints) or the default one."""
    if grid is None:
        return family.default_grid(intervals)
    if not math.isclose(grid.T, family.T):
        raise DriverError(f"grid ends at {grid.T}, family at {family.T}")
    return TimeGrid(merge_points(grid.points, family.breakpoints(), family.T))


def eval_xi(family: DriverFamily, z: complex, t: float) -> tuple[complex, float | None]:
    """Truncated xi(x, z)_t = sum_{n<=M} x_n(t) z^n and a tail bound.

    The tail bound is ``None`` when no decay is declared.
    """
    if abs(z) >= 1:
        raise DomainError(f"|z| = {abs(z)} is not inside the unit disk")
    if not 0.0 <= t <= family.T:
        raise DriverError(f"t={t!r} outside [0, {family.T}]")
    value = 0j
    zn = 1 + 0j
    for p in family.xs:
        zn *= z
        value += p(t) * zn
    tail = None
    K = family.decay_constant()
    if K is not None:
        qz = family.decay_ratio * abs(z)
        tail = K * qz ** (family.truncation_level + 1) / (1 - qz)
    return value, tail


def trapezoid_increments(g_nodes: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Per-cell trapezoid contributions (g_j + g_{j+1}) / 2 * dx_j.

    Exact when g is constant, since dx is the path increment itself.
    """
    return 0.5 * (g_nodes[..., :-1] + g_nodes[..., 1:]) * dx


def cumulative_stieltjes(g_nodes: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Running integral from the first node, one value per node."""
    inc = trapezoid_increments(g_nodes, dx)
    out = np.zeros(g_nodes.shape, dtype=complex)
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    return out


def _call_on_nodes(g: Callable, u: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(g(u), dtype=complex)
    except (TypeError, ValueError):
        vals = None
    if vals is None or vals.shape != u.shape:
        vals = np.array([g(float(ui)) for ui in u], dtype=complex)
    return vals


def stieltjes_integral(
    g: Callable,
    path: DriverPath,
    s: float,
    t: float,
    refinement: int = DEFAULT_REFINEMENT,
) -> complex:
    """Composite trapezoid approximation of the integral of g dx over (s, t].

    Each linear segment of ``path`` inside [s, t] is split into
    ``refinement`` sub-steps. ``g`` may be vectorised; scalar callables are
    evaluated pointwise.
    """
    if s > t:
        raise DriverError(f"need s <= t, got s={s!r}, t={t!r}")
    if refinement < 1:
        raise DriverError("refinement must be >= 1")
    if s == t:
        return 0j
    tp = path.breakpoints.points
    nodes = np.concatenate([[s], tp[(tp > s) & (tp < t)], [t]])
    frac = np.arange(refinement) / refinement
    u = nodes[:-1, None] + np.diff(nodes)[:, None] * frac[None, :]
    u = np.append(u.ravel(), t)
    dx = np.diff(path(u))
    return complex(np.sum(trapezoid_increments(_call_on_nodes(g, u), dx)))


def check_driver_conditions(
    family: DriverFamily, radii: Sequence[float] = (0.5, 0.9, 0.99)
) -> VerificationReport:
    report = VerificationReport("driver conditions")
    x00 = float(family.x0.values[0].real)
    report.add(Check(
        "x0(0) = 0",
        passed=x00 == 0.0,
        margin=-abs(x00),
        witness={"x0(0)": x00},
    ))
    xi0 = np.array([abs(p.values[0]) for p in family.xs])
    tv = np.array([p.total_variation() for p in family.xs])
    n = np.arange(1, family.truncation_level + 1)
    for r in radii:
        for label, weights in (("xi_0 coefficients", xi0), ("variation series", tv)):
            total = float(np.sum(weights * r**n)) if n.size else 0.0
            report.add(Check(
                f"{label} finite at r={r}",
                passed=math.isfinite(total),
                witness={"r": r, "truncated_sum": total, "M": family.truncation_level},
                note="truncation only; finite sums are automatic",
            ))
    K = family.decay_constant()
    if K is None:
        report.add(Check(
            "tail beyond truncation",
            passed=None,
            note="no decay declared; tail unknown",
        ))
    else:
        q = family.decay_ratio
        M = family.truncation_level
        for r in radii:
            qr = q * r
            report.add(Check(
                f"declared tail at r={r}",
                passed=None,
                witness={"K": K, "decay_ratio": q, "tail_bound": K * qr ** (M + 1) / (1 - qr)},
                note="declared, not proven",
            ))
    report.meta["truncation_level"] = family.truncation_level
    report.meta["total_variations"] = tv.tolist()
    return report
