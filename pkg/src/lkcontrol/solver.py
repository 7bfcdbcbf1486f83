"""Taylor coefficients of the solution f_t(z) = C(t) (z + sum c_n(t) z^(n+1)).

Substituting the expansion into the equation gives

    C(t) - 1 = int_0^t C dx0,
    c_n(t)   = int_0^t { sum_{k<n} (k+1) c_k dx_{n-k} + n c_n dx0 },  c_0 = 1.

Three independent routes compute the c_n: the integrating factor
exp(-n x0) (production), the expansion over compositions of n, and plain
fixed-point iteration. All work on the coefficient grid refined
``refinement`` times, so c_k is known at every quadrature node.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .control import CompositionCapError, IteratedIntegrals
from .drivers import (
    DEFAULT_REFINEMENT,
    DriverError,
    DriverFamily,
    DriverPath,
    TimeGrid,
    cumulative_stieltjes,
    merge_points,
    trapezoid_increments,
    with_grid,
)
from .series import TruncatedSeries

DEFAULT_N = 12
SOLVER_COMPOSITION_CAP = 12
FORWARD = "forward"
MIRRORED = "mirrored"


@dataclass(frozen=True)
class CoefficientTable:
    grid: TimeGrid
    C: np.ndarray
    c: np.ndarray
    method: str
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        C = np.array(self.C, dtype=complex)
        c = np.array(self.c, dtype=complex).reshape(-1, len(self.grid))
        if C.shape != (len(self.grid),):
            raise ValueError("one C value per grid node is required")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "c", c)

    @property
    def N(self) -> int:
        return self.c.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    def rows(self) -> list[list[str]]:
        out = []
        for j, t in enumerate(self.times):
            row = [repr(float(t)), repr(float(self.C[j].real)), repr(float(self.C[j].imag))]
            for n in range(self.N):
                row += [repr(float(self.c[n, j].real)), repr(float(self.c[n, j].imag))]
            out.append(row)
        return out

    def header(self) -> list[str]:
        cols = ["t", "re_C", "im_C"]
        for n in range(1, self.N + 1):
            cols += [f"re_c{n}", f"im_c{n}"]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# method: {self.method}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.rows())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CoefficientTable":
        lines = text.splitlines()
        method = lines[0].split(":", 1)[1].strip()
        data = np.array([[float(v) for v in r] for r in csv.reader(lines[2:])])
        C = data[:, 1] + 1j * data[:, 2]
        c = (data[:, 3::2] + 1j * data[:, 4::2]).T
        return cls(TimeGrid(data[:, 0]), C, c, method)


def tables_to_csv(tables: Sequence[CoefficientTable]) -> str:
    """Several tables in one CSV, distinguished by a leading method column."""
    buf = io.StringIO()
    buf.write(f"# methods: {','.join(t.method for t in tables)}\n")
    w = csv.writer(buf, lineterminator="\n")
    if tables:
        w.writerow(["method"] + tables[0].header())
    for table in tables:
        for row in table.rows():
            w.writerow([table.method] + row)
    return buf.getvalue()


class _Workspace:
    """Coarse grid, its refinement and the driver data sampled on it."""

    def __init__(self, family: DriverFamily, N: int, grid: TimeGrid | None, refinement: int):
        if N > family.truncation_level:
            raise DriverError(f"N={N} exceeds the truncation level {family.truncation_level}")
        if N < 0:
            raise DriverError("N must be nonnegative")
        self.family = family
        self.N = N
        self.coarse = with_grid(family, grid)
        self.refinement = refinement
        self.fine = self.coarse.refine(refinement)
        self.idx = np.arange(len(self.coarse)) * refinement
        x0 = family.x0(self.fine.points).real
        self.x0 = x0 - x0[0]
        self.dx0 = np.diff(self.x0)
        self.dx = [None] + [family.path(m).increments(self.fine) for m in range(1, N + 1)]

    def table(self, C, c_fine, method, **meta) -> CoefficientTable:
        meta.setdefault("refinement", self.refinement)
        return CoefficientTable(self.coarse, C[self.idx], c_fine[:, self.idx], method, meta)


def solve_C(x0: DriverPath, grid: TimeGrid) -> np.ndarray:
    """C(t) = exp(x0(t) - x0(0)) at the grid nodes."""
    vals = x0(grid.points).real
    return np.exp(vals - x0.values[0].real).astype(complex)


def solve_coefficients_recurrence(
    family: DriverFamily,
    N: int = DEFAULT_N,
    grid: TimeGrid | None = None,
    refinement: int = DEFAULT_REFINEMENT,
) -> CoefficientTable:
    """Variation of constants, increasing in n.

    With d_n = exp(-n x0) c_n the self-coupling disappears:
    d_n(t) = sum_{k<n} (k+1) int_0^t d_k exp(-(n-k) x0) dx_{n-k}.
    """
    ws = _Workspace(family, N, grid, refinement)
    F = len(ws.fine)
    d = np.zeros((N + 1, F), dtype=complex)
    d[0] = 1.0
    for n in range(1, N + 1):
        src = np.zeros(F - 1, dtype=complex)
        for k in range(n):
            m = n - k
            src += trapezoid_increments((k + 1) * d[k] * np.exp(-m * ws.x0), ws.dx[m])
        np.cumsum(src, out=d[n, 1:])
    n = np.arange(1, N + 1)[:, None]
    c = d[1:] * np.exp(n * ws.x0[None, :])
    return ws.table(np.exp(ws.x0).astype(complex), c, "recurrence")


def composition_weight(parts: Sequence[int], convention: str = FORWARD) -> int:
    """Weight of one composition in the expansion of c_n.

    FORWARD (i_1 at the earliest time): prod_{j<p} (i_1 + ... + i_j + 1).
    MIRRORED: prod_{j<p} (n - (i_1 + ... + i_j) + 1), the same numbers
    attached to the reversed composition.
    """
    n = sum(parts)
    w = 1
    s = 0
    for i in parts[:-1]:
        s += i
        w *= (s + 1) if convention == FORWARD else (n - s + 1)
    return w


def _composition_sums(ws: _Workspace, N: int, convention: str) -> np.ndarray:
    """sum over compositions of w * J at the coarse nodes, per n (row n-1)."""
    engine = IteratedIntegrals(ws.family, ws.fine)
    d = np.zeros((N, len(ws.idx)), dtype=complex)
    for parts, J in engine.walk(N):
        d[sum(parts) - 1] += composition_weight(parts, convention) * J[ws.idx]
    return d


def solve_coefficients_compositions(
    family: DriverFamily,
    N: int,
    t: float,
    grid: TimeGrid | None = None,
    refinement: int = DEFAULT_REFINEMENT,
    convention: str = FORWARD,
    cap: int = SOLVER_COMPOSITION_CAP,
) -> np.ndarray:
    """c_1(t) .. c_N(t) from the weighted sum of iterated integrals."""
    if N > cap:
        raise CompositionCapError(f"N={N} exceeds the composition cap {cap}")
    if not 0.0 <= t <= family.T:
        raise DriverError(f"t={t!r} outside [0, {family.T}]")
    if t == 0.0:
        return np.zeros(N, dtype=complex)
    base = with_grid(family, grid)
    ws = _Workspace(family, N, TimeGrid(merge_points(base.points, [t], family.T)), refinement)
    j = ws.coarse.index_of(t)
    d = _composition_sums(ws, N, convention)[:, j]
    n = np.arange(1, N + 1)
    return d * np.exp(n * ws.x0[ws.idx[j]])


def compositions_table(
    family: DriverFamily,
    N: int = DEFAULT_N,
    grid: TimeGrid | None = None,
    refinement: int = DEFAULT_REFINEMENT,
    convention: str = FORWARD,
    cap: int = SOLVER_COMPOSITION_CAP,
) -> CoefficientTable:
    """The composition route evaluated at every grid node in one walk."""
    if N > cap:
        raise CompositionCapError(f"N={N} exceeds the composition cap {cap}")
    ws = _Workspace(family, N, grid, refinement)
    d = _composition_sums(ws, N, convention)
    x0c = ws.x0[ws.idx]
    n = np.arange(1, N + 1)[:, None]
    c = d * np.exp(n * x0c[None, :])
    return CoefficientTable(
        ws.coarse, np.exp(x0c).astype(complex), c, "compositions",
        {"refinement": refinement, "convention": convention},
    )


def solve_coefficients_picard(
    family: DriverFamily,
    N: int = DEFAULT_N,
    grid: TimeGrid | None = None,
    iterations: int = 200,
    refinement: int = DEFAULT_REFINEMENT,
    tol: float = 1e-15,
) -> CoefficientTable:
    """Fixed-point sweeps on the original (self-coupled) equations.

    Each sweep updates C and then c_1..c_N in order, so lower coefficients
    from the current sweep feed the higher ones. Stops after ``iterations``
    sweeps or once the sup-norm change falls below ``tol`` times the size
    of the iterate; ``meta`` records the sweeps used and the last gap.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    ws = _Workspace(family, N, grid, refinement)
    F = len(ws.fine)
    c = np.zeros((N + 1, F), dtype=complex)
    c[0] = 1.0
    C = np.ones(F, dtype=complex)
    gap = math.inf
    history = []
    for sweep in range(1, iterations + 1):
        C_old = C.copy()
        old = c.copy()
        C = 1.0 + cumulative_stieltjes(C_old, ws.dx0)
        for n in range(1, N + 1):
            src = n * trapezoid_increments(old[n], ws.dx0)
            for k in range(n):
                src = src + trapezoid_increments((k + 1) * c[k], ws.dx[n - k])
            c[n, 1:] = np.cumsum(src)
        gap = max(float(np.max(np.abs(c - old))), float(np.max(np.abs(C - C_old))))
        history.append(gap)
        size = max(1.0, float(np.max(np.abs(c))), float(np.max(np.abs(C))))
        if gap <= tol * size:
            break
    return ws.table(C, c[1:], "picard", iterations=sweep, gap=gap, gaps=history)


def assemble_solution(
    table: CoefficientTable, t: float, omega0T: float | None = None
) -> TruncatedSeries:
    """Snapshot of f_t; off-grid times are linearly interpolated with a warning."""
    pts = table.times
    if not pts[0] <= t <= pts[-1]:
        raise DriverError(f"t={t!r} outside the table range")
    j = int(np.argmin(np.abs(pts - t)))
    if abs(pts[j] - t) <= 1e-12 * max(pts[-1], 1.0):
        return TruncatedSeries(table.C[j], table.c[:, j], omega0T)
    warnings.warn(f"t={t} is not a grid node; coefficients interpolated", stacklevel=2)
    lo = int(np.searchsorted(pts, t)) - 1
    a = (t - pts[lo]) / (pts[lo + 1] - pts[lo])
    C = (1 - a) * table.C[lo] + a * table.C[lo + 1]
    c = (1 - a) * table.c[:, lo] + a * table.c[:, lo + 1]
    return TruncatedSeries(C, c, omega0T)
