"""Independent checks of a coefficient table.

``lk_residual`` substitutes the tabulated truncated series back into the
integral equation f_t(z) - z = int_0^t z f_s'(z) {dx0 + dxi(x, z)_s} and
integrates the right side with the trapezoid rule over the table's own
nodes, in the original self-coupled form. ``explicit_stepper`` treats the
coefficient equations as a linear ODE system (the drivers have piecewise
constant densities) and integrates it with classical RK4.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .drivers import DriverFamily, TimeGrid, merge_points, trapezoid_increments
from .solver import CoefficientTable

LOG_FALLBACK = 1e-12


@dataclass
class ResidualReport:
    z_samples: np.ndarray
    times: np.ndarray
    residuals: np.ndarray  # shape (len(z_samples), len(times))
    grid_intervals: int
    meta: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re_z", "im_z", "t", "residual"])
        for i, z in enumerate(self.z_samples):
            for j, t in enumerate(self.times):
                w.writerow([repr(float(z.real)), repr(float(z.imag)), repr(float(t)), repr(float(self.residuals[i, j]))])
        return buf.getvalue()

    def summary(self) -> dict:
        i, j = np.unravel_index(int(np.argmax(self.residuals)), self.residuals.shape)
        z = complex(self.z_samples[i])
        return {
            "max_residual": self.max_residual,
            "witness": {"z": [z.real, z.imag], "t": float(self.times[j])},
            "grid_intervals": self.grid_intervals,
            "samples": int(self.z_samples.size),
            **self.meta,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def residual_coefficients(family: DriverFamily, table: CoefficientTable) -> np.ndarray:
    """Taylor coefficients r_0..r_N (of z^1..z^(N+1)) of the residual at each node.

    Degrees above N+1 are dropped: a truncated series cannot balance them.
    """
    grid = table.grid
    N = table.N
    a = np.vstack([np.ones(len(grid)), table.c])  # a_k = c_k with c_0 = 1
    F = table.C[None, :] * a  # coefficients of f_t / z
    dx = [family.path(m).increments(grid) for m in range(N + 1)]
    res = np.empty_like(F)
    for n in range(N + 1):
        # coefficient of z^(n+1) in z f'(z) {dx0 + sum_m z^m dx_m}
        src = trapezoid_increments((n + 1) * F[n], dx[0])
        for k in range(n):
            src = src + trapezoid_increments((k + 1) * F[k], dx[n - k])
        rhs = np.concatenate([[0.0], np.cumsum(src)])
        res[n] = F[n] - (1.0 if n == 0 else 0.0) - rhs
    return res


def default_z_samples(seed: int = 0, radius: float = 0.5, count: int = 16) -> np.ndarray:
    """Fixed rings at radius/5, radius/2, radius plus seeded points in the disk."""
    theta = 2 * np.pi * np.arange(8) / 8
    rings = np.concatenate([r * np.exp(1j * theta) for r in (radius / 5, radius / 2, radius)])
    rng = np.random.default_rng(seed)
    rand = radius * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))
    return np.concatenate([rings, rand])


def lk_residual(
    family: DriverFamily,
    table: CoefficientTable,
    z_samples=None,
) -> ResidualReport:
    z = np.asarray(default_z_samples() if z_samples is None else z_samples, dtype=complex).ravel()
    if z.size and np.max(np.abs(z)) > 0.9:
        raise ValueError("residual samples must satisfy |z| <= 0.9")
    r = residual_coefficients(family, table)
    powers = z[:, None] ** np.arange(1, table.N + 2)[None, :]
    residuals = np.abs(powers @ r)
    return ResidualReport(z, table.times.copy(), residuals, len(table.grid) - 1)


def _rk4_matrix(slopes: np.ndarray, N: int) -> np.ndarray:
    """A with (c_0, c_1, .., c_N)' = A (c_0, .., c_N), c_0 = 1 held fixed."""
    A = np.zeros((N + 1, N + 1), dtype=complex)
    for n in range(1, N + 1):
        A[n, n] = n * slopes[0]
        for k in range(n):
            A[n, k] = (k + 1) * slopes[n - k]
    return A


def explicit_stepper(
    family: DriverFamily,
    N: int,
    steps: int,
    grid: TimeGrid | None = None,
    substeps: int = 1,
) -> CoefficientTable:
    """RK4 from (C, c) = (1, 0) on ``steps`` uniform steps plus every breakpoint.

    If ``grid`` is given its nodes are used instead of the uniform steps
    (breakpoints are still added). Each cell is split into ``substeps``
    RK4 steps; the table reports the unsplit nodes.
    """
    if steps < 1 or substeps < 1:
        raise ValueError("steps and substeps must be >= 1")
    if N > family.truncation_level:
        raise ValueError(f"N={N} exceeds the truncation level {family.truncation_level}")
    T = family.T
    base = np.linspace(0.0, T, steps + 1) if grid is None else grid.points
    nodes = TimeGrid(merge_points(base, family.breakpoints(), T))
    fine = nodes.refine(substeps)
    pts = fine.points
    dts = np.diff(pts)
    incs = np.array([family.path(m).increments(fine) for m in range(N + 1)])
    incs[0] = incs[0].real

    y = np.zeros(N + 1, dtype=complex)
    y[0] = 1.0
    logC = 0.0
    C = 1.0 + 0j
    Cs = [C]
    out = [y[1:].copy()]
    for j, h in enumerate(dts):
        slopes = incs[:, j] / h
        A = _rk4_matrix(slopes, N)
        k1 = A @ y
        k2 = A @ (y + 0.5 * h * k1)
        k3 = A @ (y + 0.5 * h * k2)
        k4 = A @ (y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        y[0] = 1.0
        a0 = slopes[0].real
        # RK4 growth factor for C' = a0 C
        q = a0 * h
        C_next = C * (1 + q + q * q / 2 + q**3 / 6 + q**4 / 24)
        logC += q
        if abs(C_next) < LOG_FALLBACK:
            C_next = np.exp(logC)
        C = C_next
        Cs.append(C)
        out.append(y[1:].copy())
    c = np.array(out).T.reshape(N, -1)[:, ::substeps]
    return CoefficientTable(nodes, np.array(Cs)[::substeps], c, "stepper", {"steps": len(dts)})


def normwise_gap(a: np.ndarray, b: np.ndarray, floor: float = 1e-300) -> float:
    """Worst over rows of max_t |a - b| / max(max_t |a|, max_t |b|).

    Rows are coefficients c_n over time (a 1-D array is one row). Scaling by
    the row's own size keeps tiny early-time values from inflating the gap.
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    diff = np.max(np.abs(a - b), axis=1)
    scale = np.maximum(np.maximum(np.max(np.abs(a), axis=1), np.max(np.abs(b), axis=1)), floor)
    return float(np.max(diff / scale))
