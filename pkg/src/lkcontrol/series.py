"""Truncated Taylor data f(z) = C (z + sum_{n=1}^N c_n z^{n+1}).

When the coefficients come from an omega-controlled driver with
omega(0, T) = w, they obey |c_n| <= n (n + 1) (2 w)^n / 4, which gives
closed-form majorants for everything beyond the truncation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np


def geometric_tail_derivative(m: int, j: int, y: float) -> float:
    """j-th derivative of sum_{n>=m} y^n = y^m / (1 - y), for 0 <= y < 1.

    Leibniz on y^m (1 - y)^-1; every term is nonnegative, so there is no
    cancellation even when the tail is tiny.
    """
    if not 0.0 <= y < 1.0:
        raise ValueError(f"y={y!r} outside [0, 1)")
    total = 0.0
    for i in range(min(j, m) + 1):
        total += (
            math.comb(j, i) * math.perm(m, i) * y ** (m - i)
            * math.factorial(j - i) / (1.0 - y) ** (j - i + 1)
        )
    return total


def majorant_tail(x: float, first: int) -> float:
    """sum_{n>=first} n^2 (n-1) x^(n-1) / 4, the Alexander-sum majorant.

    Uses n^2 (n-1) = n(n-1)(n-2) + 2 n(n-1).
    """
    first = max(first, 2)
    return 0.25 * (
        x**2 * geometric_tail_derivative(first, 3, x)
        + 2.0 * x * geometric_tail_derivative(first, 2, x)
    )


def coefficient_tail(x: float, r: float, first: int) -> float:
    """sum_{n>=first} n (n+1) x^n r^(n+1) / 4, the coefficient majorant tail."""
    y = x * r
    first = max(first, 1)
    return 0.25 * r * (
        y**2 * geometric_tail_derivative(first, 2, y)
        + 2.0 * y * geometric_tail_derivative(first, 1, y)
    )


class RadiusEstimate(NamedTuple):
    value: float
    certified: bool


@dataclass(frozen=True)
class TruncatedSeries:
    prefactor: complex
    coeffs: np.ndarray
    omega0T: float | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "prefactor", complex(self.prefactor))
        if self.omega0T is not None and self.omega0T < 0:
            raise ValueError("omega0T must be nonnegative")

    @classmethod
    def identity(cls, N: int = 0, omega0T: float | None = None) -> "TruncatedSeries":
        return cls(1.0, np.zeros(N), omega0T)

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def majorant_ratio(self) -> float | None:
        """2 omega(0, T), or None without tail parameters."""
        return None if self.omega0T is None else 2.0 * self.omega0T

    def normalized(self) -> "TruncatedSeries":
        return replace(self, prefactor=1.0)

    def __call__(self, z):
        return evaluate(self, z)

    def tail_bound(self, r: float) -> float | None:
        """Majorant of sum_{n>N} |c_n| r^(n+1); 0 for an exact polynomial."""
        x = self.majorant_ratio
        if x is None:
            return 0.0
        if x * r >= 1.0:
            return None
        return coefficient_tail(x, r, self.N + 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# C: {float(self.prefactor.real)!r} {float(self.prefactor.imag)!r}\n")
        buf.write(f"# omega0T: {'none' if self.omega0T is None else repr(float(self.omega0T))}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "re_c", "im_c"])
        for n, c in enumerate(self.coeffs, start=1):
            w.writerow([n, repr(float(c.real)), repr(float(c.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TruncatedSeries":
        lines = text.splitlines()
        C = complex(*map(float, lines[0].split(":", 1)[1].split()))
        w = lines[1].split(":", 1)[1].strip()
        rows = list(csv.reader(lines[3:]))
        coeffs = [complex(float(re), float(im)) for _, re, im in rows]
        return cls(C, np.array(coeffs), None if w == "none" else float(w))


def evaluate(series: TruncatedSeries, z):
    """Horner evaluation of C (z + sum c_n z^(n+1))."""
    z = np.asarray(z, dtype=complex)
    poly = np.concatenate([series.coeffs[::-1], [1.0]])
    out = series.prefactor * z * np.polyval(poly, z)
    return complex(out) if out.ndim == 0 else out


def derivative_eval(series: TruncatedSeries, z):
    """C (1 + sum (n+1) c_n z^n)."""
    z = np.asarray(z, dtype=complex)
    n = np.arange(1, series.N + 1)
    poly = np.concatenate([((n + 1) * series.coeffs)[::-1], [1.0]])
    out = series.prefactor * np.polyval(poly, z)
    return complex(out) if out.ndim == 0 else out


def radius_lower_bound(series: TruncatedSeries) -> RadiusEstimate:
    """Convergence radius: 1/(2 omega) from the majorant, else a root test.

    The root test takes the largest |c_n|^(1/n) over the top quarter of the
    computed indices and is only an estimate.
    """
    x = series.majorant_ratio
    if x is not None:
        return RadiusEstimate(math.inf if x == 0 else 1.0 / x, True)
    N = series.N
    if N == 0:
        return RadiusEstimate(math.inf, False)
    lo = max(1, N - N // 4)
    n = np.arange(lo, N + 1)
    roots = np.abs(series.coeffs[lo - 1:]) ** (1.0 / n)
    top = float(np.max(roots))
    return RadiusEstimate(math.inf if top == 0 else 1.0 / top, False)


def alexander_sum(series: TruncatedSeries) -> tuple[float, float | None]:
    """(sum_{n=2}^{N+1} n |c_{n-1}|, tail majorant or None).

    Without tail parameters the series is the exact polynomial and the tail
    is 0. With 2 omega >= 1 the majorant diverges and the tail is unknown.
    """
    n = np.arange(2, series.N + 2)
    partial = float(np.sum(n * np.abs(series.coeffs)))
    x = series.majorant_ratio
    if x is None:
        return partial, 0.0
    if x >= 1.0:
        return partial, None
    return partial, majorant_tail(x, series.N + 2)
