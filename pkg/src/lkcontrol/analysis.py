"""Quantitative consequences: coefficient bound, univalence threshold, extension radius."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .report import CERTIFIED, INCONCLUSIVE
from .series import TruncatedSeries, alexander_sum, coefficient_tail, derivative_eval, evaluate

QUARTIC = (2.0, -8.0, 11.0, -10.0, 2.0)
STARLIKE_RADII = (0.3, 0.6, 0.9)
STARLIKE_ANGLES = 64
COLLISION_FLOOR = 1e-12


def quartic(x: float) -> float:
    """2x^4 - 8x^3 + 11x^2 - 10x + 2."""
    acc = 0.0
    for a in QUARTIC:
        acc = acc * x + a
    return acc


def _quartic_prime(x: float) -> float:
    return ((8.0 * x - 24.0) * x + 22.0) * x - 10.0


@lru_cache(maxsize=None)
def compute_alpha(tol: float = 1e-14) -> float:
    """Smallest real root of the quartic.

    The quartic is positive for x <= 0 and strictly decreasing on [0, 1/2]
    with q(0) > 0 > q(1/2), so the root in that bracket is the smallest one.
    Bisection narrows the bracket, then Newton polishes inside it.
    """
    lo, hi = 0.0, 0.5
    if not quartic(lo) > 0 > quartic(hi):
        raise ArithmeticError("no sign change on [0, 1/2]")
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if quartic(mid) > 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(50):
        q = quartic(x)
        if abs(q) <= tol:
            break
        step = x - q / _quartic_prime(x)
        x = step if lo <= step <= hi else 0.5 * (lo + hi)
        if quartic(x) > 0:
            lo = x
        else:
            hi = x
    return x


def univalence_threshold() -> float:
    """alpha / 2, the largest admissible omega(0, T)."""
    return 0.5 * compute_alpha()


def coefficient_bound(n: int, omega0T: float) -> float:
    """n (n + 1) (2 omega)^n / 4."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if omega0T < 0:
        raise ValueError("omega0T must be nonnegative")
    return n * (n + 1) * (2.0 * omega0T) ** n / 4.0


def alexander_bound_closed_form(omega0T: float) -> float:
    """Majorant of sum_{n>=2} n |c_{n-1}|: x (x + 2) / (2 (1 - x)^4), x = 2 omega."""
    if not 0.0 <= omega0T < 0.5:
        raise ValueError(f"omega0T={omega0T!r} outside [0, 1/2): the majorant diverges")
    x = 2.0 * omega0T
    return x * (x + 2.0) / (2.0 * (1.0 - x) ** 4)


@dataclass
class UnivalenceVerdict:
    alexander_partial: float
    alexander_tail: float | None
    certified: bool
    status: str
    threshold_used: float
    omega0T: float | None
    sampled_starlikeness_min: float
    reason: str

    @property
    def alexander_total(self) -> float | None:
        if self.alexander_tail is None:
            return None
        return self.alexander_partial + self.alexander_tail

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alexander_total"] = self.alexander_total
        return d


def starlikeness_samples(series: TruncatedSeries) -> np.ndarray:
    """Re(z f'(z) / f(z)) on fixed circles, for the normalised series."""
    f = series.normalized()
    theta = 2 * np.pi * np.arange(STARLIKE_ANGLES) / STARLIKE_ANGLES
    z = (np.asarray(STARLIKE_RADII)[:, None] * np.exp(1j * theta)[None, :]).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.real(z * derivative_eval(f, z) / evaluate(f, z))


def check_univalence(series: TruncatedSeries, tol: float = 1e-12) -> UnivalenceVerdict:
    """Alexander's criterion sum n |a_n| <= 1 on the normalised series.

    The criterion only ever certifies. For series carrying a control bound
    the verdict also requires omega(0, T) <= alpha/2; everything else is
    inconclusive. ``tol`` absorbs rounding in the comparison with 1.
    """
    threshold = univalence_threshold()
    partial, tail = alexander_sum(series)
    samples = starlikeness_samples(series)
    star_min = float(np.nanmin(samples)) if np.any(np.isfinite(samples)) else -math.inf

    if tail is None:
        holds, reason = False, "tail majorant diverges (2 omega >= 1)"
    elif partial + tail > 1.0 + tol:
        holds, reason = False, f"sum {partial + tail:.6g} exceeds 1; criterion is only sufficient"
    else:
        holds, reason = True, "Alexander sum <= 1"

    w = series.omega0T
    if holds and w is not None and w > threshold:
        certified = False
        reason = f"omega(0,T)={w:.6g} above alpha/2={threshold:.6g}"
    else:
        certified = holds

    return UnivalenceVerdict(
        alexander_partial=partial,
        alexander_tail=tail,
        certified=certified,
        status=CERTIFIED if certified else INCONCLUSIVE,
        threshold_used=threshold,
        omega0T=w,
        sampled_starlikeness_min=star_min,
        reason=reason,
    )


def _sample_disk(rng: np.random.Generator, size: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def injectivity_spot_check(
    series: TruncatedSeries,
    pairs: int = 100_000,
    seed: int = 0,
    radius: float = 0.95,
    chunk: int = 200_000,
) -> dict:
    """Random pairs z1 != z2 in |z| <= radius; a collision is a separation
    ratio |f(z1) - f(z2)| / |z1 - z2| at or below 1e-12."""
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    f = series.normalized()
    rng = np.random.default_rng(seed)
    best = (math.inf, 0j, 0j)
    collisions = 0
    done = 0
    while done < pairs:
        m = min(chunk, pairs - done)
        z1 = _sample_disk(rng, m, radius)
        z2 = _sample_disk(rng, m, radius)
        sep = np.abs(z1 - z2)
        ok = sep > 0
        ratio = np.full(m, math.inf)
        ratio[ok] = np.abs(evaluate(f, z1[ok]) - evaluate(f, z2[ok])) / sep[ok]
        collisions += int(np.sum(ratio <= COLLISION_FLOOR))
        k = int(np.argmin(ratio))
        if ratio[k] < best[0]:
            best = (float(ratio[k]), complex(z1[k]), complex(z2[k]))
        done += m
    ratio, z1, z2 = best
    return {
        "pairs": pairs,
        "seed": seed,
        "radius": radius,
        "collisions": collisions,
        "min_ratio": ratio,
        "witness": {"z1": [z1.real, z1.imag], "z2": [z2.real, z2.imag]},
        "injective_on_samples": collisions == 0,
    }


def extension_certificate(omega0T: float) -> dict:
    """Majorant of sum |c_n| r^(n+1) at r midway between 1 and 1/(2 omega).

    A finite value there shows the Taylor series converges beyond the closed
    unit disk.
    """
    if omega0T < 0:
        raise ValueError("omega0T must be nonnegative")
    x = 2.0 * omega0T
    if x >= 1.0:
        return {"omega0T": omega0T, "certified": False, "radius_bound": 1.0 / x if x else math.inf,
                "probe_radius": None, "majorant": None}
    bound = math.inf if x == 0 else 1.0 / x
    r = 2.0 if x == 0 else 0.5 * (1.0 + bound)
    value = 1.0 + coefficient_tail(x, r, 1) / r  # |f|/r <= 1 + sum |c_n| r^n
    return {
        "omega0T": omega0T,
        "certified": math.isfinite(value) and r > 1.0,
        "radius_bound": bound,
        "probe_radius": r,
        "majorant": value,
    }
