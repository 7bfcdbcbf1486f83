"""Reference driver families with known behaviour.

``beta_driver`` has the closed-form solution f_t(z) = z / (1 - beta t z),
so c_n(t) = (beta t)^n, and it meets the controlled inequalities with
equality for omega(s, t) = beta (t - s). The mixed families were checked
with ``verify_controlled`` up to n = 12 for the linear rates returned
alongside them.
"""

from __future__ import annotations

import numpy as np

from .control import ControlFunction
from .drivers import DriverFamily, linear_path, make_piecewise_linear, zero_path

M_DEFAULT = 12

# omega rate -> (x0 slope, x1 rate, x2 amplitude)
_MIXED = {0.2: (-0.1, 0.1, 0.003), 0.12: (-0.1, 0.08, 0.001)}


def _pad(paths, M, T):
    return tuple(paths) + tuple(zero_path(T) for _ in range(M - len(paths)))


def zero_family(T: float = 1.0, M: int = M_DEFAULT) -> DriverFamily:
    return DriverFamily(zero_path(T), _pad([], M, T))


def x0_only(a: float = 0.2, T: float = 1.0, M: int = M_DEFAULT) -> DriverFamily:
    return DriverFamily(linear_path(T, a), _pad([], M, T))


def beta_driver(beta: float = 0.2, T: float = 1.0, M: int = M_DEFAULT, a: float = 0.0) -> DriverFamily:
    return DriverFamily(linear_path(T, a), _pad([linear_path(T, beta)], M, T))


def mixed_two_mode(omega_rate: float = 0.2, T: float = 1.0, M: int = M_DEFAULT) -> tuple[DriverFamily, ControlFunction]:
    """Decreasing x0, a complex linear x1 and an x2 switched on at T/2."""
    try:
        a0, b1, amp2 = _MIXED[omega_rate]
    except KeyError:
        raise ValueError(f"mixed family only tabulated for rates {sorted(_MIXED)}") from None
    x0 = linear_path(T, a0)
    x1 = linear_path(T, b1 * np.exp(0.5j))
    x2 = make_piecewise_linear([0.0, T / 2, T], [0.0, 0.0, amp2 * 1j * T])
    return DriverFamily(x0, _pad([x1, x2], M, T)), ControlFunction.linear(omega_rate)
