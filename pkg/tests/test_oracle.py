import json

import numpy as np
import pytest

from lkcontrol.oracle import (
    default_z_samples,
    explicit_stepper,
    lk_residual,
    normwise_gap,
    residual_coefficients,
)
from lkcontrol.samples import beta_driver, mixed_two_mode, x0_only, zero_family
from lkcontrol.solver import solve_coefficients_recurrence


def table(fam, N=12, G=512):
    return solve_coefficients_recurrence(fam, N, fam.default_grid(G))


# lk_residual

def test_zero_family_residual_vanishes():
    fam = zero_family()
    assert lk_residual(fam, table(fam)).max_residual == 0.0


def test_x0_only_residual_small():
    fam = x0_only(0.2)
    assert lk_residual(fam, table(fam)).max_residual < 1e-7


def test_beta_residual_small():
    fam = beta_driver(0.2)
    assert lk_residual(fam, table(fam)).max_residual < 1e-6


@pytest.mark.parametrize("fam", [beta_driver(0.2, a=0.3), mixed_two_mode(0.2)[0]], ids=["beta-drift", "mixed"])
def test_residual_second_order(fam):
    z = default_z_samples(3)
    coarse = lk_residual(fam, table(fam, G=32), z).max_residual
    fine = lk_residual(fam, table(fam, G=64), z).max_residual
    assert coarse / fine >= 3.5


def test_exact_coefficients_leave_quadrature_residual_only():
    """Substituting the closed form f_t = z / (1 - 0.2 t z) gives the pure trapezoid error."""
    fam = beta_driver(0.2, M=3)
    t = table(fam, N=3, G=8)
    r = residual_coefficients(fam, t)
    # z^2 coefficient: 0.2 t - int_0^t 1 * 0.2 ds is exact under trapezoid
    assert np.max(np.abs(r[1])) < 1e-15
    # z^1 coefficient: C = 1 exactly
    assert np.max(np.abs(r[0])) == 0


def test_residual_rejects_outer_samples():
    fam = beta_driver(0.2)
    with pytest.raises(ValueError):
        lk_residual(fam, table(fam, G=8), [0.95])


def test_default_samples():
    z = default_z_samples(1)
    assert z.size == 40
    assert np.max(np.abs(z)) <= 0.5 + 1e-15
    assert np.array_equal(z, default_z_samples(1))
    assert not np.array_equal(z, default_z_samples(2))


def test_report_outputs():
    fam = mixed_two_mode(0.2)[0]
    rep = lk_residual(fam, table(fam, N=4, G=8), default_z_samples(0, count=2))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "re_z,im_z,t,residual"
    assert len(lines) == 1 + rep.z_samples.size * len(rep.times)
    s = json.loads(rep.summary_json())
    assert s["max_residual"] == rep.max_residual
    assert s["grid_intervals"] == 8  # the breakpoint at 1/2 is already a node


# explicit_stepper

def test_stepper_closed_form_with_drift():
    a, b = 0.3, 0.2
    st = explicit_stepper(beta_driver(b, a=a), 6, 512)
    q = b * (np.exp(a * st.times) - 1) / a
    exact = q[None, :] ** np.arange(1, 7)[:, None]
    assert np.max(np.abs(st.c - exact)) < 1e-12
    assert np.max(np.abs(st.C - np.exp(a * st.times))) < 1e-12


@pytest.mark.parametrize("fam", [beta_driver(0.2), beta_driver(0.2, a=0.3), mixed_two_mode(0.2)[0]],
                         ids=["beta", "beta-drift", "mixed"])
def test_stepper_matches_recurrence(fam):
    ref = table(fam)
    st = explicit_stepper(fam, 12, 512, ref.grid)
    assert np.array_equal(st.times, ref.times)
    assert normwise_gap(st.c, ref.c) < 1e-6
    assert normwise_gap(st.C, ref.C) < 1e-12


def test_stepper_fourth_order():
    fam = beta_driver(0.2, a=1.5, M=3)
    errs = []
    for steps in (8, 16):
        st = explicit_stepper(fam, 3, steps)
        q = 0.2 * (np.exp(1.5 * st.times[-1]) - 1) / 1.5
        errs.append(abs(st.c[2, -1] - q**3))
    assert errs[0] / errs[1] > 12


def test_stepper_inserts_breakpoints():
    st = explicit_stepper(mixed_two_mode(0.2)[0], 2, 3)
    assert np.any(np.abs(st.times - 0.5) < 1e-15)


def test_stepper_argument_errors():
    with pytest.raises(ValueError):
        explicit_stepper(beta_driver(0.2), 2, 0)
    with pytest.raises(ValueError):
        explicit_stepper(beta_driver(0.2, M=2), 3, 8)


# normwise_gap

def test_normwise_gap_scales_per_row():
    a = np.array([[1.0, 2.0], [1e-12, 2e-12]])
    b = a * (1 + 1e-3)
    assert normwise_gap(a, b) == pytest.approx(1e-3 / (1 + 1e-3))


def test_normwise_gap_zero_rows():
    z = np.zeros((2, 3))
    assert normwise_gap(z, z) == 0.0
    assert normwise_gap(np.zeros((0, 3)), np.zeros((0, 3))) == 0.0


def test_normwise_gap_shape_mismatch():
    with pytest.raises(ValueError):
        normwise_gap(np.zeros(3), np.zeros(4))


def test_stepper_substeps_report_coarse_nodes():
    fam = beta_driver(0.2, a=0.3)
    grid = fam.default_grid(16)
    one = explicit_stepper(fam, 6, 16, grid)
    eight = explicit_stepper(fam, 6, 16, grid, substeps=8)
    assert np.array_equal(eight.times, one.times)
    ref = explicit_stepper(fam, 6, 16, grid, substeps=32)
    assert normwise_gap(eight.c, ref.c) < normwise_gap(one.c, ref.c) / 1000
