import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lkcontrol.analysis import (
    alexander_bound_closed_form,
    check_univalence,
    coefficient_bound,
    compute_alpha,
    extension_certificate,
    injectivity_spot_check,
    quartic,
    univalence_threshold,
)
from lkcontrol.report import CERTIFIED, INCONCLUSIVE
from lkcontrol.series import TruncatedSeries, coefficient_tail

# smallest real root of 2x^4 - 8x^3 + 11x^2 - 10x + 2, from numpy's companion-matrix solver
ALPHA_ROOTS = 0.2621098060155518


# compute_alpha

def test_alpha_against_companion_roots():
    roots = np.roots([2, -8, 11, -10, 2])
    smallest = min(r.real for r in roots if abs(r.imag) < 1e-12 and r.real > 0)
    assert compute_alpha() == pytest.approx(smallest, abs=1e-14)
    assert compute_alpha() == pytest.approx(ALPHA_ROOTS, abs=1e-15)


def test_alpha_residual():
    assert abs(quartic(compute_alpha())) <= 1e-12


def test_alpha_half_bracket():
    h = univalence_threshold()
    assert 1 / 8 < h < 1 / 7
    assert h == pytest.approx(0.13105, abs=5e-5)


def test_alpha_is_smallest_positive_root():
    a = compute_alpha()
    xs = np.linspace(0, a, 2000, endpoint=False)
    assert np.all(np.array([quartic(x) for x in xs]) > 0)


# coefficient_bound

def test_coefficient_bound_examples():
    assert coefficient_bound(1, 0.25) == pytest.approx(0.25)
    assert coefficient_bound(2, 0.25) == pytest.approx(0.375)


def test_beta_coefficients_within_bound():
    for n in range(1, 13):
        assert 0.2**n <= coefficient_bound(n, 0.2)


def test_coefficient_bound_domain():
    with pytest.raises(ValueError):
        coefficient_bound(0, 0.1)


# alexander_bound_closed_form

@pytest.mark.parametrize("w", [0.05, 0.1, 0.13105, 0.2, 0.24])
def test_closed_form_matches_series(w):
    x = 2 * w
    brute = math.fsum(n * n * (n - 1) * x ** (n - 1) / 4 for n in range(2, 10_001))
    assert alexander_bound_closed_form(w) == pytest.approx(brute, abs=1e-10)


def test_closed_form_zero_and_equality_case():
    assert alexander_bound_closed_form(0.0) == 0.0
    assert alexander_bound_closed_form(univalence_threshold()) == pytest.approx(1.0, abs=1e-10)


def test_closed_form_domain():
    with pytest.raises(ValueError):
        alexander_bound_closed_form(0.5)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.0, 0.49), b=st.floats(0.0, 0.49))
def test_closed_form_monotone(a, b):
    lo, hi = sorted((a, b))
    assert alexander_bound_closed_form(lo) <= alexander_bound_closed_form(hi)


# check_univalence

def test_identity_certified():
    v = check_univalence(TruncatedSeries.identity(6))
    assert v.certified and v.status == CERTIFIED
    assert v.alexander_partial == 0
    assert v.sampled_starlikeness_min == pytest.approx(1.0)


def test_small_geometric_series_certified():
    # sum_{n>=2} n (0.1)^(n-1) = 1/0.81 - 1
    c = 0.1 ** np.arange(1, 31)
    v = check_univalence(TruncatedSeries(1.0, c))
    assert v.alexander_partial == pytest.approx(1 / 0.81 - 1, rel=1e-12)
    assert v.certified


def test_criterion_is_only_sufficient():
    """z / (1 - 0.3 z) is univalent, yet its Alexander sum 1/0.49 - 1 exceeds 1."""
    c = 0.3 ** np.arange(1, 41)
    v = check_univalence(TruncatedSeries(1.0, c))
    assert v.alexander_partial == pytest.approx(1 / 0.49 - 1, rel=1e-10)
    assert not v.certified and v.status == INCONCLUSIVE
    assert v.sampled_starlikeness_min > 0


def test_omega_above_threshold_is_inconclusive():
    c = 0.2 ** np.arange(1, 13)
    v = check_univalence(TruncatedSeries(1.0, c, omega0T=0.2))
    assert v.status == INCONCLUSIVE
    assert v.status != "non-univalent"


def test_omega_at_threshold_certified_for_small_data():
    c = 0.01 ** np.arange(1, 13)
    v = check_univalence(TruncatedSeries(1.0, c, omega0T=0.12))
    assert v.certified
    assert v.alexander_total == pytest.approx(v.alexander_partial + v.alexander_tail)


def test_divergent_majorant_is_inconclusive():
    v = check_univalence(TruncatedSeries.identity(4, omega0T=0.6))
    assert v.alexander_tail is None and v.status == INCONCLUSIVE


def test_prefactor_does_not_change_verdict():
    c = np.array([0.2, 0.05j])
    a = check_univalence(TruncatedSeries(1.0, c))
    b = check_univalence(TruncatedSeries(0.3 - 2j, c))
    assert a.to_dict() == b.to_dict()


# injectivity_spot_check

def test_injectivity_on_univalent_quadratic():
    rep = injectivity_spot_check(TruncatedSeries(1.0, [0.5]), pairs=100_000)
    assert rep["collisions"] == 0
    # |f(z1) - f(z2)| / |z1 - z2| = |1 + (z1 + z2) / 2| >= 1 - 0.95
    assert rep["min_ratio"] >= 0.05 - 1e-12


def test_injectivity_detects_folding():
    # z + 2 z^2 identifies z1 and z2 whenever z1 + z2 = -1/2
    rep = injectivity_spot_check(TruncatedSeries(1.0, [2.0]), pairs=100_000)
    assert rep["min_ratio"] < 0.01


def test_injectivity_is_seeded():
    s = TruncatedSeries(1.0, [0.3, 0.1j])
    assert injectivity_spot_check(s, 1000, seed=7) == injectivity_spot_check(s, 1000, seed=7)


def test_injectivity_needs_pairs():
    with pytest.raises(ValueError):
        injectivity_spot_check(TruncatedSeries.identity(1), pairs=0)


# extension_certificate

@pytest.mark.parametrize("w", [0.05, 0.12, univalence_threshold(), 0.3, 0.49])
def test_extension_radius_beyond_one(w):
    cert = extension_certificate(w)
    r = (1 + 1 / (2 * w)) / 2
    assert cert["certified"]
    assert cert["probe_radius"] == pytest.approx(r)
    assert r > 1
    assert math.isfinite(cert["majorant"])
    assert cert["majorant"] == pytest.approx(1 + coefficient_tail(2 * w, r, 1) / r)


def test_extension_fails_at_half():
    cert = extension_certificate(0.5)
    assert not cert["certified"] and cert["majorant"] is None


def test_extension_zero_omega():
    cert = extension_certificate(0.0)
    assert cert["certified"] and cert["radius_bound"] == math.inf
