import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nuggetgp.exact_exponential import EquidistantSpec, loglik_linear_model, psi_hat_expansion, quad_form_linear_model
from nuggetgp.kernels import KernelSpec, corr_matrix
from nuggetgp.likelihood import (
    AllInfeasible,
    Dataset,
    DegenerateData,
    FitOptions,
    Flag,
    Status,
    beta_hat,
    find_modes,
    fit_mle,
    profile_dlogpsi,
    profile_loglik,
    scan_profile,
    sigma2_hat,
)
from nuggetgp.models import builtin_dataset

from conftest import equidistant


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        Dataset([1.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        Dataset([0.0, 1.0], [1.0, np.nan])


def test_beta_hat_identity_is_mean():
    d = Dataset([0.0, 1.0, 2.0], [1.0, 2.0, 3.0])
    k = KernelSpec("exponential", 1e-6)  # correlations underflow to exactly 0
    assert beta_hat(d, k) == pytest.approx(2.0, rel=1e-15)
    assert sigma2_hat(d, k, 2.0) == pytest.approx(2 / 3, rel=1e-15)


@pytest.mark.parametrize("psi", [0.05, 0.5, 3.0, 40.0])
def test_beta_hat_linear_model_zero(psi):
    d = builtin_dataset("linear", 11)
    assert abs(beta_hat(d, KernelSpec("exponential", psi))) <= 1e-12


def test_beta_hat_matches_dense_gls(rng):
    x = np.sort(rng.uniform(0, 1, 4))
    y = rng.standard_normal(4)
    k = KernelSpec("gaussian", 0.7)
    rinv = np.linalg.inv(corr_matrix(k, x))
    h = np.ones(4)
    oracle = (h @ rinv @ y) / (h @ rinv @ h)
    assert beta_hat(Dataset(x, y), k) == pytest.approx(oracle, rel=1e-10)


def test_sigma2_hat_cases():
    d = Dataset([0.0, 0.5, 1.0], [4.0, 4.0, 4.0])
    assert sigma2_hat(d, KernelSpec("gaussian", 0.3), 4.0) == 0.0
    d = builtin_dataset("linear", 5)
    k = KernelSpec("exponential", 1.0)
    expected = quad_form_linear_model(EquidistantSpec.from_psi(5, 1.0)) / 5
    assert sigma2_hat(d, k, beta_hat(d, k)) == pytest.approx(expected, rel=1e-12)


def test_profile_loglik_two_points():
    d = Dataset([0.0, 1.0], [0.0, 1.0])
    value, flag = profile_loglik(d, "exponential", 0.0, 1 / math.log(2))
    assert flag is Flag.OK
    assert value == pytest.approx(-0.5 * math.log(0.75), abs=1e-14)
    assert value == pytest.approx(0.143841, abs=1e-6)


@pytest.mark.parametrize("n, psi_max", [(3, 1e4), (8, 1e4), (20, 1e3), (35, 1e3)])
def test_profile_matches_closed_form(backend, n, psi_max):
    # for n >= 20 near psi=1e4, rounding of the matrix entries alone moves L by ~1e-10
    d = builtin_dataset("linear", n)
    p = scan_profile(d, "exponential", 0.0, psi_max=psi_max)
    checked = 0
    for psi, v, f in zip(p.grid, p.values, p.flags):
        if f is Flag.OK:
            closed = loglik_linear_model(EquidistantSpec.from_psi(n, psi))
            assert v == pytest.approx(closed, abs=1e-10)
            checked += 1
    assert checked > 300


def test_profile_derivative_matches_finite_difference(backend):
    d = builtin_dataset("sin", 9)
    for fam, nu, psi in [("gaussian", 0.01, 0.3), ("exponential", 0.0, 0.4), ("gaussian", 0.0, 0.2)]:
        h = 1e-5
        up, _ = profile_loglik(d, fam, nu, psi * math.exp(h))
        dn, _ = profile_loglik(d, fam, nu, psi * math.exp(-h))
        assert profile_dlogpsi(d, fam, nu, psi) == pytest.approx((up - dn) / (2 * h), rel=1e-6)


def test_scan_grid_size_precondition():
    d = builtin_dataset("sin", 7)
    with pytest.raises(ValueError):
        scan_profile(d, "gaussian", 0.0, grid_size=1)
    assert len(scan_profile(d, "gaussian", 0.0, grid_size=16).grid) == 16
    with pytest.raises(ValueError):
        scan_profile(d, "gaussian", 0.0, psi_min=1.0, psi_max=1.0)


def test_scan_flags_large_psi_tail():
    p = scan_profile(builtin_dataset("sin", 14), "gaussian", 0.0)
    assert p.flags[0] is Flag.OK
    assert p.flags[-1] is Flag.NOT_PD
    assert Flag.NOT_PD in p.flags[len(p.flags) // 2:]
    ok = p.ok
    assert np.all(np.isfinite(p.values[ok]))
    assert np.all(np.diff(p.grid) > 0)


def test_scan_linear_gaussian_increasing():
    p = scan_profile(builtin_dataset("linear", 10), "gaussian", 0.0)
    ok = np.flatnonzero(p.ok)
    assert ok[0] == 0
    assert np.argmax(p.values[ok]) == len(ok) - 1


def test_find_modes_unimodal_and_increasing():
    p = scan_profile(builtin_dataset("linear", 12), "exponential", 0.0)
    assert len(find_modes(p)) == 1
    p = scan_profile(builtin_dataset("linear", 12), "gaussian", 0.0)
    assert find_modes(p) == []


def test_find_modes_false_mode():
    p = scan_profile(builtin_dataset("sin", 7), "gaussian", 0.0001)
    modes = find_modes(p)
    assert len(modes) >= 2
    assert [m.psi for m in modes] == sorted(m.psi for m in modes)
    for m in modes:
        v, _ = profile_loglik(p.dataset, "gaussian", 0.0001, m.psi)
        for s in (0.99, 1.01):
            assert v >= profile_loglik(p.dataset, "gaussian", 0.0001, m.psi * s)[0]


def test_fit_linear_exponential_n20():
    fit = fit_mle(builtin_dataset("linear", 20), "exponential", 0.0)
    assert fit.status is Status.INTERIOR
    assert fit.psi_hat == pytest.approx(8.8131, abs=1e-3)
    assert abs(fit.psi_hat - psi_hat_expansion(20)) <= 1e-2
    assert abs(fit.beta_hat) <= 1e-10
    assert fit.sigma2_hat == pytest.approx(
        quad_form_linear_model(EquidistantSpec.from_psi(20, fit.psi_hat)) / 20, rel=1e-10)


@pytest.mark.parametrize("n", [6, 11, 20])
def test_fit_linear_gaussian_unbounded(n):
    assert fit_mle(builtin_dataset("linear", n), "gaussian", 0.0).status is Status.UNBOUNDED_UPPER


def test_fit_second_mode_with_nugget():
    fit = fit_mle(builtin_dataset("sin", 7), "gaussian", 0.01)
    assert fit.status is Status.INTERIOR
    assert len(fit.modes) == 2
    assert fit.psi_hat == pytest.approx(fit.modes[0].psi, rel=1e-9)


def test_fit_boundary_lower():
    d = Dataset(equidistant(8), [(-1.0) ** i for i in range(8)])
    fit = fit_mle(d, "exponential", 0.0, FitOptions(psi_min=1.0, psi_max=100.0, grid_size=50))
    assert fit.status is Status.BOUNDARY_LOWER
    assert fit.psi_hat == 1.0


def test_fit_constant_data_is_degenerate():
    with pytest.raises(DegenerateData):
        fit_mle(Dataset(equidistant(5), np.full(5, 3.0)), "gaussian", 0.0)


def test_fit_all_infeasible():
    with pytest.raises(AllInfeasible):
        fit_mle(builtin_dataset("sin", 20), "gaussian", 0.0, FitOptions(psi_min=100.0, psi_max=1e4))


def test_fit_result_dict_fields():
    out = fit_mle(builtin_dataset("sin", 8), "gaussian", 0.02).to_dict()
    assert set(out) >= {"beta_hat", "sigma2_hat", "sigma_hat", "psi_hat", "status", "modes",
                        "cond_at_psi_hat", "nugget"}
    assert out["sigma_hat"] == pytest.approx(math.sqrt(out["sigma2_hat"]))


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(0.01, 100.0),
    shift=st.floats(-50.0, 50.0),
    family=st.sampled_from(["exponential", "gaussian"]),
    nu=st.sampled_from([0.0, 0.01]),
)
def test_fit_equivariance(seed, scale, shift, family, nu):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 1, 9)) + np.arange(9) * 1e-3
    d = Dataset(x, np.sin(4 * x) + 0.3 * rng.standard_normal(9))
    base = fit_mle(d, family, nu)
    scaled = fit_mle(Dataset(x, scale * d.y), family, nu)
    shifted = fit_mle(Dataset(x, d.y + shift), family, nu)
    for other in (scaled, shifted):
        assert other.status is base.status
        assert other.psi_hat == pytest.approx(base.psi_hat, rel=1e-6)
    assert scaled.beta_hat == pytest.approx(scale * base.beta_hat, rel=1e-6, abs=1e-8 * scale)
    assert scaled.sigma2_hat == pytest.approx(scale**2 * base.sigma2_hat, rel=1e-6)
    assert shifted.sigma2_hat == pytest.approx(base.sigma2_hat, rel=1e-6)
    assert shifted.beta_hat == pytest.approx(base.beta_hat + shift, rel=1e-6, abs=1e-8)
