import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from bohmflow import (
    Coherent,
    DensityField,
    EnsembleSpec,
    FreeGaussian,
    Superposition,
    cumulative,
    ensemble_transport,
    exact_density,
    flow_map,
    reconstruct_density,
    sample_initial,
    transported_density_no_jacobian,
)
from bohmflow.reconstruct import bin_averaged_density, bootstrap_error, particle_uniforms

SUP = Superposition()


def test_coherent_point_value():
    # the packet centre sits at d cos(pi) = -1; x = -2 pulls back to x0 = 0
    fld = reconstruct_density(Coherent(1.0), np.array([-2.0, -1.0]), np.pi)
    assert fld.values[0] == pytest.approx(np.pi**-0.5 * np.exp(-1), rel=1e-12)
    assert fld.values[0] == pytest.approx(Coherent(1.0).density(-2.0, np.pi), rel=1e-12)
    assert fld.values[1] == pytest.approx(np.pi**-0.5, rel=1e-12)


def test_free_point_value_with_and_without_jacobian():
    grid = np.array([1.0, 2.0])
    rec = reconstruct_density(FreeGaussian(), grid, 1.0)
    raw = transported_density_no_jacobian(FreeGaussian(), grid, 1.0)
    assert rec.values[0] == pytest.approx((2 * np.pi) ** -0.5, rel=1e-10)
    assert raw.values[0] == pytest.approx(np.pi**-0.5, rel=1e-10)
    g = np.linspace(-8, 10, 721)
    raw = transported_density_no_jacobian(FreeGaussian(), g, 1.0)
    assert raw.integral() == pytest.approx(np.sqrt(2), rel=1e-6)


@pytest.mark.parametrize("model", [Coherent(1.0), FreeGaussian(), SUP], ids=str)
def test_identity_at_time_zero(model):
    grid = np.linspace(-5, 5, 41)
    assert np.array_equal(reconstruct_density(model, grid, 0.0).values, model.density(grid, 0.0))


@pytest.mark.parametrize("t", [0.5, 2.0, np.pi])
def test_coherent_jacobian_free(t):
    grid = np.linspace(-6, 6, 61)
    a = reconstruct_density(Coherent(1.5), grid, t).values
    b = transported_density_no_jacobian(Coherent(1.5), grid, t).values
    assert np.max(np.abs(a - b)) < 1e-12


def test_superposition_shape_mismatch_without_jacobian():
    grid = np.linspace(-4, 4, 81)
    raw = transported_density_no_jacobian(SUP, grid, np.pi)
    ok = ~raw.missing
    assert np.max(np.abs(raw.values[ok] - SUP.density(grid[ok], np.pi))) > 0.05


@pytest.mark.parametrize("model", [Coherent(1.0), FreeGaussian(), SUP], ids=str)
@pytest.mark.parametrize("t", [0.5, 1.0, np.pi, 5.0])
def test_reconstruction_matches_exact(model, t):
    grid = np.linspace(-6, 6 + t, 481)
    rec = reconstruct_density(model, grid, t)
    ex = exact_density(model, grid, t)
    ok = ~rec.missing
    assert rec.n_missing <= 2
    assert np.max(np.abs(rec.values[ok] - ex.values[ok])) <= 1e-6
    # trapezoid plus analytic tail mass beyond the grid
    tail = cumulative(model, grid[0], t) + 1 - cumulative(model, grid[-1], t)
    assert abs(rec.integral() + tail - 1) <= 1e-4


def test_missing_points_flagged_at_node():
    grid = np.linspace(-2, 2, 5)
    rec = reconstruct_density(SUP, grid, np.pi)
    assert rec.missing.tolist() == [False, False, False, True, False]
    assert rec.info["n_missing"] == 1 and np.isnan(rec.values[3])


def test_density_field_validation():
    with pytest.raises(ValueError):
        DensityField(np.array([0.0, 1.0, 3.0]), np.ones(3), 0.0, "exact")
    with pytest.raises(ValueError):
        DensityField(np.array([0.0, 1.0]), np.array([1.0, -1.0]), 0.0, "exact")
    with pytest.raises(ValueError):
        DensityField(np.array([0.0, 1.0]), np.ones(2), 0.0, "guess")


def test_cumulative_examples():
    assert cumulative(Coherent(1.3), 1.3, 0.0) == pytest.approx(0.5, abs=1e-12)
    for t in (0.0, 1.0, 4.0):
        assert cumulative(FreeGaussian(), t, t) == pytest.approx(0.5, abs=1e-12)
    assert cumulative(SUP, 10.0, np.pi) == pytest.approx(1.0, abs=1e-9)


def test_cumulative_against_closed_form():
    # CDF of the superposition density is affine in the implicit constant
    from bohmflow import implicit_constant
    x = np.linspace(-3, 3, 25)
    for t in (0.0, 1.0, 2.5):
        exact = 0.5 + 2 * implicit_constant(x, t) / (3 * np.sqrt(np.pi))
        assert np.max(np.abs(cumulative(SUP, x, t) - exact)) < 1e-12


def test_cumulative_of_field():
    grid = np.linspace(-8, 8, 2001)
    fld = exact_density(Coherent(0.0), grid, 0.0)
    assert cumulative(fld, 0.0) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ValueError):
        cumulative(Coherent(0.0), 0.0)


@given(x0=st.floats(-2.5, 2.5), t=st.sampled_from([0.5, 1.0, 2.0, np.pi, 5.0]),
       mi=st.integers(0, 2))
def test_quantile_conservation(x0, t, mi):
    model = [Coherent(1.0), FreeGaussian(), SUP][mi]
    res = flow_map(model, np.array([x0]), 0.0, t)
    if res.failed[0]:
        return
    assert abs(cumulative(model, res.x[0], t) - cumulative(model, x0, 0.0)) <= 1e-6


def test_particle_uniforms_are_order_independent():
    a = particle_uniforms(42, 1000)
    b = particle_uniforms(42, 10)
    assert np.array_equal(a[:10], b)
    assert np.all((a > 0) & (a < 1))


def test_sampling_matches_distribution():
    x = sample_initial(SUP, 20000, seed=3)
    exact_cdf = lambda v: cumulative(SUP, v, 0.0)
    assert stats.kstest(x, exact_cdf).pvalue > 1e-3


def test_ensemble_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(0, 1, 10, (0, 1))
    with pytest.raises(ValueError):
        EnsembleSpec(10, 1, 10, (1, 0))
    with pytest.raises(ValueError):
        EnsembleSpec(10, -1, 10, (0, 1))


@pytest.mark.parametrize("model", [Coherent(1.0), FreeGaussian(), SUP], ids=str)
def test_ensemble_at_time_zero_is_pure_sampling(model):
    spec = EnsembleSpec(10_000, 7, 40, (-5, 5))
    fld = ensemble_transport(model, spec, 0.0)
    exact = bin_averaged_density(model, fld.info["edges"], 0.0)
    eps = bootstrap_error(fld.info["positions"], spec)
    assert np.max(np.abs(fld.values - exact)) <= 5 * eps
    assert fld.provenance == "histogram"


def test_ensemble_free_mean():
    t = 2.0
    spec = EnsembleSpec(100_000, 42, 80, (-10, 14))
    fld = ensemble_transport(FreeGaussian(), spec, t)
    pos = fld.info["positions"]
    sigma = np.sqrt((1 + t * t) / 2)
    assert abs(pos.mean() - 2.0) <= 3 * sigma / np.sqrt(pos.size)


def test_superposition_ensemble_has_no_drops_between_nodes():
    spec = EnsembleSpec(10_000, 42, 40, (-6, 6))
    fld = ensemble_transport(SUP, spec, np.pi / 2)
    assert fld.info["n_dropped"] == 0


def test_ensemble_is_deterministic():
    spec = EnsembleSpec(5000, 11, 30, (-5, 5))
    a = ensemble_transport(SUP, spec, 1.0)
    b = ensemble_transport(SUP, spec, 1.0)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.info["positions"], b.info["positions"])


def test_histogram_error_scales_as_inverse_sqrt_n():
    # bootstrap error for n and 2n samples; ratio should be near 1/sqrt(2)
    rng_spec = lambda n: EnsembleSpec(n, 5, 40, (-5, 5))
    e1 = bootstrap_error(sample_initial(SUP, 20_000, 5), rng_spec(20_000), n_boot=100)
    e2 = bootstrap_error(sample_initial(SUP, 40_000, 5), rng_spec(40_000), n_boot=100)
    assert e2 / e1 == pytest.approx(1 / np.sqrt(2), rel=0.3)
