import numpy as np
import pytest

from bohmflow import Coherent, FreeGaussian, GridState, Superposition
from bohmflow.errors import BoundaryMassError, DomainError, InvalidModelError
from bohmflow.tdse import (
    evolve_history,
    grid_velocity,
    init_from_model,
    interpolate_psi,
    l2_error,
    numeric_model,
    propagate,
)

SUP = Superposition()


def test_init_norm_and_node():
    s = init_from_model(Coherent(2.0), (-12, 12), 1024)
    assert s.norm() == pytest.approx(1.0, abs=1e-10)
    s = init_from_model(SUP, (-12, 12), 1024)
    assert abs(interpolate_psi(s, -1.0)) < 1e-12
    i = np.argmin(np.abs(s.x + 1))
    # |psi| grows linearly away from the node; bounded by the offset
    assert abs(s.psi[i]) < abs(s.x[i] + 1) * 0.6


def test_init_free_peak():
    s = init_from_model(FreeGaussian(), (-16, 16), 2048)
    i = np.argmax(np.abs(s.psi))
    assert s.x[i] == 0.0
    assert abs(s.psi[i]) == pytest.approx(np.pi**-0.25, abs=1e-8)
    assert s.potential == "free"


def test_init_rejects_bad_inputs():
    with pytest.raises(InvalidModelError):
        init_from_model(SUP, (-12, 12), 1000)
    with pytest.raises(BoundaryMassError):
        init_from_model(Coherent(1.0), (-3, 3), 256)


def test_wavenumber_layout():
    s = init_from_model(SUP, (-12, 12), 64)
    m = np.round(s.k * s.length / (2 * np.pi)).astype(int)
    assert sorted(m.tolist()) == list(range(-32, 32))


def test_coherent_period():
    s0 = init_from_model(Coherent(2.0))
    s1 = propagate(s0, 2 * np.pi)
    dx = s0.dx
    # amplitudes recur; the wavefunction itself picks up the global phase e^{-i pi}
    amp = np.sqrt(np.sum((np.abs(s1.psi) - np.abs(s0.psi)) ** 2) * dx)
    assert amp < 1e-6
    assert np.sqrt(np.sum(np.abs(s1.psi + s0.psi) ** 2) * dx) < 1e-6
    assert l2_error(s1, Coherent(2.0)) < 1e-6


def test_free_packet_against_analytic_amplitude():
    s0 = init_from_model(FreeGaussian(), (-16, 16), 2048)
    s1 = propagate(s0, 1.0)
    R = (np.pi * 2) ** -0.25 * np.exp(-0.5 * (1 - s1.x) ** 2 / 2)
    assert np.sqrt(np.sum((np.abs(s1.psi) - R) ** 2) * s1.dx) < 1e-6


def test_propagate_identity():
    s0 = init_from_model(SUP)
    assert propagate(s0, 0.0) is s0
    with pytest.raises(ValueError):
        propagate(s0, -1.0)


def test_propagate_lands_on_target_time():
    s = propagate(init_from_model(SUP), 0.12345, dt=0.01)
    assert s.time == 0.12345


@pytest.mark.parametrize("model", [Coherent(2.0), SUP], ids=str)
def test_second_order_convergence(model):
    s0 = init_from_model(model)
    e1 = l2_error(propagate(s0, 1.0, dt=2e-3), model)
    e2 = l2_error(propagate(s0, 1.0, dt=1e-3), model)
    assert 3.4 <= e1 / e2 <= 4.6
    assert e2 < 1e-6


def test_norm_conservation():
    s0 = init_from_model(SUP)
    s1 = propagate(s0, 10.0, dt=1e-3)
    assert abs(s1.norm() - s0.norm()) < 1e-10


def test_energy_conservation():
    s = init_from_model(Coherent(2.0))
    # coherent state energy: 1/2 + d^2/2
    assert s.energy() == pytest.approx(2.5, rel=1e-10)
    # Strang splitting conserves a nearby Hamiltonian, so <H> oscillates at
    # O(dt^2): about 2e-7 relative at dt = 1e-3, hence the finer step here
    e = [propagate(s, t, dt=1e-4).energy() for t in np.linspace(0, 2 * np.pi, 5)[1:]]
    assert np.max(np.abs(np.array(e) / s.energy() - 1)) < 1e-8


def test_boundary_violation_aborts():
    s0 = init_from_model(FreeGaussian(), (-16, 16), 2048)
    with pytest.raises(BoundaryMassError):
        propagate(s0, 6.0, dt=5e-3)


def test_grid_velocity_examples():
    s = propagate(init_from_model(Coherent(1.0)), np.pi / 2)
    assert grid_velocity(s, 0.3) == pytest.approx(-1.0, abs=1e-6)
    s = init_from_model(FreeGaussian(), (-16, 16), 2048)
    assert grid_velocity(s, 0.0) == pytest.approx(1.0, abs=1e-6)
    s = propagate(init_from_model(SUP), 1.0)
    ref = -np.sin(1) / (1 + 2 * 0.5 * np.cos(1) + 0.25)
    assert grid_velocity(s, 0.5) == pytest.approx(ref, abs=1e-6)


def test_trig_interpolation_off_grid():
    s = init_from_model(SUP)
    x = np.array([-1.2345, 0.1, 2.71828])
    assert np.max(np.abs(interpolate_psi(s, x) - SUP.psi(x, 0.0))) < 1e-12


def test_grid_state_is_immutable():
    s = init_from_model(SUP, n=64)
    with pytest.raises(ValueError):
        s.psi[0] = 1.0
    with pytest.raises(InvalidModelError):
        GridState(-1, 1, np.zeros(6))


def test_history_time_interpolation():
    h = evolve_history(init_from_model(SUP), 1.0)
    x = np.array([-0.5, 0.3, 1.7])
    for t in (0.0, 0.2345, 0.77, 1.0):
        p = h.evaluate(x, t)[0]
        assert np.max(np.abs(p - SUP.psi(x, t))) < 1e-6


def test_numeric_model_velocity_and_domain():
    nm = numeric_model(SUP, 1.0)
    x = np.array([-1.0, 0.4, 2.0])
    assert np.max(np.abs(nm.velocity(x, 0.6) - SUP.velocity(x, 0.6))) < 1e-5
    assert np.max(np.abs(nm.velocity_gradient(x, 0.6) - SUP.velocity_gradient(x, 0.6))) < 1e-4
    with pytest.raises(DomainError):
        nm.psi(0.0, 1.5)
    with pytest.raises(DomainError):
        nm.psi(20.0, 0.5)
