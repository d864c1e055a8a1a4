"""Split-operator propagation of the 1-D Schrodinger equation on a periodic grid.

The grid is ``x_j = x_min + j L / n`` for ``j = 0..n-1`` (``x_max`` is the
periodic image of ``x_min``). Wavenumbers follow the FFT layout,
``k = 2 pi m / L`` with ``m`` in ``[-n/2, n/2)``.
"""

from dataclasses import dataclass, field, replace
from math import isfinite

import numpy as np

from .errors import BoundaryMassError, DomainError, InvalidModelError, NodeProximityError
from .states import Coherent, FreeGaussian, Numeric, Superposition, WaveModel

POTENTIALS = ("harmonic", "free")
NORM_TOL = 1e-8
BOUNDARY_TOL = 1e-10
DEFAULT_DOMAIN = (-12.0, 12.0)
DEFAULT_N = 1024
DEFAULT_DT = 1e-3


def _potential(kind, x):
    if kind == "harmonic":
        return 0.5 * x * x
    if kind == "free":
        return np.zeros_like(x)
    raise InvalidModelError(f"unknown potential {kind!r}")


def potential_for(model):
    """Potential under which an analytic model evolves."""
    if isinstance(model, FreeGaussian):
        return "free"
    if isinstance(model, (Coherent, Superposition)):
        return "harmonic"
    raise InvalidModelError(f"no potential associated with {model!r}")


@dataclass(frozen=True)
class GridState:
    x_min: float
    x_max: float
    psi: np.ndarray = field(repr=False)
    time: float = 0.0
    potential: str = "harmonic"

    def __post_init__(self):
        n = self.psi.size
        if n < 2 or n & (n - 1):
            raise InvalidModelError(f"grid size must be a power of two, got {n}")
        if not self.x_max > self.x_min:
            raise InvalidModelError("x_max must exceed x_min")
        if self.potential not in POTENTIALS:
            raise InvalidModelError(f"unknown potential {self.potential!r}")
        psi = np.array(self.psi, dtype=complex)
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def n(self):
        return self.psi.size

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def dx(self):
        return self.length / self.n

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def k(self):
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def norm(self):
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)

    def boundary_amplitude(self):
        return float(max(abs(self.psi[0]), abs(self.psi[-1])))

    def check_boundary(self, tol=BOUNDARY_TOL):
        b = self.boundary_amplitude()
        if b >= tol:
            raise BoundaryMassError(
                f"|psi| = {b:.3e} at the domain edge (t={self.time}); widen the domain"
            )

    def energy(self):
        """Expectation value of ``H = k^2/2 + V`` on the grid."""
        phi = np.fft.fft(self.psi)
        kinetic = np.sum(0.5 * self.k**2 * np.abs(phi) ** 2) * self.dx / self.n
        pot = np.sum(_potential(self.potential, self.x) * np.abs(self.psi) ** 2) * self.dx
        return float(kinetic + pot)

    def hamiltonian_apply(self, psi=None):
        psi = self.psi if psi is None else psi
        kin = np.fft.ifft(0.5 * self.k**2 * np.fft.fft(psi))
        return kin + _potential(self.potential, self.x) * psi


def init_from_model(model, domain=DEFAULT_DOMAIN, n=DEFAULT_N, potential=None):
    """Sample an analytic model at ``t = 0`` onto a periodic grid.

    The samples are renormalised to unit discrete L2 norm. Raises
    :class:`BoundaryMassError` if the packet is not contained in ``domain``.
    """
    if isinstance(model, Numeric):
        raise InvalidModelError("init_from_model needs an analytic model")
    if n < 2 or n & (n - 1):
        raise InvalidModelError(f"grid size must be a power of two, got {n}")
    x_min, x_max = map(float, domain)
    x = x_min + (x_max - x_min) / n * np.arange(n)
    psi = np.asarray(model.psi(x, 0.0), dtype=complex)
    dx = (x_max - x_min) / n
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    state = GridState(x_min, x_max, psi, 0.0, potential or potential_for(model))
    state.check_boundary()
    return state


def _strang_factors(state, dt):
    half_v = np.exp(-0.5j * dt * _potential(state.potential, state.x))
    kin = np.exp(-0.5j * dt * state.k**2)
    return half_v, kin


def propagate(state, t_target, dt=DEFAULT_DT, check_every=100):
    """Evolve ``state`` to ``t_target`` with second-order Strang splitting.

    Each step applies ``exp(-i V dt/2) exp(-i T dt) exp(-i V dt/2)`` with the
    kinetic factor in Fourier space. The step count is ``ceil(span / dt)``
    and the last step is shortened to land on ``t_target`` exactly.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    span = t_target - state.time
    if span < -1e-14:
        raise ValueError("t_target precedes the state's time")
    if span <= 0:
        return state

    n_full = int(np.floor(span / dt * (1 + 1e-12)))
    rest = span - n_full * dt
    if rest <= 1e-12 * max(1.0, abs(t_target)):
        rest = 0.0
    psi = np.array(state.psi)
    half_v, kin = _strang_factors(state, dt)
    full_v = half_v * half_v
    if n_full:
        # adjacent half potential kicks merge into one full kick
        psi *= half_v
        for i in range(n_full):
            psi = np.fft.ifft(kin * np.fft.fft(psi))
            psi *= full_v if i < n_full - 1 else half_v
            if (i + 1) % check_every == 0:
                _check_edges(psi, state.time + (i + 1) * dt)
    if rest:
        hv, kn = _strang_factors(state, rest)
        psi = hv * np.fft.ifft(kn * np.fft.fft(hv * psi))
    out = replace(state, psi=psi, time=float(t_target))
    out.check_boundary()
    return out


def _check_edges(psi, t):
    b = max(abs(psi[0]), abs(psi[-1]))
    if b >= BOUNDARY_TOL:
        raise BoundaryMassError(f"|psi| = {b:.3e} at the domain edge (t={t})")


def _trig_eval(coef, k, x, x_min, order):
    """Evaluate ``sum_m c_m (i k_m)^p exp(i k_m (x - x_min))`` for p <= order."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    basis = np.exp(1j * np.outer(flat - x_min, k))
    out = [basis @ coef]
    ik = 1j * k
    for p in range(1, order + 1):
        out.append(basis @ (coef * ik**p))
    return [o.reshape(x.shape) for o in out]


def grid_velocity(state, x, node_guard=1e-10):
    """Bohmian velocity ``Im(psi'/psi)`` of a single grid snapshot.

    The derivative is spectral, evaluated by trigonometric interpolation.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < state.x_min) or np.any(x > state.x_max):
        raise DomainError("x outside grid domain")
    coef = np.fft.fft(state.psi) / state.n
    p, dp = _trig_eval(coef, state.k, x, state.x_min, 1)
    rho = np.abs(p) ** 2
    if np.any(rho < node_guard):
        raise NodeProximityError("density below node guard", x=x, t=state.time)
    v = np.imag(dp / p)
    return float(v) if x.ndim == 0 else v


def interpolate_psi(state, x):
    """Trigonometric interpolant of a grid snapshot at arbitrary ``x``."""
    coef = np.fft.fft(state.psi) / state.n
    return _trig_eval(coef, state.k, x, state.x_min, 0)[0]


class GridHistory:
    """Uniformly spaced snapshots of a propagated grid wavefunction.

    Stores Fourier coefficients and their time derivatives ``-i H psi`` at
    each snapshot, so that evaluation between snapshots uses cubic Hermite
    interpolation in time. Modes whose coefficients never exceed
    ``mode_cutoff`` times the largest coefficient are dropped; this loses
    nothing at double precision for band-limited packets and keeps
    evaluation cheap.
    """

    def __init__(self, states, mode_cutoff=1e-13):
        if not states:
            raise ValueError("need at least one snapshot")
        first = states[0]
        self.x_min, self.x_max = first.x_min, first.x_max
        self.potential = first.potential
        self.n = first.n
        self.times = np.array([s.time for s in states], dtype=float)
        if self.times.size > 1:
            steps = np.diff(self.times)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12) or steps[0] <= 0:
                raise ValueError("snapshots must be uniformly spaced in time")
        coef = np.array([np.fft.fft(s.psi) / s.n for s in states])
        dcoef = np.array([np.fft.fft(-1j * s.hamiltonian_apply()) / s.n for s in states])
        k = first.k
        keep = np.max(np.abs(coef), axis=0) > mode_cutoff * np.max(np.abs(coef))
        self.k = k[keep]
        self.coef = coef[:, keep]
        self.dcoef = dcoef[:, keep]
        self.states = tuple(states)

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def t_end(self):
        return float(self.times[-1])

    def _hermite(self, t):
        """Interval index and Hermite weights for time(s) ``t``."""
        ts = self.times
        t = np.asarray(t, dtype=float)
        if np.any(t < ts[0] - 1e-12) or np.any(t > ts[-1] + 1e-12):
            raise DomainError(f"t outside [{ts[0]}, {ts[-1]}]")
        h = ts[1] - ts[0]
        j = np.clip(np.floor((t - ts[0]) / h).astype(np.int64), 0, ts.size - 2)
        s = (t - ts[j]) / h
        s2, s3 = s * s, s * s * s
        w = (2 * s3 - 3 * s2 + 1, h * (s3 - 2 * s2 + s), -2 * s3 + 3 * s2, h * (s3 - s2))
        return j, w

    def coefficients_at(self, t):
        if self.times.size == 1:
            if np.any(np.abs(np.asarray(t) - self.times[0]) > 1e-12):
                raise DomainError("single snapshot history evaluated at another time")
            return self.coef[0] if np.ndim(t) == 0 else np.broadcast_to(
                self.coef[0], (np.size(t), self.k.size))
        j, (w0, w1, w2, w3) = self._hermite(t)
        if np.ndim(t) == 0:
            return w0 * self.coef[j] + w1 * self.dcoef[j] + w2 * self.coef[j + 1] + w3 * self.dcoef[j + 1]
        c = (
            w0[:, None] * self.coef[j]
            + w1[:, None] * self.dcoef[j]
            + w2[:, None] * self.coef[j + 1]
            + w3[:, None] * self.dcoef[j + 1]
        )
        return c

    def evaluate(self, x, t, order=0):
        """psi and its first ``order`` spatial derivatives at ``(x, t)``.

        ``t`` is a scalar or an array with one time per entry of ``x``.
        """
        if np.ndim(t) == 0:
            return _trig_eval(self.coefficients_at(t), self.k, x, self.x_min, order)
        x = np.asarray(x, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape).ravel()
        coef = self.coefficients_at(t)
        basis = np.exp(1j * np.outer(x.ravel() - self.x_min, self.k)) * coef
        out = [basis.sum(axis=1)]
        ik = 1j * self.k
        for p in range(1, order + 1):
            out.append(basis @ ik**p)
        return [o.reshape(x.shape) for o in out]


def evolve_history(state, t_end, dt=DEFAULT_DT, snapshot_every=10):
    """Propagate ``state`` to ``t_end`` recording snapshots.

    Snapshots are spaced ``snapshot_every * dt`` apart (shrunk slightly so
    that ``t_end`` is a snapshot time).
    """
    span = t_end - state.time
    if span < 0:
        raise ValueError("t_end precedes the state's time")
    spacing = snapshot_every * dt
    n_snap = max(1, int(np.ceil(span / spacing - 1e-12)))
    grid = state.time + span * np.arange(n_snap + 1) / n_snap
    states = [state]
    cur = state
    for t in grid[1:]:
        cur = propagate(cur, float(t), dt)
        states.append(cur)
    return GridHistory(states)


def numeric_model(base, t_end, domain=None, n=None, dt=DEFAULT_DT, snapshot_every=10):
    """Grid-propagated counterpart of an analytic model on ``[0, t_end]``.

    Defaults follow the analytic model: ``[-12, 12]`` with 1024 points for
    the oscillator states and ``[-16 - 7 t_end, 16 + 7 t_end]`` with 2048
    points for the free packet, wide enough to keep the spreading packet's
    edge amplitude below ``BOUNDARY_TOL``.
    """
    if not isinstance(base, WaveModel) or isinstance(base, Numeric):
        raise InvalidModelError("base must be an analytic model")
    if not isfinite(t_end) or t_end < 0:
        raise ValueError("t_end must be finite and nonnegative")
    if domain is None:
        if isinstance(base, FreeGaussian):
            domain = (-16.0 - 7.0 * t_end, 16.0 + 7.0 * t_end)
        else:
            domain = DEFAULT_DOMAIN
    if n is None:
        n = 2048 if isinstance(base, FreeGaussian) else DEFAULT_N
    state = init_from_model(base, domain, n)
    return Numeric(evolve_history(state, t_end, dt, snapshot_every))


def l2_error(state, model):
    """Discrete L2 distance between a grid state and an analytic model."""
    diff = state.psi - model.psi(state.x, state.time)
    return float(np.sqrt(np.sum(np.abs(diff) ** 2) * state.dx))
