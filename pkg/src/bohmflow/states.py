"""Wavefunction models in units hbar = m = omega = 1.

Three closed-form systems are provided together with a grid-backed model:

``Coherent(d)``
    Coherent state of the harmonic oscillator with displacement ``d``;
    translates rigidly with centre ``d cos t``.
``FreeGaussian()``
    Free Gaussian packet of unit width whose peak moves with unit speed.
``Superposition()``
    Equal-weight-in-amplitude superposition of the oscillator ground state
    and first excited state, normalised by ``sqrt(2/3)``.
``Numeric(history)``
    A wavefunction sampled on a periodic grid and evolved numerically, see
    :mod:`bohmflow.tdse`.

All model methods are vectorised over ``x``; ``t`` may be a scalar or an
array broadcastable against ``x``.
"""

from dataclasses import dataclass
from math import isfinite, pi, sqrt
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError, InvalidModelError, NodeProximityError
from .quadrature import QuadratureOptions, integrate

if TYPE_CHECKING:
    from .tdse import GridHistory

EPS_NODE = 1e-12
DEFAULT_DOMAIN = (-12.0, 12.0)

_PI_M14 = pi ** -0.25
_PI_M12 = pi ** -0.5


class WaveModel:
    """Common interface.

    Subclasses implement ``psi``, ``velocity``, ``velocity_gradient``,
    ``node_measure`` and ``support``. ``node_measure`` is a nonnegative
    quantity that vanishes exactly where the velocity field is undefined;
    integrators compare it with their node guard.
    """

    name = "model"

    def psi(self, x, t):
        raise NotImplementedError

    def density(self, x, t):
        p = self.psi(x, t)
        return p.real**2 + p.imag**2

    def velocity(self, x, t):
        raise NotImplementedError

    def velocity_gradient(self, x, t):
        raise NotImplementedError

    def node_measure(self, x, t):
        return np.full(np.broadcast(np.asarray(x), np.asarray(t)).shape, np.inf)

    def support(self, t):
        """Interval outside which the density is below double precision."""
        raise NotImplementedError

    def contains(self, x, t):
        return np.ones(np.shape(x), dtype=bool)


@dataclass(frozen=True)
class Coherent(WaveModel):
    d: float = 1.0
    name = "coherent"

    def __post_init__(self):
        if not isfinite(self.d):
            raise InvalidModelError(f"displacement must be finite, got {self.d}")

    def psi(self, x, t):
        x = np.asarray(x, dtype=float)
        d = self.d
        phase = t / 2 - d * d / 4 * np.sin(2 * t) + d * x * np.sin(t)
        return _PI_M14 * np.exp(-1j * phase - 0.5 * (x - d * np.cos(t)) ** 2)

    def density(self, x, t):
        x = np.asarray(x, dtype=float)
        return _PI_M12 * np.exp(-((x - self.d * np.cos(t)) ** 2))

    def velocity(self, x, t):
        return np.zeros(np.shape(x)) - self.d * np.sin(t)

    def velocity_gradient(self, x, t):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)

    def support(self, t):
        c = self.d * np.cos(t)
        return (c - 10.0, c + 10.0)


@dataclass(frozen=True)
class FreeGaussian(WaveModel):
    name = "free"

    def psi(self, x, t):
        x = np.asarray(x, dtype=float)
        z = 1 + 1j * t
        return _PI_M14 / np.sqrt(z) * np.exp(-(x * x - 2j * x + 1j * t) / (2 * z))

    def density(self, x, t):
        x = np.asarray(x, dtype=float)
        w2 = 1 + t * t
        return np.exp(-((x - t) ** 2) / w2) / np.sqrt(pi * w2)

    def velocity(self, x, t):
        x = np.asarray(x, dtype=float)
        return (t * x + 1) / (1 + t * t)

    def velocity_gradient(self, x, t):
        return np.zeros(np.shape(x)) + t / (1 + t * t)

    def support(self, t):
        w = 10.0 * sqrt(1 + t * t)
        return (t - w, t + w)


@dataclass(frozen=True)
class Superposition(WaveModel):
    name = "superposition"

    _norm = sqrt(2 / 3) * _PI_M14

    def psi(self, x, t):
        x = np.asarray(x, dtype=float)
        return (
            self._norm
            * np.exp(-(x * x + 1j * t) / 2)
            * (1 + x * np.exp(-1j * t))
        )

    def node_measure(self, x, t):
        # |exp(it) + x|^2 = 1 + 2x cos t + x^2, written without cancellation
        x = np.asarray(x, dtype=float)
        return (x + np.cos(t)) ** 2 + np.sin(t) ** 2

    def density(self, x, t):
        x = np.asarray(x, dtype=float)
        return (2 / 3) * _PI_M12 * np.exp(-x * x) * self.node_measure(x, t)

    def velocity(self, x, t):
        return -np.sin(t) / self.node_measure(x, t)

    def velocity_gradient(self, x, t):
        x = np.asarray(x, dtype=float)
        q = self.node_measure(x, t)
        return 2 * np.sin(t) * (np.cos(t) + x) / (q * q)

    def support(self, t):
        return (-12.0, 12.0)


class Numeric(WaveModel):
    """Model backed by a numerically propagated grid wavefunction.

    ``history`` is a :class:`bohmflow.tdse.GridHistory`; evaluation at
    arbitrary ``(x, t)`` uses trigonometric interpolation in space and cubic
    Hermite interpolation in time. ``node_measure`` is the density itself,
    so both true nodes and far tails are guarded.
    """

    name = "numeric"

    def __init__(self, history: "GridHistory"):
        self.history = history

    def __repr__(self):
        h = self.history
        return f"Numeric(potential={h.potential!r}, t=[{h.t_start}, {h.t_end}])"

    def _check(self, x, t):
        h = self.history
        x = np.asarray(x, dtype=float)
        if np.any(x < h.x_min) or np.any(x > h.x_max):
            raise DomainError(f"x outside grid domain [{h.x_min}, {h.x_max}]")
        if np.any(t < h.t_start - 1e-12) or np.any(t > h.t_end + 1e-12):
            raise DomainError(f"t outside stored range [{h.t_start}, {h.t_end}]")
        return x

    def contains(self, x, t):
        h = self.history
        x = np.asarray(x, dtype=float)
        ok = (x >= h.x_min) & (x <= h.x_max)
        return ok & (t >= h.t_start - 1e-12) & (t <= h.t_end + 1e-12)

    def psi(self, x, t):
        return self.history.evaluate(self._check(x, t), t, order=0)[0]

    def node_measure(self, x, t):
        return self.density(x, t)

    def velocity(self, x, t):
        p, dp = self.history.evaluate(self._check(x, t), t, order=1)
        return np.imag(dp / p)

    def velocity_gradient(self, x, t):
        p, dp, d2p = self.history.evaluate(self._check(x, t), t, order=2)
        r = dp / p
        return np.imag(d2p / p - r * r)

    def velocity_and_gradient(self, x, t):
        p, dp, d2p = self.history.evaluate(self._check(x, t), t, order=2)
        r = dp / p
        rho = p.real**2 + p.imag**2
        return np.imag(r), np.imag(d2p / p - r * r), rho

    def support(self, t):
        return (self.history.x_min, self.history.x_max)


@dataclass(frozen=True)
class PolarDecomposition:
    amplitude: np.ndarray
    phase: np.ndarray


def _scalar_or_array(a, like):
    return float(a) if np.ndim(like) == 0 else a


def _check_inputs(x, t):
    if not np.all(np.isfinite(x)) or not isfinite(t):
        raise DomainError("x and t must be finite")


def evaluate_psi(model, x, t):
    """Complex amplitude psi(x, t) of ``model``."""
    _check_inputs(x, t)
    p = model.psi(x, t)
    return complex(p) if np.ndim(x) == 0 else p


def polar(model, x, t, eps_node=EPS_NODE):
    """Split psi into amplitude ``R = |psi|`` and principal phase ``S``.

    Raises :class:`NodeProximityError` where ``R < eps_node``, since the
    phase is undefined there.
    """
    _check_inputs(x, t)
    p = np.asarray(model.psi(x, t))
    r = np.abs(p)
    if np.any(r < eps_node):
        raise NodeProximityError("phase undefined at a node", x=x, t=t)
    s = np.angle(p)
    if np.ndim(x) == 0:
        return PolarDecomposition(float(r), float(s))
    return PolarDecomposition(r, s)


def density(model, x, t):
    """Probability density ``|psi(x, t)|^2``."""
    _check_inputs(x, t)
    return _scalar_or_array(model.density(x, t), x)


def total_probability(model, t, domain=DEFAULT_DOMAIN, quadrature=None):
    """Integral of the density over ``domain`` by adaptive Gauss-Legendre."""
    lo, hi = domain
    return integrate(lambda x: model.density(x, t), lo, hi, quadrature or QuadratureOptions())
