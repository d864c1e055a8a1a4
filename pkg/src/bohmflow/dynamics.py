"""Bohmian guidance dynamics.

Trajectories solve ``dx/dt = v(x, t)`` jointly with the variational
equation ``dJ/dt = (dv/dx) J``, ``J(t0) = 1``, so a single pass yields both
the flow map and its derivative ``J = dx/dx0``. Integrating backward from
``(x, t)`` to time 0 gives the inverse map ``x0(x, t)`` and
``|dx0/dx|`` directly.

The integrators are vectorised over initial conditions: an array of
starting points advances with a common step size, the error norm being
the maximum over components. Components that come within the node guard
of a wavefunction node are frozen and reported as failed instead of
aborting the whole batch.
"""

from dataclasses import dataclass, field
from math import erf, exp, isfinite, pi, sqrt

import numpy as np
from scipy import special

from .errors import BracketError, IntegrationError, NodeProximityError
from .states import Numeric

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

METHODS = ("adaptive", "rk4")


@dataclass(frozen=True)
class SolverOptions:
    """Integrator controls.

    The adaptive method accepts a step when every component satisfies
    ``|err| <= abs_tol + rel_tol * |y|``; a rejected step halves ``dt``.
    The step never exceeds ``dt_max``. ``rk4`` takes fixed steps of at most
    ``dt_max`` (shortened uniformly to land on the end time).
    """

    method: str = "adaptive"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    dt_max: float = 0.01
    node_guard: float = 1e-10
    dt_min: float = 1e-13
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("abs_tol", "rel_tol", "dt_max", "dt_min"):
            v = getattr(self, name)
            if not (isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite")
        if not self.node_guard >= 0:
            raise ValueError("node_guard must be nonnegative")


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class Trajectory:
    """Samples ``(t, x, J)`` of one Bohmian path, strictly ordered in ``t``."""

    x0: float
    t0: float
    t1: float
    t: np.ndarray
    x: np.ndarray
    J: np.ndarray

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.J.tolist()))

    @property
    def x_end(self):
        return float(self.x[-1])

    @property
    def J_end(self):
        return float(self.J[-1])


@dataclass
class FlowResult:
    """End state of a batch of trajectories.

    ``failed`` marks components stopped by the node guard or by step-size
    underflow; their ``x`` and ``J`` entries are NaN.
    """

    x: np.ndarray
    J: np.ndarray
    failed: np.ndarray
    n_steps: int = 0
    n_rejected: int = 0
    reasons: dict = field(default_factory=dict)

    @property
    def n_failed(self):
        return int(np.count_nonzero(self.failed))


def _guard(model, x, t, node_guard):
    return np.asarray(model.node_measure(x, t)) < node_guard


def velocity(model, x, t, node_guard=DEFAULT_OPTIONS.node_guard):
    """Bohmian velocity ``dS/dx`` (closed form, or ``Im(psi'/psi)`` on grids)."""
    if np.any(_guard(model, x, t, node_guard)):
        raise NodeProximityError("velocity undefined near a node", x=x, t=t)
    v = model.velocity(x, t)
    return float(v) if np.ndim(x) == 0 else v


def velocity_gradient(model, x, t, node_guard=DEFAULT_OPTIONS.node_guard):
    """Spatial derivative of the velocity field."""
    if np.any(_guard(model, x, t, node_guard)):
        raise NodeProximityError("velocity undefined near a node", x=x, t=t)
    g = model.velocity_gradient(x, t)
    return float(g) if np.ndim(x) == 0 else g


def _make_rhs(model, node_guard):
    numeric = isinstance(model, Numeric)

    def rhs(t, x):
        if numeric:
            inside = model.contains(x, t)
            xs = np.where(inside, x, model.history.x_min)
            v, dv, rho = model.velocity_and_gradient(xs, t)
            bad = ~inside | (rho < node_guard)
        else:
            bad = _guard(model, x, t, node_guard)
            with np.errstate(divide="ignore", invalid="ignore"):
                v = model.velocity(x, t)
                dv = model.velocity_gradient(x, t)
        bad = bad | ~np.isfinite(v) | ~np.isfinite(dv)
        return np.where(bad, 0.0, v), np.where(bad, 0.0, dv), bad

    return rhs


def _integrate(model, x0, t0, t1, opts, record=False):
    """Core integrator. Returns ``FlowResult`` and optional step history."""
    x = np.array(x0, dtype=float).ravel()
    J = np.ones_like(x)
    failed = ~np.isfinite(x)
    rhs = _make_rhs(model, opts.node_guard)
    history = [(t0, x.copy(), J.copy())] if record else None
    reasons = {}

    def mark(mask, why):
        nonlocal failed
        new = mask & ~failed
        if np.any(new):
            reasons[why] = reasons.get(why, 0) + int(np.count_nonzero(new))
        failed = failed | mask

    _, _, bad = rhs(t0, np.where(failed, 0.0, x))
    mark(bad, "node")

    span = t1 - t0
    if span == 0 or x.size == 0:
        return _finish(x, J, failed, 0, 0, reasons), history

    if opts.method == "rk4":
        n = int(np.ceil(abs(span) / opts.dt_max - 1e-12))
        h = span / n
        t = t0
        for i in range(n):
            x, J, bad = _rk4_step(rhs, t, x, J, h, failed)
            mark(bad, "node")
            t = t0 + (i + 1) * h
            if record:
                history.append((t, x.copy(), J.copy()))
        return _finish(x, J, failed, n, 0, reasons), history

    x, J, failed, steps, rejected = _adaptive(rhs, x, J, failed, t0, t1, opts, reasons, history)
    return _finish(x, J, failed, steps, rejected, reasons), history


def _adaptive(rhs, x, J, failed, t0, t1, opts, reasons, history=None):
    """Dormand-Prince stepping with a separate clock and step per component.

    A few near-node trajectories that need tiny steps therefore do not
    throttle the rest of the batch. Each sweep attempts one step for every
    unfinished component; a rejected step halves that component's ``dt``.
    """
    n = x.size
    direction = 1.0 if t1 > t0 else -1.0
    t = np.full(n, float(t0))
    h = np.full(n, direction * min(opts.dt_max, abs(t1 - t0)))
    done = failed.copy()
    k1x, k1J = np.zeros(n), np.zeros(n)
    fresh = np.zeros(n, dtype=bool)
    sweeps = rejected = 0

    def mark(sel, why):
        nonlocal failed, done
        if sel.size:
            reasons[why] = reasons.get(why, 0) + int(sel.size)
        failed[sel] = True
        done[sel] = True

    failed = failed.copy()
    while True:
        live = np.flatnonzero(~done)
        if live.size == 0:
            break
        sweeps += 1
        if sweeps > opts.max_steps:
            raise IntegrationError(f"exceeded {opts.max_steps} steps")
        tl, xl, Jl = t[live], x[live], J[live]
        hl = h[live]
        hl = np.where(direction * (tl + hl - t1) > 0, t1 - tl, hl)
        k1 = (k1x[live], k1J[live], fresh[live])
        x_new, J_new, errx, errJ, bad, first, last = _dp_step(rhs, tl, xl, Jl, hl, k1)

        scale_x = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(xl), np.abs(x_new))
        scale_J = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(Jl), np.abs(J_new))
        with np.errstate(invalid="ignore"):
            ratio = np.maximum(np.abs(errx) / scale_x, np.abs(errJ) / scale_J)
        nonfinite = ~bad & ~np.isfinite(ratio)
        ok = ~bad & ~nonfinite & (ratio <= 1.0)

        acc = live[ok]
        t_acc = tl[ok] + hl[ok]
        close = direction * (t1 - t_acc) < 1e-14 * max(1.0, abs(t1))
        t_acc[close] = t1
        t[acc], x[acc], J[acc] = t_acc, x_new[ok], J_new[ok]
        r = ratio[ok]
        with np.errstate(divide="ignore"):
            grow = np.where(r == 0, 5.0, np.clip(0.9 * r ** -0.2, 1.0, 5.0))
        h[acc] = direction * np.minimum(opts.dt_max, np.abs(hl[ok]) * grow)
        # FSAL: the last stage of an accepted step starts the next one; a
        # rejected step keeps its (still valid) first stage
        k1x[live], k1J[live] = np.where(ok, last[0], first[0]), np.where(ok, last[1], first[1])
        fresh[live] = True
        done[acc[close]] = True
        if history is not None and ok[0]:
            history.append((float(t[0]), x.copy(), J.copy()))

        rej = ~ok
        if np.any(rej):
            rejected += int(np.count_nonzero(rej))
            floor = np.abs(hl) * 0.5 < opts.dt_min
            mark(live[nonfinite], "nonfinite")
            mark(live[rej & bad & floor], "node")
            mark(live[rej & ~bad & ~nonfinite & floor], "underflow")
            h[live[rej]] = 0.5 * hl[rej]
    return x, J, failed, sweeps, rejected


def _finish(x, J, failed, steps, rejected, reasons):
    x = np.where(failed, np.nan, x)
    J = np.where(failed, np.nan, J)
    return FlowResult(x, J, failed, steps, rejected, reasons)


def _rk4_step(rhs, t, x, J, h, failed):
    v1, g1, b1 = rhs(t, x)
    x2 = x + 0.5 * h * v1
    v2, g2, b2 = rhs(t + 0.5 * h, x2)
    x3 = x + 0.5 * h * v2
    v3, g3, b3 = rhs(t + 0.5 * h, x3)
    x4 = x + h * v3
    v4, g4, b4 = rhs(t + h, x4)
    # J enters linearly: stage slopes are g_i times the staged J values
    j1 = g1 * J
    j2 = g2 * (J + 0.5 * h * j1)
    j3 = g3 * (J + 0.5 * h * j2)
    j4 = g4 * (J + h * j3)
    bad = (b1 | b2 | b3 | b4) & ~failed
    xn = x + h / 6 * (v1 + 2 * v2 + 2 * v3 + v4)
    Jn = J + h / 6 * (j1 + 2 * j2 + 2 * j3 + j4)
    keep = failed | bad
    return np.where(keep, x, xn), np.where(keep, J, Jn), bad


def _dp_step(rhs, t, x, J, h, k1):
    """One Dormand-Prince step; ``t`` and ``h`` are per-component arrays."""
    kx = np.empty((7, x.size))
    kJ = np.empty((7, x.size))
    bad = np.zeros(x.size, dtype=bool)
    cx, cJ, have = k1
    for s in range(7):
        xs = x.copy()
        Js = J.copy()
        for j, a in enumerate(_A[s]):
            if a:
                xs += h * a * kx[j]
                Js += h * a * kJ[j]
        if s == 0 and have.all():
            kx[0], kJ[0] = cx, cJ
            continue
        v, g, b = rhs(t + _C[s] * h, xs)
        bad |= b
        kx[s], kJ[s] = v, g * Js
        if s == 0 and have.any():
            kx[0] = np.where(have, cx, kx[0])
            kJ[0] = np.where(have, cJ, kJ[0])
    x_new = x + h * (_B5 @ kx)
    J_new = J + h * (_B5 @ kJ)
    errx = h * (_E @ kx)
    errJ = h * (_E @ kJ)
    return x_new, J_new, errx, errJ, bad, (kx[0], kJ[0]), (kx[6], kJ[6])


def flow_map(model, x0, t0, t1, opts=DEFAULT_OPTIONS):
    """Transport an array of points from ``t0`` to ``t1`` (either direction)."""
    res, _ = _integrate(model, x0, t0, t1, opts)
    return res


def integrate_forward(model, x0, t0, t1, opts=DEFAULT_OPTIONS):
    """Integrate one trajectory forward from ``(x0, t0)`` to ``t1``.

    Returns a :class:`Trajectory` holding every accepted step.
    """
    if t1 < t0:
        raise ValueError("integrate_forward requires t1 >= t0")
    if np.any(_guard(model, np.asarray([x0], dtype=float), t0, opts.node_guard)):
        raise NodeProximityError("initial point within node guard", x=x0, t=t0)
    res, hist = _integrate(model, [x0], t0, t1, opts, record=True)
    if res.failed[0]:
        raise IntegrationError(
            f"trajectory from x0={x0} failed ({', '.join(res.reasons) or 'unknown'})"
        )
    t = np.array([h[0] for h in hist])
    x = np.array([h[1][0] for h in hist])
    J = np.array([h[2][0] for h in hist])
    return Trajectory(float(x0), float(t0), float(t1), t, x, J)


def inverse_map(model, x, t, opts=DEFAULT_OPTIONS):
    """Preimage ``x0(x, t)`` and Jacobian factor ``|dx0/dx|``.

    Integrates the guidance and variational equations backward from
    ``(x, t)`` to time 0. For array ``x`` returns a :class:`FlowResult`
    (``x`` holds preimages, ``J`` the Jacobian factor, failures flagged);
    for scalar ``x`` returns ``(x0, jac)`` and raises on failure.
    """
    if t < 0:
        raise ValueError("inverse_map requires t >= 0")
    if np.ndim(x) == 0:
        if t == 0:
            return float(x), 1.0
        if _guard(model, np.asarray([x], dtype=float), t, opts.node_guard)[0]:
            raise NodeProximityError("point within node guard", x=x, t=t)
        res = flow_map(model, [x], t, 0.0, opts)
        if res.failed[0]:
            raise IntegrationError(f"backward trajectory from x={x} failed")
        return float(res.x[0]), float(abs(res.J[0]))
    res = flow_map(model, x, t, 0.0, opts)
    res.J = np.abs(res.J)
    return res


_SQRT_PI = sqrt(pi)


def implicit_constant(x, t):
    """Quantity conserved along trajectories of the superposition state.

    ``C(x, t) = (3/4) sqrt(pi) erf(x) - exp(-x^2) cos t - (x/2) exp(-x^2)``.
    Its x-derivative is ``exp(-x^2) (1 + 2x cos t + x^2)``, proportional to
    the density, so ``C`` is an affine function of the cumulative
    probability: ``CDF = 1/2 + 2 C / (3 sqrt(pi))``.
    """
    if np.ndim(x) == 0:
        g = exp(-x * x)
        return 0.75 * _SQRT_PI * erf(x) - g * np.cos(t) - 0.5 * x * g
    x = np.asarray(x, dtype=float)
    g = np.exp(-x * x)
    return 0.75 * _SQRT_PI * special.erf(x) - g * np.cos(t) - 0.5 * x * g


def solve_implicit(x0, t, bracket_halfwidth=2.0, tol=1e-12, max_expansions=8):
    """Position at time ``t`` of the superposition trajectory starting at ``x0``.

    Solves ``C(x, t) = C(x0, 0)`` by bisection. ``C`` is nondecreasing in
    ``x`` so the root is unique; the bracket ``[x0 - w, x0 + w]`` is doubled
    up to ``max_expansions`` times until it encloses a sign change.
    """
    if not (isfinite(x0) and isfinite(t)):
        raise ValueError("x0 and t must be finite")
    if not tol > 0:
        raise ValueError("tol must be positive")
    target = implicit_constant(x0, 0.0)

    def f(x):
        return implicit_constant(x, t) - target

    w = float(bracket_halfwidth)
    for _ in range(max_expansions + 1):
        a, b = x0 - w, x0 + w
        fa, fb = f(a), f(b)
        if fa <= 0 <= fb:
            break
        w *= 2
    else:
        raise BracketError(f"root for x0={x0}, t={t} not enclosed within +-{w / 2}")
    if fa == 0:
        return a
    if fb == 0:
        return b
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm < 0:
            a = m
        elif fm > 0:
            b = m
        else:
            return m
    return 0.5 * (a + b)
