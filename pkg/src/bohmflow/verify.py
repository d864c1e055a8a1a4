"""Executable consistency checks.

Each check returns a :class:`VerificationReport` whose ``passed`` flag is
``metric <= threshold``.
"""

from dataclasses import dataclass, field
from math import pi

import numpy as np

from .dynamics import DEFAULT_OPTIONS
from .errors import GridMismatchError
from .quadrature import _GL_NODES, _GL_WEIGHTS
from .reconstruct import _pullback, both_densities, exact_density
from .states import Coherent, FreeGaussian, Superposition

# Smallest sup-norm gap between R(x, pi) and the uncorrected transported
# amplitude on the default grid that still counts as reproducing the
# mismatch. The validated pipeline gives 0.18998 (at x = 1.02, next to the
# flagged node at x = 1); frozen with a small margin.
FIGURE1_MIN_DISCREPANCY = 0.18
FIGURE1_GRID = (-4.0, 4.0, 401)


@dataclass
class VerificationReport:
    check_name: str
    metric: float
    threshold: float
    details: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.metric <= self.threshold)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.check_name}: metric={self.metric:.3e} threshold={self.threshold:.1e}"


def _worst(values, xs, ts, k=5):
    order = np.argsort(values)[::-1][:k]
    return [(float(xs[i]), float(ts[i]), float(values[i])) for i in order]


def _node_distance(model, x, t):
    """Distance in the (x, t) plane to the nearest node of the superposition."""
    if not isinstance(model, Superposition):
        return np.full(np.shape(x), np.inf)
    k = np.round(t / pi)
    xn = -np.cos(k * pi)
    return np.hypot(x - xn, t - k * pi)


def _residual(model, X, T, hx, ht):
    drho_dt = (model.density(X, T + ht) - model.density(X, T - ht)) / (2 * ht)
    jp = model.velocity(X + hx, T) * model.density(X + hx, T)
    jm = model.velocity(X - hx, T) * model.density(X - hx, T)
    return drho_dt + (jp - jm) / (2 * hx)


def continuity_residual(model, grid, times, h_x=1e-2, h_t=1e-2, threshold=1e-4,
                        exclude_radius=0.1):
    """Sup of ``|d rho/dt + d(v rho)/dx|`` by central differences.

    The residual is also evaluated with both steps halved; the ratio of
    the two sup-norms (ideally 4 for a second-order stencil) is reported
    as ``extra["ratio"]``. Samples within ``exclude_radius`` of a node are
    skipped and counted.
    """
    X, T = np.meshgrid(np.asarray(grid, float), np.asarray(times, float))
    X, T = X.ravel(), T.ravel()
    stencil = np.stack([model.node_measure(X + s * h_x, T) for s in (-1, 0, 1)])
    keep = (_node_distance(model, X, T) > exclude_radius) & np.all(stencil > 1e-10, axis=0)
    X, T = X[keep], T[keep]
    r1 = np.abs(_residual(model, X, T, h_x, h_t))
    r2 = np.abs(_residual(model, X, T, h_x / 2, h_t / 2))
    m1 = float(r1.max()) if r1.size else 0.0
    m2 = float(r2.max()) if r2.size else 0.0
    ratio = m1 / m2 if m2 > 0 else float("inf")
    return VerificationReport(
        f"continuity_residual[{model.name}]",
        m1,
        threshold,
        _worst(r1, X, T),
        {"metric_half_step": m2, "ratio": ratio, "skipped": int((~keep).sum()),
         "h_x": h_x, "h_t": h_t},
    )


def compare_densities(a, b, threshold=1e-6, name=None):
    """Sup-norm (and trapezoidal L1) distance between two density fields.

    Points missing in either field are excluded and counted.
    """
    if a.grid.shape != b.grid.shape or not np.array_equal(a.grid, b.grid):
        raise GridMismatchError("fields are on different grids")
    if a.time != b.time:
        raise GridMismatchError(f"fields at different times ({a.time} vs {b.time})")
    miss = a.missing | b.missing
    diff = np.where(miss, 0.0, np.abs(a.values - b.values))
    metric = float(diff.max()) if diff.size else 0.0
    l1 = float(np.trapezoid(diff, a.grid)) if diff.size > 1 else 0.0
    return VerificationReport(
        name or f"compare_densities[{a.provenance} vs {b.provenance}, t={a.time:g}]",
        metric,
        threshold,
        _worst(diff, a.grid, np.full(diff.shape, a.time)),
        {"l1": l1, "n_missing": int(miss.sum())},
    )


def normalization_identity(model, t, domain=None, threshold=1e-6, opts=DEFAULT_OPTIONS,
                           panel_width=0.25):
    """``|int |dx0/dx| rho(x0(x, t), 0) dx - 1|`` by composite Gauss-Legendre.

    ``domain`` defaults to the model's support at ``t``. Missing points
    contribute zero and are counted in ``extra``.
    """
    lo, hi = model.support(t) if domain is None else domain
    n_panels = max(1, int(np.ceil((hi - lo) / panel_width)))
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    x0, jac, missing = _pullback(model, nodes, t, opts)
    vals = np.where(missing, 0.0, jac * model.density(np.where(missing, 0.0, x0), 0.0))
    total = float(np.sum(weights * np.where(missing, 0.0, vals)))
    return VerificationReport(
        f"normalization_identity[{model.name}, t={t:g}]",
        abs(total - 1.0),
        threshold,
        [],
        {"integral": total, "n_missing": int(missing.sum()), "domain": (lo, hi)},
    )


@dataclass
class Figure1Data:
    x: np.ndarray
    exact: np.ndarray
    transported: np.ndarray
    corrected: np.ndarray
    missing: np.ndarray

    def discrepancy(self):
        """Sup-norm gap between the exact and uncorrected amplitudes."""
        ok = ~self.missing
        return float(np.max(np.abs(self.exact[ok] - self.transported[ok])))

    def corrected_error(self):
        ok = ~self.missing
        return float(np.max(np.abs(self.exact[ok] - self.corrected[ok])))


def figure1_dataset(grid=None, opts=DEFAULT_OPTIONS, t=pi):
    """Amplitude curves ``R(x, pi)`` and ``R(x0(x, pi), 0)`` for the superposition.

    Also returns the Jacobian-corrected amplitude ``sqrt(|dx0/dx|) R(x0, 0)``
    so the three can be compared point by point.
    """
    if grid is None:
        grid = np.linspace(*FIGURE1_GRID)
    grid = np.asarray(grid, dtype=float)
    model = Superposition()
    rec, raw = both_densities(model, grid, t, opts)
    exact = np.sqrt(model.density(grid, t))
    return Figure1Data(grid, exact, np.sqrt(raw.values), np.sqrt(rec.values), rec.missing)


def figure1_check(grid=None, opts=DEFAULT_OPTIONS):
    data = figure1_dataset(grid, opts)
    gap = data.discrepancy()
    # metric is the shortfall of the gap below the frozen threshold
    return VerificationReport(
        "figure1_shortfall",
        FIGURE1_MIN_DISCREPANCY - gap,
        0.0,
        [],
        {"discrepancy": gap, "corrected_error": data.corrected_error(),
         "n_missing": int(data.missing.sum())},
    ), data


def reconstruction_grid(t, n=481):
    return np.linspace(-6.0, 6.0 + t, n)


def analytic_models():
    return [Coherent(1.0), FreeGaussian(), Superposition()]


def run_suite(times=(0.5, 1.0, pi), opts=DEFAULT_OPTIONS, reconstruction_tol=1e-6):
    """All standard checks for the three analytic models at ``times``."""
    reports = []
    for model in analytic_models():
        for t in times:
            grid = reconstruction_grid(t)
            rec, _ = both_densities(model, grid, t, opts)
            reports.append(compare_densities(
                rec, exact_density(model, grid, t), reconstruction_tol,
                f"reconstruction[{model.name}, t={t:g}]"))
            reports.append(normalization_identity(model, t, opts=opts))
    cgrid = np.linspace(-5.0, 7.0, 121)
    ctimes = (0.5, 1.0, 2.0, pi)
    for model in (Coherent(1.0), FreeGaussian()):
        reports.append(continuity_residual(model, cgrid, ctimes))
    fig, _ = figure1_check(opts=opts)
    reports.append(fig)
    return reports
