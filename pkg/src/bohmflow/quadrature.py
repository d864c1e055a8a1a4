"""Composite Gauss-Legendre quadrature.

Two flavours are provided: :func:`integrate`, an adaptive composite rule for
definite integrals of vectorised integrands, and :class:`CumulativeTable`, a
fixed-panel running integral that evaluates ``F(x) = int_lo^x f`` for many
``x`` at once (used for CDFs and inverse-CDF sampling).
"""

from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError, SamplingError

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class QuadratureOptions:
    abs_tol: float = 1e-12
    initial_panels: int = 16
    max_panels: int = 1 << 16

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.initial_panels < 1 or self.max_panels < self.initial_panels:
            raise ValueError("invalid panel counts")


def _panel_sums(f, a, b):
    """Gauss-Legendre integral of ``f`` on each panel ``[a_i, b_i]``."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return half * (vals @ _GL_WEIGHTS)


def integrate(f, a, b, options=None):
    """Adaptive composite Gauss-Legendre integral of ``f`` over ``[a, b]``.

    Each panel is compared with the sum over its two halves; panels whose
    difference exceeds their share of ``abs_tol`` are split. ``f`` must
    accept a 1-D array of abscissae.
    """
    opts = options or QuadratureOptions()
    if not (np.isfinite(a) and np.isfinite(b)):
        raise QuadratureError("integration limits must be finite")
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    edges = np.linspace(a, b, opts.initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    total = 0.0
    n_panels = lo.size
    while lo.size:
        mid = 0.5 * (lo + hi)
        coarse = _panel_sums(f, lo, hi)
        fine = _panel_sums(f, lo, mid) + _panel_sums(f, mid, hi)
        share = opts.abs_tol * (hi - lo) / (b - a)
        ok = np.abs(fine - coarse) <= np.maximum(share, 1e-15 * np.abs(fine))
        total += fine[ok].sum()
        lo, hi, mid = lo[~ok], hi[~ok], mid[~ok]
        if not lo.size:
            break
        n_panels += lo.size
        if n_panels > opts.max_panels:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {n_panels} panels"
            )
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    if not np.isfinite(total):
        raise QuadratureError("integrand produced non-finite values")
    return sign * total


class CumulativeTable:
    """Running integral ``F(x) = int_lo^x f(y) dy`` on ``[lo, hi]``.

    Whole panels are integrated once; each query adds a Gauss-Legendre
    integral over the partial panel containing ``x``. Queries below ``lo``
    return 0 and above ``hi`` return the full integral.
    """

    def __init__(self, f, lo, hi, n_panels=512):
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.f = f
        self.lo = float(lo)
        self.hi = float(hi)
        self.edges = np.linspace(self.lo, self.hi, n_panels + 1)
        self.width = self.edges[1] - self.edges[0]
        sums = _panel_sums(f, self.edges[:-1], self.edges[1:])
        self.cum = np.concatenate([[0.0], np.cumsum(sums)])

    @property
    def total(self):
        return float(self.cum[-1])

    def _panel_index(self, x):
        j = np.floor((x - self.lo) / self.width).astype(np.int64)
        return np.clip(j, 0, self.edges.size - 2)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.clip(x.ravel(), self.lo, self.hi)
        j = self._panel_index(flat)
        left = self.edges[j]
        out = self.cum[j] + self._partial(left, flat)
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def _partial(self, left, right):
        half = 0.5 * (right - left)
        nodes = (left + half)[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.asarray(self.f(nodes.ravel()), dtype=float).reshape(nodes.shape)
        return half * (vals @ _GL_WEIGHTS)

    def invert(self, u, tol=1e-10, max_iter=200):
        """Solve ``F(x) = u`` by bisection, vectorised over ``u``.

        The running integral must be nondecreasing. The starting bracket is
        the panel whose cumulative range contains ``u``.
        """
        u = np.asarray(u, dtype=float).ravel()
        j = np.searchsorted(self.cum, u, side="right") - 1
        j = np.clip(j, 0, self.edges.size - 2)
        a = self.edges[j].copy()
        b = self.edges[j + 1].copy()
        for _ in range(max_iter):
            if np.all(b - a <= tol):
                break
            m = 0.5 * (a + b)
            below = self(m) < u
            a = np.where(below, m, a)
            b = np.where(below, b, m)
        else:
            raise SamplingError("inverse-CDF bisection did not converge")
        return 0.5 * (a + b)
