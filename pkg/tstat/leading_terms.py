"""
Approximation curves for the distribution of Student's t statistic.

Every expectation is taken over U = X / c, with c the normalising radius
(b_n, or sqrt(n) sigma_n for L_n2). Discrete laws are summed over their atoms.
Continuous laws are integrated with scipy's vector-valued adaptive quadrature,
one integral per region for the whole x-grid at once. The regions are split
at the truncation radius, at the support and density breakpoints, and on a
geometric ladder towards the bulk of the law. Tails beyond |u| = 1 are
compactified by u = 1/s.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import integrate

from .config import Config
from .exceptions import NumericalError, ValidationError
from .functionals import check_alpha, check_n, compute_functionals
from .normal import norm_cdf_diff, norm_pdf

logger = logging.getLogger(__name__)

TERM_KINDS = (
    'L_n', 'M_n1', 'M_n2', 'Q_n1', 'L_n1', 'L_n2',
    'edgeworth_student', 'edgeworth_plain', 'empirical_cdf', 'extreme_term',
)

# smallest absolute quadrature target; the integrands carry ~1e-17 rounding noise
EPSABS_FLOOR = 1e-16
TAIL_CUTOFF = 1e-12
QUAD_LIMIT = 20000
QUAD_CALLS = 8

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


@dataclass(frozen=True, eq=False)
class CurveOnGrid:
    """Values of one approximation term on a strictly increasing x-grid."""

    term_kind: str
    dist_name: Optional[str]
    n: int
    grid: np.ndarray
    values: np.ndarray
    alpha: Optional[float] = None
    tolerance: Optional[float] = None

    def __post_init__(self):
        if self.term_kind not in TERM_KINDS:
            raise ValidationError('term_kind', f"unknown term '{self.term_kind}'")
        grid = check_grid(self.grid)
        values = np.asarray(self.values, dtype=float)
        if values.shape != grid.shape:
            raise ValidationError('values', f"expected {grid.size} values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"{self.term_kind} for {self.dist_name} has non-finite values")
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return self.grid.size

    def sup_abs(self):
        return float(np.max(np.abs(self.values)))

    def argmax_abs(self):
        return float(self.grid[int(np.argmax(np.abs(self.values)))])

    def value_at(self, x):
        idx = int(np.searchsorted(self.grid, x))
        if idx >= self.grid.size or self.grid[idx] != x:
            raise ValidationError('x', f"{x} is not a grid point")
        return float(self.values[idx])

    def to_frame(self):
        return pd.DataFrame({'x': self.grid, 'value': self.values})


def check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError('grid', "must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(grid)):
        raise ValidationError('grid', "must contain finite values only")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError('grid', "must be strictly increasing")
    return grid


def default_grid(grid_min=None, grid_max=None, step=None, extra=None):
    """
    Equispaced grid on integer multiples of step, so that 0 is hit exactly,
    merged with the extra points (by default -x0, x0 and x1).
    """
    config = Config()
    grid_min = config.GRID_MIN if grid_min is None else float(grid_min)
    grid_max = config.GRID_MAX if grid_max is None else float(grid_max)
    step = config.GRID_STEP if step is None else float(step)
    if not step > 0:
        raise ValidationError('grid_step', f"must be positive, got {step}")
    if not grid_min < grid_max:
        raise ValidationError('grid_min', f"must be below grid_max, got {grid_min} >= {grid_max}")
    if extra is None:
        extra = (-config.DEFAULT_X0, config.DEFAULT_X0, config.DEFAULT_X1)
    k = np.arange(math.ceil(grid_min / step - 1e-9), math.floor(grid_max / step + 1e-9) + 1)
    points = np.concatenate((k * step, np.asarray(extra, dtype=float)))
    return np.unique(points)


def _resolve(grid, tol):
    grid = default_grid() if grid is None else check_grid(grid)
    tol = Config().CURVE_TOL if tol is None else float(tol)
    if not tol > 0:
        raise ValidationError('tol', f"must be positive, got {tol}")
    return grid, tol


# -- expectations over U = X / c -----------------------------------------------

def _kernel(kind, x, u):
    """Phi(shifted x) - Phi(x) at one value of u, over the whole grid."""
    if kind == 'student':
        return norm_cdf_diff(x * math.sqrt(1.0 + u * u) - u, x)
    return norm_cdf_diff(x - u, x)


class _ScaledLaw:
    """A continuous law seen through U = X / c, integrated against grid-valued functions of u."""

    def __init__(self, dist, c, width, epsabs):
        self.dist = dist
        self.beta = c / dist.scale
        lo, hi = dist._support()
        self.lo, self.hi = lo / self.beta, hi / self.beta
        knots = {p / self.beta for p in dist._breakpoints()}
        step = 1.0 / self.beta
        while step < 1.0:
            knots.update((step, -step))
            step *= 4.0
        self.knots = sorted(knots)
        self.width = width
        self.epsabs = epsabs

    def pdf(self, u):
        return self.beta * float(self.dist._pdf(self.beta * u))

    def integrate(self, func, a, b):
        """Integral of func(u) g(u) du over [a, b]; either end may be infinite."""
        a, b = max(a, self.lo), min(b, self.hi)
        total = np.zeros(self.width)
        if not b > a:
            return total
        pieces = []
        if a < -1.0:
            pieces.append((a, min(b, -1.0)))
        if a < 1.0 and b > -1.0:
            pieces.append((max(a, -1.0), min(b, 1.0)))
        if b > 1.0:
            pieces.append((max(a, 1.0), b))
        for lo, hi in pieces:
            if not hi > lo:
                continue
            if math.isinf(lo) or math.isinf(hi):
                total += self._quad_tail(func, lo, hi)
            else:
                points = [k for k in self.knots if lo < k < hi]
                total += self._run(lambda u: func(u) * self.pdf(u), lo, hi, points)
        return total

    def _quad_tail(self, func, lo, hi):
        sign = 1.0 if math.isinf(hi) else -1.0
        edge = abs(lo if sign > 0 else hi)
        zeros = np.zeros(self.width)

        def integrand(s):
            if s < TAIL_CUTOFF:
                return zeros
            u = sign / s
            return func(u) * (self.pdf(u) / (s * s))

        points = [1.0 / abs(k) for k in self.knots if k * sign > edge]
        return self._run(integrand, 0.0, 1.0 / edge, points)

    def _run(self, integrand, a, b, points):
        res, err, info = integrate.quad_vec(
            integrand, a, b, epsabs=self.epsabs, epsrel=1e-12, norm='max',
            limit=QUAD_LIMIT, points=points or None, full_output=True)
        if info.status == 2 or (info.status != 0 and err > 10 * self.epsabs):
            logger.error(f"quad_vec failed for {self.dist.name} on [{a:.6g}, {b:.6g}]: "
                         f"error {err:.3g} vs target {self.epsabs:.3g} ({info.message})")
            raise NumericalError(
                f"quadrature did not converge for {self.dist.name} on [{a:.6g}, {b:.6g}]: "
                f"error estimate {err:.3g}")
        if info.status != 0:
            logger.warning(f"quad_vec hit its interval limit for {self.dist.name}; error {err:.3g} accepted")
        return res


def _restricted_expectation(dist, kind, c, x, radius, inside, epsabs):
    """
    E[K(x, X/c) I(|X| <= radius)] when inside, else E[K(x, X/c) I(|X| > radius)].

    Inside the radius the integrand is compensated by its linear term
    u phi(x), whose expectation comes back in closed form from the
    truncated first moment.
    """
    if dist.kind == 'discrete':
        atoms = dist.scaled_atoms()
        mask = np.abs(atoms) <= radius if inside else np.abs(atoms) > radius
        total = np.zeros_like(x)
        for atom, p in zip(atoms[mask], dist.probs[mask]):
            total += p * _kernel(kind, x, atom / c)
        return total

    law = _ScaledLaw(dist, c, x.size, epsabs)
    r = radius / c
    if dist.symmetric:
        def folded(u):
            return _kernel(kind, x, u) + _kernel(kind, x, -u)
        return law.integrate(folded, 0.0, r) if inside else law.integrate(folded, r, math.inf)

    if not inside:
        def plain(u):
            return _kernel(kind, x, u)
        return law.integrate(plain, -math.inf, -r) + law.integrate(plain, r, math.inf)

    phi = norm_pdf(x)

    def compensated(u):
        return _kernel(kind, x, u) + u * phi

    return law.integrate(compensated, -r, r) - phi * (dist.truncated_moment(1, radius) / c)


def _epsabs(f, tol):
    return max(tol * f.delta_n / f.n / QUAD_CALLS, EPSABS_FLOOR)


# -- curves ------------------------------------------------------------------

def eval_Ln(dist, n, grid=None, tol=None):
    """L_n(x) = n E[Phi(x sqrt(1 + U^2) - U) - Phi(x)], U = X / b_n."""
    grid, tol = _resolve(grid, tol)
    f = compute_functionals(dist, n, 1.0)
    eps = _epsabs(f, tol)
    inner = _restricted_expectation(dist, 'student', f.b_n, grid, f.b_n, True, eps)
    outer = _restricted_expectation(dist, 'student', f.b_n, grid, f.b_n, False, eps)
    logger.debug(f"L_n for {dist.name} at n={f.n} on {grid.size} points")
    return CurveOnGrid('L_n', dist.name, f.n, grid, f.n * (inner + outer),
                       tolerance=tol * f.delta_n)


def eval_Mn_split(dist, n, alpha=0.25, grid=None, tol=None):
    """
    (M_n1, M_n2): L_n restricted to |X| > alpha b_n and to |X| <= alpha b_n.

    Both pieces keep the subtracted Phi(x), so M_n1 + M_n2 = L_n.
    """
    grid, tol = _resolve(grid, tol)
    alpha = check_alpha(alpha)
    f = compute_functionals(dist, n, alpha)
    eps = _epsabs(f, tol)
    cut = alpha * f.b_n
    m1 = f.n * _restricted_expectation(dist, 'student', f.b_n, grid, cut, False, eps)
    m2 = f.n * _restricted_expectation(dist, 'student', f.b_n, grid, cut, True, eps)
    target = tol * f.delta_n
    return (CurveOnGrid('M_n1', dist.name, f.n, grid, m1, alpha=alpha, tolerance=target),
            CurveOnGrid('M_n2', dist.name, f.n, grid, m2, alpha=alpha, tolerance=target))


QN1_RADII = ('B_n', 'b_n')


def eval_Qn1(functionals, grid=None, radius='B_n'):
    """
    Q_n1(x) = -u1 phi + u3 (2x^2 + 1) phi / 6 + u4 x (x^2 - 3) phi / 12

    With radius='b_n' the u_nj are rescaled by (B_n / b_n)^j, i.e. taken as
    n E[X^j I(|X| <= alpha b_n)] / b_n^j, the normalization M_n2 is built on.
    """
    if radius not in QN1_RADII:
        raise ValidationError('radius', f"must be one of {', '.join(QN1_RADII)}, got {radius!r}")
    grid = default_grid() if grid is None else check_grid(grid)
    u1, _, u3, u4 = functionals.u
    if radius == 'b_n':
        r = functionals.B_n / functionals.b_n
        u1, u3, u4 = u1 * r, u3 * r ** 3, u4 * r ** 4
    phi = norm_pdf(grid)
    values = (-u1 + u3 * (2 * grid ** 2 + 1) / 6 + u4 * grid * (grid ** 2 - 3) / 12) * phi
    return CurveOnGrid('Q_n1', functionals.dist_name, functionals.n, grid, values,
                       alpha=functionals.alpha)


def _non_studentized(dist, n, grid, tol, term_kind):
    grid, tol = _resolve(grid, tol)
    f = compute_functionals(dist, n, 1.0)
    if term_kind == 'L_n1':
        c = f.b_n
    else:
        if not f.sigma_n2 > 0:
            raise ValidationError('dist', f"sigma_n^2 vanishes for {dist.name} at n={f.n}")
        c = math.sqrt(f.n * f.sigma_n2)
    eps = _epsabs(f, tol)
    inner = _restricted_expectation(dist, 'shift', c, grid, f.b_n, True, eps)
    outer = _restricted_expectation(dist, 'shift', c, grid, f.b_n, False, eps)
    # -1/2 n c^-2 phi'(x) with phi'(x) = -x phi(x)
    values = f.n * (inner + outer) + 0.5 * f.n / c ** 2 * grid * norm_pdf(grid)
    return CurveOnGrid(term_kind, dist.name, f.n, grid, values, tolerance=tol * f.delta_n)


def eval_Ln1(dist, n, grid=None, tol=None):
    """L_n1(x) = n E[Phi(x - X/b_n) - Phi(x)] - n b_n^-2 phi'(x) / 2"""
    return _non_studentized(dist, n, grid, tol, 'L_n1')


def eval_Ln2(dist, n, grid=None, tol=None):
    """L_n1 with b_n replaced by sqrt(n) sigma_n."""
    return _non_studentized(dist, n, grid, tol, 'L_n2')


def _check_gamma(gamma):
    if gamma is None or not math.isfinite(float(gamma)):
        raise ValidationError('gamma', f"must be a finite third moment, got {gamma}")
    return float(gamma)


def edgeworth_student(gamma, n, grid=None):
    """gamma (2x^2 + 1) phi(x) / (6 sqrt(n))"""
    gamma = _check_gamma(gamma)
    n = check_n(n)
    grid = default_grid() if grid is None else check_grid(grid)
    values = gamma / (6.0 * math.sqrt(n)) * (2 * grid ** 2 + 1) * norm_pdf(grid)
    return CurveOnGrid('edgeworth_student', None, n, grid, values)


def edgeworth_plain(gamma, n, grid=None):
    """-gamma (x^2 - 1) phi(x) / (6 sqrt(n)), the one-term form for the plain mean."""
    gamma = _check_gamma(gamma)
    n = check_n(n)
    grid = default_grid() if grid is None else check_grid(grid)
    values = -gamma / (6.0 * math.sqrt(n)) * (grid ** 2 - 1) * norm_pdf(grid)
    return CurveOnGrid('edgeworth_plain', None, n, grid, values)


# -- fifth-order Taylor remainder ----------------------------------------------

def _taylor_remainder(x, u):
    """
    [Phi(x sqrt(1+u^2) - u) - Phi(x)] / phi(x) minus its cubic-and-quartic
    expansion, without cancelling the leading -u.

    With h = x sqrt(1+u^2) - x - u the increment is
    h + int_0^h expm1(-x s - s^2/2) ds; the -u inside h is removed
    algebraically and the integral uses 64-node Gauss-Legendre.
    """
    q = x * u * u / (np.sqrt(1.0 + u * u) + 1.0)
    h = q - u
    s = h[..., None] * _GL_NODES
    inner = h * np.sum(_GL_WEIGHTS * np.expm1(-x[..., None] * s - 0.5 * s * s), axis=-1)
    a3 = (2 * x * x + 1) / 6.0
    a4 = x * (x * x - 3) / 12.0
    return ((q + inner) - a3 * u ** 3) - a4 * u ** 4


def taylor5_check(x, u):
    """
    Error of the quartic expansion of Phi(x sqrt(1+u^2) - u) about u = 0,
    and its ratio to |u|^5 (0 at u = 0). Accepts scalars or broadcastable arrays.
    """
    x, u = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
    if np.any(np.abs(u) > 1.0):
        raise ValidationError('u', "must satisfy |u| <= 1")
    error = norm_pdf(x) * np.abs(_taylor_remainder(x, u))
    au5 = np.abs(u) ** 5
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(au5 > 0, error / np.where(au5 > 0, au5, 1.0), 0.0)
    error = np.where(u == 0, 0.0, error)
    if error.ndim == 0:
        return float(error), float(ratio)
    return error, ratio


def taylor5_sweep(x_grid=None, u_grid=None):
    """Errors and ratios on the x-by-u mesh, plus the largest ratio."""
    x_grid = np.linspace(-6.0, 6.0, 200) if x_grid is None else np.asarray(x_grid, dtype=float)
    u_grid = np.linspace(-1.0, 1.0, 200) if u_grid is None else np.asarray(u_grid, dtype=float)
    xx, uu = np.meshgrid(x_grid, u_grid, indexing='ij')
    errors, ratios = taylor5_check(xx, uu)
    max_ratio = float(np.max(ratios))
    logger.info(f"Taylor sweep over {x_grid.size}x{u_grid.size}: max ratio {max_ratio:.6g}")
    return errors, ratios, max_ratio


# -- diagnostics built from the curves -------------------------------------------

def qn1_quality(dist, n, alphas=(0.5, 0.25, 0.1), grid=None, tol=None, radius='b_n'):
    """
    sup |M_n2 - Q_n1| / (alpha delta_n) for each alpha.

    Q_n1 is normalized by b_n by default so that it matches M_n2 term by
    term; radius='B_n' keeps the B_n-normalized u_nj.
    """
    grid, tol = _resolve(grid, tol)
    ratios = {}
    for alpha in alphas:
        f = compute_functionals(dist, n, alpha)
        _, m2 = eval_Mn_split(dist, n, alpha, grid, tol)
        q = eval_Qn1(f, grid, radius)
        ratios[float(alpha)] = float(np.max(np.abs(m2.values - q.values))) / (f.alpha * f.delta_n)
        logger.info(f"Q_n1 quality {dist.name} n={f.n} alpha={f.alpha}: {ratios[float(alpha)]:.6g}")
    return ratios


def edgeworth_gap(dist, n, grid=None, tol=1e-6):
    """
    sup |sqrt(n) L_n - gamma (2x^2 + 1) phi / 6| for a law with E X^2 = 1.

    The default tolerance is tight because the gap itself is O(n^-1/2)
    after multiplying by sqrt(n).
    """
    gamma = _check_gamma(dist.gamma)
    ln = eval_Ln(dist, n, grid, tol)
    limit = edgeworth_student(gamma, 1, ln.grid)
    return float(np.max(np.abs(math.sqrt(ln.n) * ln.values - limit.values)))
