"""
Zero-mean test distributions.

Every law is described at unit scale by a subclass of DistributionSpec and
may be rescaled with ``scaled(c)`` to represent cX. Truncated moments
E[X^j I(|X| <= c)] and tails P(|X| > c) come from closed forms where the law
has them, otherwise from adaptive quadrature against the density.
"""

import json
import logging
import math

import numpy as np
from scipy import integrate, special

from .exceptions import NumericalError, ValidationError

logger = logging.getLogger(__name__)

MAX_MOMENT_ORDER = 8
MOMENT_ABS_TOL = 1e-12

# E[(E - 1)^j] for a standard exponential E: the derangement numbers
_CENTERED_EXP_MOMENTS = (1, 0, 1, 2, 9, 44, 265, 1854, 14833)


def _check_cutoff(c, field='c'):
    c = float(c)
    if not math.isfinite(c):
        raise ValidationError(field, f"must be finite, got {c}")
    if c <= 0:
        raise ValidationError(field, f"must be positive, got {c}")
    return c


def _check_order(j):
    if isinstance(j, bool) or int(j) != j or not 0 <= int(j) <= MAX_MOMENT_ORDER:
        raise ValidationError('j', f"moment order must be an integer in 0..{MAX_MOMENT_ORDER}, got {j}")
    return int(j)


def make_rng(seed):
    """PCG64 generator for a 64-bit seed."""
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) < 2 ** 64:
        raise ValidationError('seed', f"must be an integer in [0, 2^64), got {seed}")
    return np.random.Generator(np.random.PCG64(int(seed)))


class DistributionSpec:
    """
    A zero-mean law with truncated moments, tails, CDF and a quantile sampler.

    Subclasses describe the unit-scale law through the underscore hooks; the
    public methods apply the scale factor and validate arguments.
    """

    name = None
    kind = 'continuous'
    symmetric = False
    has_finite_variance = True
    unit_gamma = None

    def __init__(self, scale=1.0):
        scale = float(scale)
        if not (math.isfinite(scale) and scale > 0):
            raise ValidationError('scale', f"must be a positive finite number, got {scale}")
        self.scale = scale

    # -- unit-scale hooks -------------------------------------------------

    def _moment(self, j, c):
        """Closed-form E[X^j I(|X| <= c)] at unit scale, or None."""
        return None

    def _tail(self, c):
        """Closed-form P(|X| > c) at unit scale, or None."""
        return None

    def _pdf(self, x):
        raise NotImplementedError

    def _cdf(self, x):
        raise NotImplementedError

    def _ppf(self, u):
        raise NotImplementedError

    def _support(self):
        """(lower, upper) support bounds at unit scale."""
        return (-math.inf, math.inf)

    def _breakpoints(self):
        """Points where the unit-scale density is not smooth."""
        return ()

    def _params(self):
        return {}

    # -- public interface -------------------------------------------------

    @property
    def params(self):
        params = dict(self._params())
        params['scale'] = self.scale
        return params

    @property
    def support(self):
        lo, hi = self._support()
        return (lo * self.scale, hi * self.scale)

    @property
    def breakpoints(self):
        return tuple(p * self.scale for p in self._breakpoints())

    @property
    def gamma(self):
        """E[X^3] when E|X|^3 is finite, else None."""
        if self.unit_gamma is None:
            return None
        return self.unit_gamma * self.scale ** 3

    def scaled(self, c):
        """The law of cX."""
        return type(self)(scale=self.scale * float(c), **self._params())

    def truncated_moment(self, j, c):
        """E[X^j I(|X| <= c)]"""
        j = _check_order(j)
        c = _check_cutoff(c)
        if self.symmetric and j % 2 == 1:
            return 0.0
        unit_c = c / self.scale
        value = self._moment(j, unit_c)
        if value is None:
            # tolerance expressed at unit scale so that the scaled result meets 1e-12 max(1, c^j)
            tol = MOMENT_ABS_TOL * max(1.0, c ** j) / self.scale ** j
            value = self._quad_moment(j, unit_c, tol)
        return float(value) * self.scale ** j

    def tail(self, c):
        """P(|X| > c)"""
        c = _check_cutoff(c)
        value = self._tail(c / self.scale)
        if value is None:
            value = 1.0 - self.truncated_moment(0, c)
        return min(1.0, max(0.0, float(value)))

    def cdf(self, x):
        return self._cdf(np.asarray(x, dtype=float) / self.scale)

    def quantile(self, u):
        return self.scale * self._ppf(np.asarray(u, dtype=float))

    def sample_unit(self, rng, size):
        """Unit-scale draws as a quantile transform of rng uniforms."""
        u = rng.random(size)
        # keep u inside (0, 1) so unbounded quantiles stay finite
        u = np.maximum(u, np.finfo(float).tiny)
        return self._ppf(u)

    def sample(self, count, seed):
        """count independent draws; identical (seed, count) gives identical output."""
        if isinstance(count, bool) or int(count) != count or count < 1:
            raise ValidationError('count', f"must be a positive integer, got {count}")
        rng = make_rng(seed)
        return self.scale * self.sample_unit(rng, int(count))

    def to_dict(self):
        return {
            'name': self.name,
            'kind': self.kind,
            'params': self.params,
            'gamma': self.gamma,
            'has_finite_variance': self.has_finite_variance,
            'symmetric': self.symmetric,
            'support': [float(s) for s in self.support],
        }

    def _quad_moment(self, j, c, tol):
        lo, hi = self._support()
        if self.symmetric:
            a, b, factor = 0.0, min(c, hi), 2.0
        else:
            a, b, factor = max(-c, lo), min(c, hi), 1.0
        if b <= a:
            return 0.0
        points = [p for p in self._breakpoints() if a < p < b] or None

        def integrand(x):
            return x ** j * self._pdf(x)

        result = integrate.quad(integrand, a, b, points=points, epsabs=tol / factor,
                                epsrel=1e-13, limit=500, full_output=1)
        value, abserr = result[0], result[1]
        if len(result) > 3 and abserr > 10 * tol / factor:
            logger.error(f"Quadrature failed for {self.name} moment j={j} c={c}: {result[3]}")
            raise NumericalError(
                f"truncated moment quadrature did not converge for {self.name} (j={j}, c={c}): "
                f"error estimate {abserr:.3g}")
        return factor * value

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(f'{k}={v!r}' for k, v in self.params.items())})"


class DiscreteLaw(DistributionSpec):
    """A law on finitely many atoms."""

    kind = 'discrete'

    def __init__(self, atoms, probs, name='discrete', scale=1.0):
        super().__init__(scale)
        atoms = np.asarray(atoms, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if atoms.ndim != 1 or atoms.shape != probs.shape or atoms.size == 0:
            raise ValidationError('atoms', "atoms and probs must be equal-length non-empty lists")
        if np.any(probs <= 0) or not np.isclose(probs.sum(), 1.0, rtol=0, atol=1e-12):
            raise ValidationError('probs', "probabilities must be positive and sum to 1")
        if abs(float(np.dot(atoms, probs))) > 1e-12:
            raise ValidationError('atoms', f"law must have mean zero, got {np.dot(atoms, probs)}")
        order = np.argsort(atoms)
        self.atoms = atoms[order]
        self.probs = probs[order]
        self.name = name
        self.symmetric = bool(np.allclose(self.atoms, -self.atoms[::-1])
                              and np.allclose(self.probs, self.probs[::-1]))
        self.unit_gamma = float(np.dot(self.probs, self.atoms ** 3))
        self._cum = np.cumsum(self.probs)

    def scaled(self, c):
        return DiscreteLaw(self.atoms, self.probs, name=self.name, scale=self.scale * float(c))

    def _params(self):
        return {'atoms': [float(a) for a in self.atoms], 'probs': [float(p) for p in self.probs]}

    def _support(self):
        return (float(self.atoms[0]), float(self.atoms[-1]))

    def _moment(self, j, c):
        inside = np.abs(self.atoms) <= c
        return float(np.dot(self.probs[inside], self.atoms[inside] ** j))

    def _tail(self, c):
        return float(self.probs[np.abs(self.atoms) > c].sum())

    def _cdf(self, x):
        idx = np.searchsorted(self.atoms, x, side='right')
        cum = np.concatenate(([0.0], self._cum))
        return np.minimum(cum[idx], 1.0)

    def _ppf(self, u):
        idx = np.searchsorted(self._cum, u, side='right')
        return self.atoms[np.minimum(idx, self.atoms.size - 1)]

    def scaled_atoms(self):
        return self.atoms * self.scale


class Rademacher(DiscreteLaw):
    """P(X = -1) = P(X = 1) = 1/2"""

    def __init__(self, scale=1.0):
        super().__init__([-1.0, 1.0], [0.5, 0.5], name='rademacher', scale=scale)

    def scaled(self, c):
        return Rademacher(scale=self.scale * float(c))

    def _params(self):
        return {}


class ThreePoint(DiscreteLaw):
    """Atoms -1, 0, 2 with probabilities 1/2, 1/4, 1/4 (mean zero, skewed)."""

    def __init__(self, scale=1.0):
        super().__init__([-1.0, 0.0, 2.0], [0.5, 0.25, 0.25], name='three_point', scale=scale)

    def scaled(self, c):
        return ThreePoint(scale=self.scale * float(c))

    def _params(self):
        return {}


class Uniform(DistributionSpec):
    """Uniform on [-sqrt(3), sqrt(3)]: unit variance."""

    name = 'uniform'
    symmetric = True
    unit_gamma = 0.0
    HALF_WIDTH = math.sqrt(3.0)

    def _support(self):
        return (-self.HALF_WIDTH, self.HALF_WIDTH)

    def _breakpoints(self):
        return (-self.HALF_WIDTH, self.HALF_WIDTH)

    def _moment(self, j, c):
        if j % 2 == 1:
            return 0.0
        m = min(c, self.HALF_WIDTH)
        return m ** (j + 1) / ((j + 1) * self.HALF_WIDTH)

    def _tail(self, c):
        return max(0.0, 1.0 - c / self.HALF_WIDTH)

    def _pdf(self, x):
        return np.where(np.abs(x) <= self.HALF_WIDTH, 0.5 / self.HALF_WIDTH, 0.0)

    def _cdf(self, x):
        return np.clip((x + self.HALF_WIDTH) / (2 * self.HALF_WIDTH), 0.0, 1.0)

    def _ppf(self, u):
        return self.HALF_WIDTH * (2.0 * u - 1.0)


class CenteredExponential(DistributionSpec):
    """X = E - 1 with E standard exponential: unit variance, E X^3 = 2."""

    name = 'centered_exponential'
    unit_gamma = 2.0

    def _support(self):
        return (-1.0, math.inf)

    def _breakpoints(self):
        return (-1.0,)

    @staticmethod
    def _upper(j, a):
        # integral of x^j exp(-(x + 1)) over (a, inf), any real a >= -1
        poly = sum(math.factorial(j) / math.factorial(k) * a ** k for k in range(j + 1))
        return math.exp(-(a + 1.0)) * poly

    def _moment(self, j, c):
        if c >= 1.0:
            return _CENTERED_EXP_MOMENTS[j] - self._upper(j, c)
        return self._upper(j, -c) - self._upper(j, c)

    def _tail(self, c):
        upper = math.exp(-(c + 1.0))
        lower = -math.expm1(-(1.0 - c)) if c < 1.0 else 0.0
        return upper + lower

    def _pdf(self, x):
        return np.where(x >= -1.0, np.exp(-(np.maximum(x, -1.0) + 1.0)), 0.0)

    def _cdf(self, x):
        return np.where(x >= -1.0, -np.expm1(-(np.maximum(x, -1.0) + 1.0)), 0.0)

    def _ppf(self, u):
        return -np.log1p(-u) - 1.0


class StudentT(DistributionSpec):
    """Student's t with df degrees of freedom (df > 2)."""

    symmetric = True

    def __init__(self, df, scale=1.0):
        super().__init__(scale)
        df = float(df)
        if not df > 2:
            raise ValidationError('df', f"must exceed 2 for a finite variance, got {df}")
        self.df = df
        self.name = f"student_t{int(df)}" if df == int(df) else f"student_t{df:g}"
        self.unit_gamma = 0.0 if df > 3 else None
        self._norm = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)

    def scaled(self, c):
        return StudentT(self.df, scale=self.scale * float(c))

    def _params(self):
        return {'df': self.df}

    def _tail(self, c):
        return 2.0 * float(special.stdtr(self.df, -c))

    def _pdf(self, x):
        return self._norm * (1.0 + np.asarray(x, dtype=float) ** 2 / self.df) ** (-(self.df + 1) / 2)

    def _cdf(self, x):
        return special.stdtr(self.df, x)

    def _ppf(self, u):
        return special.stdtrit(self.df, u)


class ParetoTail(DistributionSpec):
    """
    Symmetric law with density |x|^-3 on |x| >= 1.

    Infinite variance, yet in the normal domain of attraction because
    E[X^2 I(|X| <= x)] = 2 log x is slowly varying.
    """

    name = 'pareto_tail'
    symmetric = True
    has_finite_variance = False

    def _breakpoints(self):
        return (-1.0, 1.0)

    def _moment(self, j, c):
        if j % 2 == 1 or c < 1.0:
            return 0.0
        if j == 2:
            return 2.0 * math.log(c)
        return 2.0 * (c ** (j - 2) - 1.0) / (j - 2)

    def _tail(self, c):
        return 1.0 if c < 1.0 else c ** -2

    def _pdf(self, x):
        ax = np.abs(x)
        return np.where(ax >= 1.0, 1.0 / np.maximum(ax, 1.0) ** 3, 0.0)

    def _cdf(self, x):
        ax = np.maximum(np.abs(x), 1.0)
        return np.where(x <= -1.0, 0.5 / ax ** 2, np.where(x >= 1.0, 1.0 - 0.5 / ax ** 2, 0.5))

    def _ppf(self, u):
        # closed-form inverse of the CDF above
        lower = -1.0 / np.sqrt(2.0 * np.minimum(u, 0.5))
        upper = 1.0 / np.sqrt(2.0 * np.maximum(1.0 - u, np.finfo(float).tiny))
        return np.where(u < 0.5, lower, upper)


class DistributionCatalog:
    """Named collection of test laws."""

    def __init__(self, entries):
        names = [entry.name for entry in entries]
        if len(set(names)) != len(names):
            raise ValidationError('catalog', f"duplicate distribution names: {names}")
        self.entries = list(entries)

    def names(self):
        return [entry.name for entry in self.entries]

    def get(self, name):
        for entry in self.entries:
            if entry.name == name:
                return entry
        raise ValidationError('distribution', f"unknown distribution '{name}'; known: {', '.join(self.names())}")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def to_json(self):
        return json.dumps([entry.to_dict() for entry in self.entries], indent=2, sort_keys=True)


def default_catalog():
    return DistributionCatalog([
        Rademacher(),
        ThreePoint(),
        Uniform(),
        CenteredExponential(),
        StudentT(3),
        StudentT(5),
        ParetoTail(),
    ])


CATALOG = default_catalog()


def make_distribution(name, params=None):
    """
    Build a catalog law from its name and parameter dict.

    The only accepted parameter is ``scale``; Student-t laws are named by
    their degrees of freedom (``student_t3``, ``student_t5``).
    """
    params = dict(params or {})
    scale = params.pop('scale', 1.0)
    base = CATALOG.get(name)
    if params:
        expected = {k: v for k, v in base.params.items() if k != 'scale'}
        for key, value in params.items():
            if key not in expected or expected[key] != value:
                raise ValidationError(f"params.{key}", f"not a parameter of {name}: {value!r}")
    return base.scaled(scale)


def truncated_moment(dist, j, c):
    return dist.truncated_moment(j, c)


def tail(dist, c):
    return dist.tail(c)


def sample(dist, count, seed):
    return dist.sample(count, seed)
