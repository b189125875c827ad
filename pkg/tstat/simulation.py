"""
Distribution of Student's t statistic by Monte Carlo and by exact enumeration.

Monte Carlo work is cut into fixed-size replicate chunks. Chunk i draws from
PCG64 seeded with SeedSequence(seed, spawn_key=(i,)), and chunk results are
reduced in chunk order, so the output does not depend on the worker count.
Statistics are computed from unit-scale draws. T and the self-normalised
ratios are scale free, so X and cX give bit-identical values under one seed.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import special

from .config import Config
from .distributions import make_rng
from .exceptions import NumericalError, ValidationError
from .functionals import check_alpha, check_n, compute_functionals
from .leading_terms import CurveOnGrid, _kernel, check_grid

logger = logging.getLogger(__name__)

VARIANTS = ('divisor_n', 'divisor_n_minus_1', 'self_normalized')
NORMALIZATIONS = ('b_n', 'sqrt_n_sigma_n')
SOURCES = ('monte_carlo', 'exact_enumeration')

DEGENERATE_EPS = 1e-12
MAX_EXACT_N = 14
MAX_EXACT_ATOMS = 4
AGGREGATE_RTOL = 1e-12
# draws held in memory at once inside a chunk
ROW_BLOCK_ELEMENTS = 1 << 20


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """
    Law of a statistic from simulation or enumeration.

    For Monte Carlo output ``values`` holds every finite replicate, sorted, and
    the infinite masses are counts out of ``replicates``. For exact output
    ``values`` holds the distinct finite values with their probabilities in
    ``weights`` and the infinite masses are probabilities.
    """

    dist_name: str
    n: int
    source: str
    variant: str
    values: np.ndarray
    mass_neg_inf: float
    mass_pos_inf: float
    replicates: Optional[int] = None
    seed: Optional[int] = None
    weights: Optional[np.ndarray] = None
    degenerate: int = 0
    statistic: str = 'T'

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValidationError('source', f"unknown source '{self.source}'")
        values = np.asarray(self.values, dtype=float)
        if values.size and (np.any(np.diff(values) < 0) or not np.all(np.isfinite(values))):
            raise ValidationError('values', "must be finite and sorted ascending")
        object.__setattr__(self, 'values', values)
        if self.weights is not None:
            object.__setattr__(self, 'weights', np.asarray(self.weights, dtype=float))

    @property
    def total(self):
        return float(self.replicates) if self.source == 'monte_carlo' else 1.0

    @property
    def finite_mass(self):
        if self.weights is None:
            return float(self.values.size)
        return float(self.weights.sum())

    def cdf(self, x):
        """Right-continuous F(x) = (mass at -inf + finite mass <= x) / total."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.values, x, side='right')
        if self.weights is None:
            below = idx.astype(float)
        else:
            below = np.concatenate(([0.0], np.cumsum(self.weights)))[idx]
        return np.clip((self.mass_neg_inf + below) / self.total, 0.0, 1.0)

    def to_frame(self):
        """Distinct values with their probability, infinite outcomes included."""
        if self.weights is None:
            values, counts = np.unique(self.values, return_counts=True)
            mass = counts / self.total
        else:
            values, mass = self.values, self.weights
        frame = pd.DataFrame({'value': values, 'probability': mass})
        ends = []
        if self.mass_neg_inf:
            ends.append(pd.DataFrame({'value': [-math.inf], 'probability': [self.mass_neg_inf / self.total]}))
        ends.append(frame)
        if self.mass_pos_inf:
            ends.append(pd.DataFrame({'value': [math.inf], 'probability': [self.mass_pos_inf / self.total]}))
        return pd.concat(ends, ignore_index=True)


def _check_count(value, field):
    if isinstance(value, bool) or int(value) != value or int(value) < 1:
        raise ValidationError(field, f"must be a positive integer, got {value}")
    return int(value)


def _check_variant(variant):
    if variant not in VARIANTS:
        raise ValidationError('variant', f"must be one of {', '.join(VARIANTS)}, got '{variant}'")
    return variant


def _t_statistic(x, variant):
    """Row-wise T over a block of samples."""
    return _t_from_sums(x.sum(axis=1), (x * x).sum(axis=1), x.shape[1], variant)


def _chunk_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _run_chunks(dist, n, replicates, seed, statistic, threads=None, chunk_size=None):
    """Evaluate statistic(block of unit-scale draws) over all replicates, in chunk order."""
    config = Config()
    threads = config.THREADS if threads is None else _check_count(threads, 'threads')
    chunk_size = config.CHUNK_SIZE if chunk_size is None else _check_count(chunk_size, 'chunk_size')
    make_rng(seed)
    n_chunks = -(-replicates // chunk_size)
    rows = max(1, ROW_BLOCK_ELEMENTS // n)

    def run(index):
        rng = _chunk_rng(seed, index)
        size = min(chunk_size, replicates - index * chunk_size)
        out = []
        for start in range(0, size, rows):
            draws = dist.sample_unit(rng, (min(rows, size - start), n))
            out.append(statistic(draws))
        return np.concatenate(out)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run, range(n_chunks)))
    return np.concatenate(parts)


def _from_samples(dist, n, replicates, seed, variant, values, statistic):
    finite = np.isfinite(values)
    neg = int(np.sum(values == -np.inf))
    pos = int(np.sum(values == np.inf))
    if neg or pos:
        logger.warning(f"{dist.name} n={n}: {neg + pos} of {replicates} replicates had a vanishing denominator")
    return EmpiricalDistribution(
        dist_name=dist.name, n=n, source='monte_carlo', variant=variant,
        values=np.sort(values[finite]), mass_neg_inf=neg, mass_pos_inf=pos,
        replicates=replicates, seed=int(seed), degenerate=neg + pos, statistic=statistic)


def simulate_T(dist, n, replicates, seed, variant='divisor_n', threads=None, chunk_size=None):
    """Monte Carlo law of T from replicates samples of size n."""
    n = check_n(n, minimum=2)
    replicates = _check_count(replicates, 'replicates')
    variant = _check_variant(variant)
    values = _run_chunks(dist, n, replicates, seed, lambda x: _t_statistic(x, variant),
                         threads, chunk_size)
    logger.info(f"Simulated T for {dist.name}: n={n}, N={replicates}, seed={seed}, variant={variant}")
    return _from_samples(dist, n, replicates, seed, variant, values, 'T')


def simulate_truncated_T(dist, n, alpha, replicates, seed, variant='divisor_n', threads=None, chunk_size=None):
    """Monte Carlo law of T computed from Y_i = X_i I(|X_i| <= alpha b_n)."""
    n = check_n(n, minimum=2)
    alpha = check_alpha(alpha)
    replicates = _check_count(replicates, 'replicates')
    variant = _check_variant(variant)
    cut = alpha * compute_functionals(dist, n, alpha).b_n / dist.scale

    def statistic(x):
        return _t_statistic(np.where(np.abs(x) <= cut, x, 0.0), variant)

    values = _run_chunks(dist, n, replicates, seed, statistic, threads, chunk_size)
    return _from_samples(dist, n, replicates, seed, variant, values, 'T_truncated')


def _normalizer(dist, n, normalization):
    if normalization not in NORMALIZATIONS:
        raise ValidationError('normalization', f"must be one of {', '.join(NORMALIZATIONS)}, got '{normalization}'")
    f = compute_functionals(dist, n, 1.0)
    if normalization == 'b_n':
        return f.b_n
    return math.sqrt(f.n * f.sigma_n2)


def simulate_S(dist, n, replicates, seed, normalization='b_n', threads=None, chunk_size=None):
    """Monte Carlo law of S1 = sum X / b_n, or of S2 = sum X / (sqrt(n) sigma_n)."""
    n = check_n(n)
    replicates = _check_count(replicates, 'replicates')
    c = _normalizer(dist, n, normalization) / dist.scale
    values = _run_chunks(dist, n, replicates, seed, lambda x: x.sum(axis=1) / c, threads, chunk_size)
    statistic = 'S1' if normalization == 'b_n' else 'S2'
    return _from_samples(dist, n, replicates, seed, 'divisor_n', values, statistic)


# -- exact enumeration -------------------------------------------------------

def _check_discrete(dist, n, limit=MAX_EXACT_N):
    if dist.kind != 'discrete':
        raise ValidationError('dist', f"exact enumeration needs a discrete law, {dist.name} is {dist.kind}")
    if dist.atoms.size > MAX_EXACT_ATOMS:
        raise ValidationError('dist', f"at most {MAX_EXACT_ATOMS} atoms can be enumerated, {dist.name} has {dist.atoms.size}")
    if limit is not None and n > limit:
        raise ValidationError('n', f"exact enumeration is limited to n <= {limit}, got {n}")


def compositions(n, k):
    """All k-part compositions of n (counts per atom) as an integer matrix."""
    rows = []
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        edges = (-1,) + bars + (n + k - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(k)])
    return np.array(rows, dtype=np.int64).reshape(-1, k)


def _multinomial_pmf(counts, probs):
    n = counts.sum(axis=1)
    logp = special.gammaln(n + 1) - special.gammaln(counts + 1).sum(axis=1) + counts @ np.log(probs)
    return np.exp(logp)


def _aggregate(values, probs):
    """Merge values equal to AGGREGATE_RTOL relative; returns sorted distinct values and summed mass."""
    order = np.argsort(values, kind='stable')
    values, probs = values[order], probs[order]
    out_v, out_p = [], []
    for v, p in zip(values, probs):
        if out_v and abs(v - out_v[-1]) <= AGGREGATE_RTOL * max(abs(v), abs(out_v[-1]), 1e-300):
            out_p[-1] += p
        else:
            out_v.append(v)
            out_p.append(p)
    return np.array(out_v), np.array(out_p)


def _exact_from_states(dist, n, variant, values, probs, statistic, states):
    total = probs.sum()
    if abs(total - 1.0) > 1e-12:
        raise NumericalError(f"enumerated probabilities for {dist.name} sum to {total!r}")
    neg = float(probs[values == -np.inf].sum())
    pos = float(probs[values == np.inf].sum())
    finite = np.isfinite(values)
    distinct, weights = _aggregate(values[finite], probs[finite])
    logger.info(f"Enumerated {states} states for {dist.name} n={n}: {distinct.size} distinct {statistic} values")
    return EmpiricalDistribution(
        dist_name=dist.name, n=n, source='exact_enumeration', variant=variant,
        values=distinct, weights=weights, mass_neg_inf=neg, mass_pos_inf=pos,
        replicates=states, statistic=statistic)


def exact_T_distribution(dist, n, variant='divisor_n'):
    """Exact law of T for a discrete law with at most four atoms and n <= 14."""
    n = check_n(n, minimum=2)
    variant = _check_variant(variant)
    _check_discrete(dist, n)
    counts = compositions(n, dist.atoms.size)
    probs = _multinomial_pmf(counts, dist.probs)
    # T depends on a sample only through its atom counts
    s = counts @ dist.atoms
    ss = counts @ dist.atoms ** 2
    values = _t_from_sums(s, ss, n, variant)
    return _exact_from_states(dist, n, variant, values, probs, 'T', counts.shape[0])


def _t_from_sums(s, ss, n, variant):
    """T from the sum and sum of squares, with the signed-infinity convention for a vanishing denominator."""
    if variant == 'self_normalized':
        ok = ss > 0
        return np.where(ok, s / np.sqrt(np.where(ok, ss, 1.0)), 0.0)
    d2 = ss - s * s / n
    ok = d2 > DEGENERATE_EPS * ss
    t = np.where(ok, s / np.sqrt(np.where(ok, d2, 1.0)), np.sign(s) * np.inf)
    t = np.where(~ok & (s == 0), 0.0, t)
    if variant == 'divisor_n_minus_1':
        t = t * (1.0 - 1.0 / n) ** -0.5
    return t


def exact_S_distribution(dist, n, normalization='b_n'):
    """
    Exact law of S1 or S2 for a discrete law. Two-atom laws go through the
    binomial distribution and accept any n; other laws enumerate compositions.
    """
    n = check_n(n)
    c = _normalizer(dist, n, normalization)
    atoms = dist.scaled_atoms()
    if dist.kind == 'discrete' and atoms.size == 2:
        k = np.arange(n + 1)
        logp = (special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
                + k * math.log(dist.probs[1]) + (n - k) * math.log(dist.probs[0]))
        s = k * atoms[1] + (n - k) * atoms[0]
        probs = np.exp(logp)
        states = n + 1
    else:
        _check_discrete(dist, n)
        counts = compositions(n, atoms.size)
        probs = _multinomial_pmf(counts, dist.probs)
        s = counts @ atoms
        states = counts.shape[0]
    statistic = 'S1' if normalization == 'b_n' else 'S2'
    return _exact_from_states(dist, n, 'divisor_n', s / c, probs, statistic, states)


# -- curves from samples -------------------------------------------------------

def empirical_cdf(emp, grid):
    grid = check_grid(grid)
    return CurveOnGrid('empirical_cdf', emp.dist_name, emp.n, grid, emp.cdf(grid))


def extreme_term_mc(dist, n, alpha, grid, replicates, seed, threads=None, chunk_size=None):
    """
    Monte Carlo estimate of E[(Phi(x sqrt(1 + V^2) - V) - Phi(x)) I(|V| > alpha)]
    with V = X_max / b_n, X_max the observation of largest modulus.
    """
    n = check_n(n)
    alpha = check_alpha(alpha)
    grid = check_grid(grid)
    replicates = _check_count(replicates, 'replicates')
    b_unit = compute_functionals(dist, n, alpha).b_n / dist.scale

    def largest(x):
        idx = np.argmax(np.abs(x), axis=1)
        return x[np.arange(x.shape[0]), idx] / b_unit

    v = _run_chunks(dist, n, replicates, seed, largest, threads, chunk_size)
    v = v[np.abs(v) > alpha]
    total = np.zeros_like(grid)
    for value in v:
        total += _kernel('student', grid, float(value))
    logger.info(f"Extreme term for {dist.name} n={n}: {v.size} of {replicates} replicates beyond alpha b_n")
    return CurveOnGrid('extreme_term', dist.name, n, grid, total / replicates, alpha=alpha)
