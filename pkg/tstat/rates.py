"""
Rate reports: sup discrepancies of the simulated or enumerated law of T
against Phi and Phi + L_n, next to delta_n and the three-point sups.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .config import Config
from .exceptions import ValidationError
from .functionals import check_alpha, check_n, compute_functionals
from .leading_terms import check_grid, default_grid, eval_Ln, eval_Ln1, eval_Ln2, eval_Mn_split
from .normal import norm_cdf
from .simulation import (MAX_EXACT_ATOMS, MAX_EXACT_N, exact_S_distribution, exact_T_distribution,
                         simulate_S, simulate_T, simulate_truncated_T)

logger = logging.getLogger(__name__)

DKW_BETA = 1e-3

ROW_COLUMNS = [
    'n', 'source', 'delta_n', 'sup_plain', 'sup_corrected', 'sup_Ln', 'three_point_sup',
    'two_point_sup_plain', 'ratio_25', 'ratio_3pt', 'mc_stderr_band',
]


def dkw_half_width(replicates, beta=DKW_BETA):
    """sqrt(log(2 / beta) / (2 N)): the uniform band for an empirical CDF from N draws."""
    return math.sqrt(math.log(2.0 / beta) / (2.0 * replicates))


def check_points(x0, x1):
    config = Config()
    x0 = config.DEFAULT_X0 if x0 is None else float(x0)
    x1 = config.DEFAULT_X1 if x1 is None else float(x1)
    if not x0 > math.sqrt(3.0):
        raise ValidationError('x0', f"must exceed sqrt(3), got {x0}")
    if x1 in (-x0, x0):
        raise ValidationError('x1', f"must differ from -x0 and x0, got {x1}")
    return x0, x1


def _report_grid(grid, x0, x1):
    points = (-x0, x0, x1)
    if grid is None:
        return default_grid(extra=points)
    return np.unique(np.concatenate((check_grid(grid), points)))


def _enumerable(dist, n):
    return dist.kind == 'discrete' and dist.atoms.size <= MAX_EXACT_ATOMS and n <= MAX_EXACT_N


@dataclass
class RateReport:
    """Per-n rows of one rate experiment."""

    dist_name: str
    variant: str
    x0: float
    x1: float
    alpha: float
    rows: list = field(default_factory=list)
    correction: str = 'L_n'

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=ROW_COLUMNS)

    def column(self, name):
        return [row[name] for row in self.rows]

    def summary(self):
        """Suite-level extremes of the diagnostic ratios."""
        if not self.rows:
            return {'dist': self.dist_name, 'variant': self.variant, 'rows': 0}
        magnitude = [row['sup_Ln'] / row['delta_n'] for row in self.rows]
        return {
            'dist': self.dist_name,
            'variant': self.variant,
            'correction': self.correction,
            'rows': len(self.rows),
            'min_ratio_25': min(self.column('ratio_25')),
            'max_ratio_25': max(self.column('ratio_25')),
            'min_ratio_3pt': min(self.column('ratio_3pt')),
            'max_ratio_3pt': max(self.column('ratio_3pt')),
            'min_magnitude': min(magnitude),
            'max_magnitude': max(magnitude),
        }


def _row(n, source, delta, grid, empirical_cdf, correction, band, x0, x1):
    plain = empirical_cdf - norm_cdf(grid)
    corrected = plain - correction.values
    sup_corr = correction.sup_abs()
    three = max(abs(correction.value_at(p)) for p in (-x0, x0, x1))
    idx = np.searchsorted(grid, [-x0, x0])
    return {
        'n': n,
        'source': source,
        'delta_n': delta,
        'sup_plain': float(np.max(np.abs(plain))),
        'sup_corrected': float(np.max(np.abs(corrected))),
        'sup_Ln': sup_corr,
        'three_point_sup': three,
        'two_point_sup_plain': float(np.max(np.abs(plain[idx]))),
        'ratio_25': (float(np.max(np.abs(plain))) + n ** -0.5) / (delta + n ** -0.5),
        'ratio_3pt': three / sup_corr if sup_corr > 0 else 1.0,
        'mc_stderr_band': band,
    }


def build_rate_report(dist, n_list, replicates, seed, x0=None, x1=None, alpha=None,
                      variant='divisor_n', grid=None, tol=None, exact=True, threads=None):
    """
    One row per n. Discrete laws small enough for enumeration use the exact
    law of T (zero sampling error) unless exact is False.
    """
    x0, x1 = check_points(x0, x1)
    alpha = check_alpha(Config().DEFAULT_ALPHA if alpha is None else alpha)
    grid = _report_grid(grid, x0, x1)
    report = RateReport(dist.name, variant, x0, x1, alpha)
    for n in sorted(check_n(n, minimum=2) for n in n_list):
        f = compute_functionals(dist, n, alpha)
        if exact and _enumerable(dist, n):
            emp = exact_T_distribution(dist, n, variant)
            band = 0.0
        else:
            emp = simulate_T(dist, n, replicates, seed, variant, threads=threads)
            band = dkw_half_width(emp.replicates)
        ln = eval_Ln(dist, n, grid, tol)
        row = _row(n, emp.source, f.delta_n, grid, emp.cdf(grid), ln, band, x0, x1)
        logger.info(f"Rate row {dist.name} n={n}: sup_plain={row['sup_plain']:.4g} "
                    f"sup_corrected={row['sup_corrected']:.4g} delta_n={f.delta_n:.4g}")
        report.rows.append(row)
    return report


def three_point_equivalence(dist, n_list, x0=None, x1=None, grid=None, tol=None):
    """max(|L_n(-x0)|, |L_n(x0)|, |L_n(x1)|) / sup |L_n| for each n."""
    x0, x1 = check_points(x0, x1)
    grid = _report_grid(grid, x0, x1)
    ratios = []
    for n in n_list:
        ln = eval_Ln(dist, n, grid, tol)
        three = max(abs(ln.value_at(p)) for p in (-x0, x0, x1))
        ratios.append(three / ln.sup_abs())
    return ratios


def nonstudentized_report(dist, n_list, replicates, seed, normalization='b_n', x0=None, x1=None,
                          grid=None, tol=None, exact=True, threads=None):
    """
    Rows for S1 = sum X / b_n corrected by L_n1, or S2 = sum X / (sqrt(n) sigma_n)
    corrected by L_n2. Two-atom laws use the binomial law of the sum at any n.
    """
    x0, x1 = check_points(x0, x1)
    grid = _report_grid(grid, x0, x1)
    report = RateReport(dist.name, normalization, x0, x1, 1.0,
                        correction='L_n1' if normalization == 'b_n' else 'L_n2')
    for n in sorted(check_n(n) for n in n_list):
        f = compute_functionals(dist, n, 1.0)
        two_atoms = dist.kind == 'discrete' and dist.atoms.size == 2
        if exact and (two_atoms or _enumerable(dist, n)):
            emp = exact_S_distribution(dist, n, normalization)
            band = 0.0
        else:
            emp = simulate_S(dist, n, replicates, seed, normalization, threads=threads)
            band = dkw_half_width(emp.replicates)
        term = eval_Ln1(dist, n, grid, tol) if normalization == 'b_n' else eval_Ln2(dist, n, grid, tol)
        report.rows.append(_row(n, emp.source, f.delta_n, grid, emp.cdf(grid), term, band, x0, x1))
    return report


def split_report(dist, n, alpha, replicates, seed, grid=None, tol=None, threads=None):
    """
    Compare the law of T with the law of the truncated statistic plus M_n1.
    The gap is expected to be small next to rho_n.
    """
    alpha = check_alpha(alpha)
    grid = default_grid() if grid is None else check_grid(grid)
    f = compute_functionals(dist, n, alpha)
    full = simulate_T(dist, n, replicates, seed, threads=threads)
    truncated = simulate_truncated_T(dist, n, alpha, replicates, seed, threads=threads)
    m1, _ = eval_Mn_split(dist, n, alpha, grid, tol)
    f_full = full.cdf(grid)
    f_trunc = truncated.cdf(grid)
    return {
        'dist': dist.name,
        'n': f.n,
        'alpha': alpha,
        'rho_n': f.rho_n,
        'delta_n': f.delta_n,
        'sup_truncation_gap': float(np.max(np.abs(f_full - f_trunc))),
        'sup_split_gap': float(np.max(np.abs(f_full - f_trunc - m1.values))),
        'sup_Mn1': m1.sup_abs(),
        'mc_stderr_band': 2 * dkw_half_width(replicates),
    }


def magnitude_band(dist, n_list, grid=None, tol=None):
    """sup |L_n| / delta_n per n, with the band it spans."""
    ratios = {}
    for n in n_list:
        ln = eval_Ln(dist, n, grid, tol)
        delta = compute_functionals(dist, n, 1.0).delta_n
        ratios[int(n)] = ln.sup_abs() / delta
    low, high = min(ratios.values()), max(ratios.values())
    return {'ratios': ratios, 'min': low, 'max': high, 'spread': high / low}

