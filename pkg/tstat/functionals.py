"""
Truncation scalars: b_n, delta_n and its four components, and the
alpha-truncated quantities nu, tau^2, B_n^2, rho_n and u_nj.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import NumericalError, ValidationError

logger = logging.getLogger(__name__)

BN_REL_TOL = 1e-13
# consecutive doublings with h < 1 before the upward scan stops
SCAN_PERSISTENCE = 8
MAX_SCAN_STEPS = 2000
POSTCHECK_POINTS = 16
MAX_POSTCHECK_ROUNDS = 20
# h evaluated at a structural point may land an ulp or two below an exact 1
CANDIDATE_SLACK = 1e-12


def check_n(n, minimum=1):
    if isinstance(n, bool) or int(n) != n or int(n) < minimum:
        raise ValidationError('n', f"must be an integer >= {minimum}, got {n}")
    return int(n)


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError('alpha', f"must lie in (0, 1], got {alpha}")
    return alpha


@dataclass(frozen=True)
class TruncationFunctionals:
    """Truncation scalars for one (distribution, n, alpha) triple."""

    dist_name: str
    n: int
    alpha: float
    b_n: float
    delta_n: float
    delta_components: Tuple[float, float, float, float]
    nu: float
    tau2: float
    sigma_n2: float
    B_n2: float
    rho_n: float
    u: Tuple[float, float, float, float]
    gamma: Optional[float] = None

    @property
    def B_n(self):
        return math.sqrt(self.B_n2)

    def as_dict(self):
        row = asdict(self)
        d1, d2, d3, d4 = row.pop('delta_components')
        u1, u2, u3, u4 = row.pop('u')
        row.update({'d1': d1, 'd2': d2, 'd3': d3, 'd4': d4,
                    'u1': u1, 'u2': u2, 'u3': u3, 'u4': u4})
        return row


def _h(dist, n, x):
    return n * dist.truncated_moment(2, x) / (x * x)


def _candidates(dist, n):
    """Structural points where {h >= 1} may shrink to a sliver: atoms, kinks, support ends, sqrt(n E X^2)."""
    points = set()
    if hasattr(dist, 'scaled_atoms'):
        points.update(abs(float(a)) for a in dist.scaled_atoms())
    points.update(abs(p) for p in dist.breakpoints)
    lo, hi = dist.support
    reach = max(abs(lo), abs(hi))
    if math.isfinite(reach):
        points.add(reach)
        if dist.has_finite_variance:
            points.add(math.sqrt(n * dist.truncated_moment(2, reach)))
    return sorted((p for p in points if p > 0), reverse=True)


def _first_miss(dist, n, x):
    for _ in range(64):
        x *= 2.0
        if _h(dist, n, x) < 1.0:
            return x
    raise NumericalError(f"h(x) >= 1 on every doubling above {x:.6g} for {dist.name} at n={n}")


def compute_bn(dist, n):
    """
    b_n = sup{x : n x^-2 E[X^2 I(|X| <= x)] >= 1}.

    The doubling lattice anchored at the law's scale is scanned upward until
    h stays below 1 for several doublings (downward by halving when nothing
    is found above the anchor). When the lattice misses {h >= 1} entirely,
    the law's atoms, breakpoints, support ends and sqrt(n E X^2) are tried,
    largest first. The last hit is bisected against the next miss, and the
    root is accepted only once h < 1 on a geometric grid between the two.
    """
    n = check_n(n)
    anchor = dist.scale

    last_hit = None
    above = None
    misses = 0
    x = anchor
    for _ in range(MAX_SCAN_STEPS):
        if _h(dist, n, x) >= 1.0:
            last_hit, above, misses = x, None, 0
        else:
            if above is None:
                above = x
            misses += 1
            if misses >= SCAN_PERSISTENCE and last_hit is not None:
                break
            if misses >= SCAN_PERSISTENCE and x > anchor * 2.0 ** 64:
                break
        x *= 2.0

    if last_hit is None:
        x = anchor / 2.0
        for _ in range(64):
            if _h(dist, n, x) >= 1.0:
                last_hit, above = x, 2.0 * x
                break
            x /= 2.0

    if last_hit is None:
        for c in _candidates(dist, n):
            if _h(dist, n, c) >= 1.0 - CANDIDATE_SLACK:
                last_hit, above = c, _first_miss(dist, n, c)
                logger.debug(f"b_n for {dist.name} at n={n} located from structural point {c:.12g}")
                break

    if last_hit is None:
        logger.error(f"b_n search failed for {dist.name} at n={n}: h(x) < 1 on the whole scan")
        raise NumericalError(f"no x with n x^-2 E[X^2 I(|X| <= x)] >= 1 for {dist.name} at n={n}")

    lo, hi = last_hit, above
    for _ in range(MAX_POSTCHECK_ROUNDS):
        lo = _bisect(dist, n, lo, hi)
        grid = np.geomspace(lo, hi, POSTCHECK_POINTS + 2)[1:-1]
        hits = [g for g in grid if g > lo and _h(dist, n, g) >= 1.0]
        if not hits:
            break
        # an upper crossing was skipped: restart from the highest hit
        lo = max(hits)
        hi = min([g for g in grid if g > lo] + [hi])
        logger.warning(f"h(x) re-crossed 1 above a candidate root for {dist.name}, n={n}; restarting at {lo:.6g}")
    else:
        raise NumericalError(f"b_n post-check did not settle for {dist.name} at n={n}")

    logger.debug(f"b_n for {dist.name} at n={n}: {lo:.12g}")
    return lo


def _bisect(dist, n, lo, hi):
    """Shrink [lo, hi] with h(lo) >= 1 > h(hi) to relative width BN_REL_TOL."""
    for _ in range(400):
        if hi - lo <= BN_REL_TOL * lo:
            break
        mid = 0.5 * (lo + hi)
        if _h(dist, n, mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return lo


def compute_functionals(dist, n, alpha=0.25):
    """Every truncation scalar for (dist, n, alpha)."""
    n = check_n(n)
    alpha = check_alpha(alpha)
    b = compute_bn(dist, n)

    m = [dist.truncated_moment(j, b) for j in range(5)]
    d1 = n * dist.tail(b)
    d2 = n / b * abs(m[1])
    d3 = n / b ** 3 * abs(m[3])
    d4 = n / b ** 4 * m[4]
    delta = d1 + d2 + d3 + d4

    cut = alpha * b
    nu = dist.truncated_moment(1, cut)
    tau2 = dist.truncated_moment(2, cut)
    B_n2 = n * tau2
    rho = n * dist.tail(cut)
    if tau2 > 0:
        B = math.sqrt(B_n2)
        u = tuple(n * dist.truncated_moment(j, cut) / B ** j for j in range(1, 5))
    else:
        # no mass inside the truncation radius: every u_nj is an empty expectation
        logger.warning(f"{dist.name}: no mass in |X| <= alpha*b_n = {cut:.6g} at n={n}; u_nj set to 0")
        u = (0.0, 0.0, 0.0, 0.0)

    return TruncationFunctionals(
        dist_name=dist.name,
        n=n,
        alpha=alpha,
        b_n=b,
        delta_n=delta,
        delta_components=(d1, d2, d3, d4),
        nu=nu,
        tau2=tau2,
        sigma_n2=m[2],
        B_n2=B_n2,
        rho_n=rho,
        u=u,
        gamma=dist.gamma,
    )


def functionals_table(dist, n_list, alpha=0.25):
    """One row per n, as a DataFrame."""
    rows = []
    for n in n_list:
        f = compute_functionals(dist, n, alpha)
        logger.info(f"{dist.name} n={f.n}: b_n={f.b_n:.6g} delta_n={f.delta_n:.6g}")
        rows.append(f.as_dict())
    return pd.DataFrame(rows)
