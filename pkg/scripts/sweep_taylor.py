"""
Sweep the quartic expansion error of Phi(x sqrt(1+u^2) - u) over
x in [-6, 6] and u in [-1, 1] and report the empirical constant C
in |error| <= C |u|^5.
"""

import sys
import os

import numpy as np
import pandas as pd

# Add the parent directory to the path so we can import from tstat
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tstat.leading_terms import taylor5_check, taylor5_sweep
from tstat.utils import setup_logging

# Set up logging
logger = setup_logging('taylor_sweep')


def sweep(points=200, out=None):
    x = np.linspace(-6.0, 6.0, points)
    u = np.linspace(-1.0, 1.0, points)
    errors, ratios, max_ratio = taylor5_sweep(x, u)
    i, j = np.unravel_index(np.argmax(ratios), ratios.shape)
    print(f"max |error| / |u|^5 = {max_ratio:.12g} at x = {x[i]:.4f}, u = {u[j]:.4f}")

    # behaviour as u -> 0 at the x of the maximum
    for small in (1e-1, 1e-2, 1e-3):
        _, ratio = taylor5_check(x[i], small)
        print(f"  u = {small:g}: ratio {ratio:.12g}")

    if out:
        xx, uu = np.meshgrid(x, u, indexing='ij')
        frame = pd.DataFrame({'x': xx.ravel(), 'u': uu.ravel(), 'error': errors.ravel(), 'ratio': ratios.ravel()})
        frame.to_csv(out, index=False, float_format='%.17g')
        print(f"Sweep written to {out}")
    return max_ratio


if __name__ == "__main__":
    try:
        sweep(out=sys.argv[1] if len(sys.argv) > 1 else None)
    except Exception as e:
        logger.error(f"Sweep failed: {str(e)}", exc_info=True)
        sys.exit(1)
