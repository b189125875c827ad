"""
Run an experiment manifest end to end.
Defaults to the full catalog suite in manifests/default_suite.json.
"""

import sys
import os

# Add the parent directory to the path so we can import from tstat
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from tstat.runner import run_manifest
from tstat.utils import setup_logging

# Set up logging
logger = setup_logging('suite')

DEFAULT_MANIFEST = os.path.join(os.path.dirname(__file__), '..', 'manifests', 'default_suite.json')

if __name__ == "__main__":
    manifest = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_MANIFEST
    output_dir = sys.argv[2] if len(sys.argv) > 2 else None
    try:
        print(f"Running manifest {manifest}...")
        code, paths = run_manifest(manifest, output_dir)
        for path in paths:
            print(f"  wrote {path}")
        sys.exit(code)
    except KeyboardInterrupt:
        logger.info("Suite interrupted by user")
        sys.exit(130)
