import logging
import os

import pandas as pd

from .config import Config
from .exceptions import TstatError
from .functionals import compute_functionals
from .leading_terms import (default_grid, edgeworth_plain, edgeworth_student, eval_Ln, eval_Ln1, eval_Ln2,
                            eval_Mn_split, eval_Qn1)
from .manifest import ExperimentManifest
from .rates import build_rate_report
from .utils import metadata_line, save_error_record, save_json, write_table

logger = logging.getLogger(__name__)


class ExperimentRunner:
    def __init__(self, manifest, output_dir=None, threads=None):
        self.manifest = manifest
        self.output_dir = output_dir or manifest.outputs.get('directory') or Config().OUTPUT_DIR
        self.threads = threads
        self.digest = manifest.digest()
        self.written = []
        self.summaries = []
        self.grid = default_grid(manifest.grid['min'], manifest.grid['max'], manifest.grid['step'],
                                 extra=(-manifest.x0, manifest.x0, manifest.x1))

    def header(self, kind, **extra):
        return metadata_line(kind, self.digest, self.manifest.seed, **extra)

    def write(self, name, frame, kind, **extra):
        path = os.path.join(self.output_dir, name)
        write_table(path, frame, self.header(kind, **extra))
        self.written.append(path)
        logger.info(f"Wrote {path} ({len(frame)} rows)")
        return path

    def run_functionals(self, dist):
        """One row per n with every truncation scalar."""
        rows = [compute_functionals(dist, n, self.manifest.alpha).as_dict() for n in self.manifest.n_list]
        return self.write(f"{dist.name}_functionals.csv", pd.DataFrame(rows), 'functionals', dist=dist.name)

    def run_curves(self, dist):
        """All approximation curves in long format: term, n, alpha, x, value."""
        tol = self.manifest.tol
        frames = []
        for n in self.manifest.n_list:
            f = compute_functionals(dist, n, self.manifest.alpha)
            m1, m2 = eval_Mn_split(dist, n, self.manifest.alpha, self.grid, tol)
            curves = [
                eval_Ln(dist, n, self.grid, tol), m1, m2, eval_Qn1(f, self.grid),
                eval_Ln1(dist, n, self.grid, tol), eval_Ln2(dist, n, self.grid, tol),
            ]
            if dist.gamma is not None:
                curves.append(edgeworth_student(dist.gamma, n, self.grid))
                curves.append(edgeworth_plain(dist.gamma, n, self.grid))
            for curve in curves:
                frame = curve.to_frame()
                frame.insert(0, 'alpha', curve.alpha if curve.alpha is not None else float('nan'))
                frame.insert(0, 'n', n)
                frame.insert(0, 'term', curve.term_kind)
                frames.append(frame)
        return self.write(f"{dist.name}_curves.csv", pd.concat(frames, ignore_index=True), 'curves',
                          dist=dist.name)

    def run_rates(self, dist):
        m = self.manifest
        report = build_rate_report(dist, m.n_list, m.replicates, m.seed, m.x0, m.x1, m.alpha, m.variant,
                                   self.grid, m.tol, threads=self.threads)
        self.summaries.append(report.summary())
        return self.write(f"{dist.name}_rates.csv", report.to_frame(), 'rates', dist=dist.name,
                          variant=m.variant)

    def run(self):
        """Execute every step for every distribution; returns the written paths."""
        logger.info(f"Running manifest {self.digest[:12]} into {self.output_dir}")
        steps = {
            'functionals': self.run_functionals,
            'curves': self.run_curves,
            'rates': self.run_rates,
        }
        for dist in self.manifest.build_distributions():
            for step in self.manifest.steps:
                logger.info(f"{step} for {dist.name}")
                steps[step](dist)

        summary = {
            'status': 'success',
            'manifest_hash': self.digest,
            'seed': self.manifest.seed,
            'outputs': [os.path.basename(p) for p in self.written],
            'rates': self.summaries,
        }
        if self.summaries:
            summary['suite_min_ratio_3pt'] = min(s['min_ratio_3pt'] for s in self.summaries)
            summary['suite_max_ratio_25'] = max(s['max_ratio_25'] for s in self.summaries)
            summary['suite_min_ratio_25'] = min(s['min_ratio_25'] for s in self.summaries)
        path = os.path.join(self.output_dir, 'summary.json')
        save_json(path, summary)
        self.written.append(path)
        return self.written


def run_manifest(manifest, output_dir=None, threads=None):
    """
    Run a manifest (object, dict or JSON path) and return (exit_code, paths).

    Library errors are turned into the error record and its exit code:
    1 for validation failures, 2 for numerical ones.
    """
    try:
        if isinstance(manifest, dict):
            manifest = ExperimentManifest.from_dict(manifest)
        elif not isinstance(manifest, ExperimentManifest):
            manifest = ExperimentManifest.load(manifest)
        runner = ExperimentRunner(manifest, output_dir, threads)
        return 0, runner.run()
    except TstatError as e:
        logger.error(f"Manifest run failed: {e}")
        directory = output_dir
        if directory is None and isinstance(manifest, ExperimentManifest):
            directory = manifest.outputs.get('directory')
        save_error_record(e.to_record(), directory)
        return e.exit_code, []
