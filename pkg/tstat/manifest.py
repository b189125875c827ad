"""
Experiment manifests: the JSON description of one reproducible run.

Example::

    {
        "schema_version": 1,
        "distributions": [{"name": "rademacher", "params": {}}],
        "n_list": [6, 8, 10],
        "alpha": 0.25,
        "replicates": 100000,
        "seed": 20240101,
        "variant": "divisor_n",
        "grid": {"min": -10, "max": 10, "step": 0.005},
        "x0": 2.0,
        "x1": 0.0,
        "steps": ["functionals", "curves", "rates"],
        "outputs": {"directory": "results/rademacher"}
    }
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from .config import Config
from .distributions import make_distribution, make_rng
from .exceptions import ValidationError
from .simulation import VARIANTS
from .utils import manifest_hash

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STEPS = ('functionals', 'curves', 'rates')
KNOWN_KEYS = {
    'schema_version', 'distribution', 'distributions', 'n_list', 'alpha', 'replicates', 'seed',
    'variant', 'grid', 'x0', 'x1', 'tol', 'steps', 'outputs',
}


def _positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value or value < minimum:
        raise ValidationError(name, f"must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(name, f"must be a finite number, got {value!r}")
    return float(value)


@dataclass
class ExperimentManifest:
    """A validated experiment description."""

    distributions: list
    n_list: list
    seed: Optional[int] = None
    alpha: float = 0.25
    replicates: int = 100000
    variant: str = 'divisor_n'
    grid: dict = field(default_factory=lambda: {'min': -10.0, 'max': 10.0, 'step': 0.005})
    x0: float = 2.0
    x1: float = 0.0
    tol: Optional[float] = None
    steps: list = field(default_factory=lambda: list(STEPS))
    outputs: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ValidationError('manifest', "must be a JSON object")
        unknown = sorted(set(data) - KNOWN_KEYS)
        if unknown:
            raise ValidationError(unknown[0], "unknown manifest field")

        config = Config()
        if 'distributions' in data:
            distributions = data['distributions']
        elif 'distribution' in data:
            distributions = [data['distribution']]
        else:
            raise ValidationError('distributions', "required")

        manifest = cls(
            distributions=distributions,
            n_list=data.get('n_list'),
            seed=data.get('seed'),
            alpha=data.get('alpha', config.DEFAULT_ALPHA),
            replicates=data.get('replicates', 100000),
            variant=data.get('variant', 'divisor_n'),
            grid=data.get('grid', {'min': config.GRID_MIN, 'max': config.GRID_MAX, 'step': config.GRID_STEP}),
            x0=data.get('x0', config.DEFAULT_X0),
            x1=data.get('x1', config.DEFAULT_X1),
            tol=data.get('tol'),
            steps=data.get('steps', list(STEPS)),
            outputs=data.get('outputs', {}),
            schema_version=data.get('schema_version', SCHEMA_VERSION),
        )
        manifest.validate()
        return manifest

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ValidationError('manifest', f"file not found: {path}")
        except json.JSONDecodeError as e:
            raise ValidationError('manifest', f"invalid JSON in {path}: {e}")
        return cls.from_dict(data)

    def to_dict(self):
        return {
            'schema_version': self.schema_version,
            'distributions': [dict(d) for d in self.distributions],
            'n_list': list(self.n_list),
            'alpha': self.alpha,
            'replicates': self.replicates,
            'seed': self.seed,
            'variant': self.variant,
            'grid': dict(self.grid),
            'x0': self.x0,
            'x1': self.x1,
            'tol': self.tol,
            'steps': list(self.steps),
            'outputs': dict(self.outputs),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self):
        return manifest_hash(self.to_dict())

    def build_distributions(self):
        laws = []
        for i, entry in enumerate(self.distributions):
            try:
                laws.append(make_distribution(entry['name'], entry.get('params')))
            except ValidationError as e:
                name = 'name' if e.field == 'distribution' else e.field
                raise ValidationError(f"distributions[{i}].{name}", e.message)
        return laws

    def validate(self):
        """Check every field; raises ValidationError naming the first bad one."""
        if self.schema_version != SCHEMA_VERSION:
            raise ValidationError('schema_version', f"unsupported version {self.schema_version!r}")

        if not isinstance(self.distributions, list) or not self.distributions:
            raise ValidationError('distributions', "must be a non-empty list")
        for i, entry in enumerate(self.distributions):
            if not isinstance(entry, dict) or not isinstance(entry.get('name'), str):
                raise ValidationError(f"distributions[{i}].name", "required")
            entry.setdefault('params', {})
            if not isinstance(entry['params'], dict):
                raise ValidationError(f"distributions[{i}].params", "must be an object")
            for key, value in entry['params'].items():
                _real(value, f"distributions[{i}].params.{key}")
        self.build_distributions()

        if not isinstance(self.n_list, list) or not self.n_list:
            raise ValidationError('n_list', "must be a non-empty list")
        self.n_list = [_positive_int(n, f"n_list[{i}]", minimum=2) for i, n in enumerate(self.n_list)]

        self.alpha = _real(self.alpha, 'alpha')
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError('alpha', f"must lie in (0, 1], got {self.alpha}")
        self.replicates = _positive_int(self.replicates, 'replicates')

        if self.variant not in VARIANTS:
            raise ValidationError('variant', f"must be one of {', '.join(VARIANTS)}, got {self.variant!r}")

        if not isinstance(self.steps, list) or not self.steps:
            raise ValidationError('steps', "must be a non-empty list")
        for step in self.steps:
            if step not in STEPS:
                raise ValidationError('steps', f"unknown step {step!r}")
        if 'rates' in self.steps and self.seed is None:
            raise ValidationError('seed', "required for Monte Carlo steps")
        if self.seed is not None:
            make_rng(self.seed)

        if not isinstance(self.grid, dict):
            raise ValidationError('grid', "must be an object with min, max and step")
        for key in ('min', 'max', 'step'):
            if key not in self.grid:
                raise ValidationError(f"grid.{key}", "required")
            self.grid[key] = _real(self.grid[key], f"grid.{key}")
        if not self.grid['min'] < self.grid['max']:
            raise ValidationError('grid.min', "must be below grid.max")
        if not self.grid['step'] > 0:
            raise ValidationError('grid.step', "must be positive")

        self.x0 = _real(self.x0, 'x0')
        self.x1 = _real(self.x1, 'x1')
        if not self.x0 > math.sqrt(3.0):
            raise ValidationError('x0', f"must exceed sqrt(3), got {self.x0}")
        if self.x1 in (-self.x0, self.x0):
            raise ValidationError('x1', "must differ from -x0 and x0")

        if self.tol is not None:
            self.tol = _real(self.tol, 'tol')
            if not 0.0 < self.tol < 1.0:
                raise ValidationError('tol', f"must lie in (0, 1), got {self.tol}")

        if not isinstance(self.outputs, dict):
            raise ValidationError('outputs', "must be an object")
        directory = self.outputs.get('directory')
        if directory is not None and not isinstance(directory, str):
            raise ValidationError('outputs.directory', "must be a string")
        return True
