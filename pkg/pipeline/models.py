from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.exceptions import ConfigurationError
from core.validators import ConfigValidationMixin
from deepnn.models import DEFAULT_HIDDEN_LAYERS, TrainParams
from sofm.models import SofmParams
from taskgen.generator import random_attack_zones
from taskgen.models import CANDIDATE_FEATURES, GenerationConfig

VARIANT_BASELINE = 'DeepNN'
VARIANT_PREC = 'PrecDeepNN'
VARIANT_COMBINED = 'PrecDeepNNPrecL'
VARIANT_CHOICES = (
    (VARIANT_BASELINE, 'Deep network on the full data'),
    (VARIANT_PREC, 'Deep network on mixed clusters'),
    (VARIANT_COMBINED, 'Mixed-cluster network plus pre-clustered legitimate tasks'),
)

# command-line names of the variants, in report order
VARIANT_KEYS = {
    'baseline': VARIANT_BASELINE,
    'prec': VARIANT_PREC,
    'combined': VARIANT_COMBINED,
}

SELECTION_RELIEFF = 'relieff'
SELECTION_SEQUENTIAL = 'sequential'
SELECTION_CHOICES = (SELECTION_RELIEFF, SELECTION_SEQUENTIAL)

# fixed offsets from the master seed
SOFM_SEED_OFFSET = 1
RELIEFF_SEED_OFFSET = 2
ZONE_SEED_OFFSET = 3
RUN_SEED_OFFSET = 10


@dataclass(frozen=True)
class Metrics:
    """
    Confusion counts with legitimate as the positive class. Metrics whose
    denominator is zero are reported as 0 and listed in ``undefined``.
    """
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    undefined: Tuple[str, ...] = ()

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    @property
    def correct(self):
        return self.tp + self.tn

    def as_run(self, seed):
        entry = {
            'seed': int(seed),
            'tp': int(self.tp),
            'tn': int(self.tn),
            'fp': int(self.fp),
            'fn': int(self.fn),
            'accuracy': float(self.accuracy),
            'precision': float(self.precision),
            'recall': float(self.recall),
            'f1': float(self.f1),
        }
        if self.undefined:
            entry['undefined'] = list(self.undefined)
        return entry


@dataclass(frozen=True)
class EvaluationReport:
    """Per-run metrics of one variant and their aggregate."""
    variant: str
    seeds: Tuple[int, ...]
    runs: Tuple[Metrics, ...]
    mean_accuracy: float
    std_accuracy: float
    precl_leakage: int
    dataset: Dict[str, int]
    argmin_seed: Optional[int] = None
    config: Optional[Dict[str, Any]] = None

    @classmethod
    def from_runs(cls, variant, seeds, runs, precl_leakage, dataset, argmin_seed=None,
                  config=None):
        accuracies = [metrics.accuracy for metrics in runs]
        mean = sum(accuracies) / len(accuracies)
        # population standard deviation
        std = float(np.sqrt(sum((a - mean) ** 2 for a in accuracies) / len(accuracies)))
        return cls(
            variant=variant,
            seeds=tuple(int(s) for s in seeds),
            runs=tuple(runs),
            mean_accuracy=float(mean),
            std_accuracy=std,
            precl_leakage=int(precl_leakage),
            dataset=dict(dataset),
            argmin_seed=argmin_seed,
            config=config,
        )

    def accuracy_by_seed(self):
        return {seed: metrics.accuracy for seed, metrics in zip(self.seeds, self.runs)}

    def as_payload(self):
        payload = {
            'variant': self.variant,
            'runs': [metrics.as_run(seed) for seed, metrics in zip(self.seeds, self.runs)],
            'mean_accuracy': self.mean_accuracy,
            'std_accuracy': self.std_accuracy,
            'precl_leakage': self.precl_leakage,
            'dataset': {key: int(self.dataset[key]) for key in ('seed', 'train', 'test')},
            'argmin_seed': self.argmin_seed,
        }
        if self.config is not None:
            payload['config'] = self.config
        return payload


@dataclass(frozen=True)
class RunSettings:
    """How the repeated trainings of one variant are carried out."""
    seed: int = 0
    params: TrainParams = TrainParams()
    hidden_layers: Tuple[int, ...] = DEFAULT_HIDDEN_LAYERS
    threshold: float = 0.5
    workers: int = 1
    config: Optional[Dict[str, Any]] = None

    def run_seeds(self, n_runs):
        return tuple(self.seed + RUN_SEED_OFFSET + i for i in range(n_runs))


@dataclass
class VariantResult:
    """Report of one variant plus the per-run predictions and the argmin model."""
    report: EvaluationReport
    predictions: List[Any] = field(default_factory=list)
    argmin: Optional[Any] = None


@dataclass
class ExperimentResult:
    """Every intermediate product of one full experiment."""
    config: Dict[str, Any]
    dataset: Any
    train: Any
    test: Any
    ranking: Any
    scaler: Any
    selected: List[int]
    sofm_map: Any = None
    train_partition: Any = None
    test_partition: Any = None
    contingency: Optional[Tuple[np.ndarray, np.ndarray]] = None
    results: Dict[str, VariantResult] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    @property
    def reports(self):
        return {variant: result.report for variant, result in self.results.items()}


@dataclass(frozen=True)
class ExperimentConfig(ConfigValidationMixin):
    """
    Everything the full experiment needs. Attack zones are placed from the
    master seed when the generation config carries none.
    """
    seed: int = 7
    generation: GenerationConfig = GenerationConfig()
    attack_zone_count: int = 5
    attack_zone_radius_m: float = 200.0
    train_fraction: float = 0.8
    feature_indices: Optional[Tuple[int, ...]] = None
    top_k: int = 4
    relieff_k: int = 10
    relieff_samples: Optional[int] = None
    selection: str = SELECTION_RELIEFF
    sofm_rows: int = 4
    sofm_cols: int = 4
    sofm_params: SofmParams = SofmParams()
    purity_threshold: float = 1.0
    train_params: TrainParams = TrainParams()
    hidden_layers: Tuple[int, ...] = DEFAULT_HIDDEN_LAYERS
    threshold: float = 0.5
    n_runs: int = 10
    workers: int = 1
    variants: Tuple[str, ...] = (VARIANT_BASELINE, VARIANT_PREC, VARIANT_COMBINED)
    dataset_path: Optional[str] = None

    def validate(self):
        self.validate_seed(self.seed, 'seed')
        self.validate_open_fraction(self.train_fraction, 'train_fraction')
        self.validate_interval(self.threshold, 0.0, 1.0, 'threshold', low_open=True,
                               high_open=True)
        self.validate_interval(self.purity_threshold, 0.5, 1.0, 'purity_threshold',
                               low_open=True)
        for name in ('n_runs', 'workers', 'top_k', 'relieff_k', 'sofm_rows', 'sofm_cols'):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigurationError(f"{name} must be an integer >= 1, got {value!r}.",
                                         details={'field': name})
        if self.top_k > len(CANDIDATE_FEATURES):
            raise ConfigurationError(
                f"top_k must not exceed {len(CANDIDATE_FEATURES)}, got {self.top_k}.",
                details={'field': 'top_k'},
            )
        if self.selection not in SELECTION_CHOICES:
            raise ConfigurationError(f"selection must be one of {SELECTION_CHOICES}.",
                                     details={'field': 'selection'})
        if self.feature_indices is not None:
            indices = list(self.feature_indices)
            if (not indices or len(set(indices)) != len(indices)
                    or any(not 0 <= i < len(CANDIDATE_FEATURES) for i in indices)):
                raise ConfigurationError(
                    f"features must be distinct indices in 0..{len(CANDIDATE_FEATURES) - 1}.",
                    details={'field': 'features'},
                )
        known = {value for value, _ in VARIANT_CHOICES}
        if not self.variants or any(v not in known for v in self.variants):
            raise ConfigurationError(f"variants must be drawn from {sorted(known)}.",
                                     details={'field': 'variant'})
        return self

    @property
    def needs_partition(self):
        return VARIANT_PREC in self.variants or VARIANT_COMBINED in self.variants

    def effective_generation(self):
        """Generation config seeded from the master seed, with attack zones placed."""
        zones = self.generation.attack_zones
        if not zones and self.attack_zone_count > 0:
            zones = random_attack_zones(self.generation.bounding_box, self.attack_zone_count,
                                        self.attack_zone_radius_m,
                                        rng_seed=self.seed + ZONE_SEED_OFFSET)
        return replace(self.generation, rng_seed=self.seed, attack_zones=tuple(zones))

    def describe(self):
        generation = None
        if self.dataset_path is None:
            generation = self.effective_generation().describe()
        return {
            'seed': int(self.seed),
            'generation': generation,
            'dataset_path': self.dataset_path,
            'attack_zone_count': int(self.attack_zone_count),
            'attack_zone_radius_m': float(self.attack_zone_radius_m),
            'train_fraction': float(self.train_fraction),
            'features': list(self.feature_indices) if self.feature_indices is not None else None,
            'top_k': int(self.top_k),
            'relieff_k': int(self.relieff_k),
            'relieff_samples': self.relieff_samples,
            'selection': self.selection,
            'sofm_grid': [int(self.sofm_rows), int(self.sofm_cols)],
            'sofm': self.sofm_params.describe(),
            'purity_threshold': float(self.purity_threshold),
            'training': self.train_params.describe(),
            'hidden_layers': [int(h) for h in self.hidden_layers],
            'threshold': float(self.threshold),
            'runs': int(self.n_runs),
            'variants': list(self.variants),
            'seeds': {
                'dataset': int(self.seed),
                'sofm': int(self.seed + SOFM_SEED_OFFSET),
                'relieff': int(self.seed + RELIEFF_SEED_OFFSET),
                'attack_zones': int(self.seed + ZONE_SEED_OFFSET),
                'runs': [int(self.seed + RUN_SEED_OFFSET + i) for i in range(self.n_runs)],
            },
        }
