"""
Resolution of the effective command configuration.

Values are layered: ``settings.FAKEGUARD`` first, then the ``--config``
JSON file, then command-line flags.
"""

import copy
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from django.conf import settings

from core.exceptions import ConfigurationError
from deepnn.models import TrainParams
from pipeline.models import VARIANT_KEYS, ExperimentConfig
from sofm.models import DECAY_LINEAR, SofmParams
from taskgen.geo import bounding_box_around
from taskgen.models import GenerationConfig
from .serializers import OUTPUT_FORMATS, VARIANT_ALL, ExperimentConfigSerializer, first_error

SECTIONS = ('generation', 'split', 'features', 'sofm', 'training')

# command-line option -> (section, key); a section of None is top level
FLAG_TARGETS = {
    'seed': (None, 'seed'),
    'out_dir': (None, 'out_dir'),
    'output_format': (None, 'format'),
    'workers': (None, 'workers'),
    'runs': (None, 'runs'),
    'dataset': (None, 'dataset'),
    'variant': (None, 'variant'),
    'total': ('generation', 'total_tasks'),
    'fake_fraction': ('generation', 'fake_fraction'),
    'days': ('generation', 'num_days'),
    'selection': ('features', 'selection'),
}


def settings_defaults():
    defaults = settings.FAKEGUARD
    values = {
        'seed': defaults['SEED'],
        'out_dir': defaults['OUT_DIR'],
        'format': OUTPUT_FORMATS[0],
        'workers': defaults['WORKERS'],
        'runs': defaults['RUNS'],
        'dataset': None,
        'variant': VARIANT_ALL,
    }
    for section in SECTIONS:
        values[section] = copy.deepcopy(dict(defaults[section.upper()]))
    return values


def load_config_file(path):
    """Validated contents of a --config JSON file."""
    with open(path, encoding='utf-8') as stream:
        text = stream.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}.",
                                 details={'path': str(path)}) from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: the configuration must be a JSON object.",
                                 details={'path': str(path)})

    serializer = ExperimentConfigSerializer(data=data)
    if not serializer.is_valid():
        name, message = first_error(serializer.errors)
        raise ConfigurationError(f"{path}: {name}: {message}",
                                 details={'path': str(path), 'field': name})
    return json.loads(json.dumps(serializer.validated_data))


def parse_feature_list(text):
    """'4,5,8,6' -> [4, 5, 8, 6]."""
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--features expects comma-separated integers, got {text!r}.",
                                 details={'field': 'features'}) from exc


def parse_grid(text):
    """'4x4' -> (4, 4)."""
    rows, sep, cols = text.lower().partition('x')
    try:
        if not sep:
            raise ValueError(text)
        return int(rows), int(cols)
    except ValueError as exc:
        raise ConfigurationError(f"--sofm-grid expects RxC, got {text!r}.",
                                 details={'field': 'sofm_grid'}) from exc


def merge(values, overrides):
    for key, value in overrides.items():
        if key in SECTIONS:
            values[key].update(value)
        else:
            values[key] = value
    return values


def flag_overrides(options):
    overrides = {section: {} for section in SECTIONS}
    for option, (section, key) in FLAG_TARGETS.items():
        value = options.get(option)
        if value is None:
            continue
        if section is None:
            overrides[key] = value
        else:
            overrides[section][key] = value
    if options.get('features') is not None:
        overrides['features']['indices'] = parse_feature_list(options['features'])
    if options.get('sofm_grid') is not None:
        overrides['sofm']['rows'], overrides['sofm']['cols'] = parse_grid(options['sofm_grid'])
    return overrides


@dataclass
class CliConfig:
    """Effective configuration of one command invocation."""
    command: str
    seed: int
    out_dir: str
    output_format: str = OUTPUT_FORMATS[0]
    workers: int = 1
    runs: int = 10
    dataset_path: Optional[str] = None
    variant: str = VARIANT_ALL
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    @classmethod
    def resolve(cls, command, options):
        values = settings_defaults()
        if options.get('config_path'):
            merge(values, load_config_file(options['config_path']))
        merge(values, flag_overrides(options))
        if values['format'] not in OUTPUT_FORMATS:
            raise ConfigurationError(f"format must be one of {OUTPUT_FORMATS}.",
                                     details={'field': 'format'})
        return cls(
            command=command,
            seed=values['seed'],
            out_dir=values['out_dir'],
            output_format=values['format'],
            workers=values['workers'],
            runs=values['runs'],
            dataset_path=values['dataset'],
            variant=values['variant'],
            sections={section: values[section] for section in SECTIONS},
        )

    @property
    def variants(self) -> Tuple[str, ...]:
        if self.variant == VARIANT_ALL:
            return tuple(VARIANT_KEYS.values())
        if self.variant not in VARIANT_KEYS:
            raise ConfigurationError(
                f"variant must be one of {(VARIANT_ALL, *VARIANT_KEYS)}, got {self.variant!r}.",
                details={'field': 'variant'})
        return (VARIANT_KEYS[self.variant],)

    def generation_config(self):
        generation = self.sections['generation']
        center_lat, center_lon = generation['center']
        return GenerationConfig(
            total_tasks=generation['total_tasks'],
            fake_fraction=generation['fake_fraction'],
            num_days=generation['num_days'],
            bounding_box=bounding_box_around(center_lat, center_lon, generation['half_side_m']),
            grid_cell_m=generation['grid_cell_m'],
            rng_seed=self.seed,
        )

    def experiment_config(self):
        generation = self.sections['generation']
        features = self.sections['features']
        sofm = self.sections['sofm']
        training = self.sections['training']
        indices = features.get('indices')
        return ExperimentConfig(
            seed=self.seed,
            generation=self.generation_config(),
            attack_zone_count=generation['attack_zone_count'],
            attack_zone_radius_m=generation['attack_zone_radius_m'],
            train_fraction=self.sections['split']['train_fraction'],
            feature_indices=tuple(indices) if indices is not None else None,
            top_k=features['top_k'],
            relieff_k=features['relieff_k'],
            relieff_samples=features.get('relieff_samples'),
            selection=features['selection'],
            sofm_rows=sofm['rows'],
            sofm_cols=sofm['cols'],
            sofm_params=SofmParams(
                epochs=sofm['epochs'],
                alpha0=sofm['alpha0'],
                sigma0=sofm['sigma0'],
                alpha_min=sofm['alpha_min'],
                sigma_min=sofm['sigma_min'],
                decay=sofm.get('decay', DECAY_LINEAR),
            ),
            purity_threshold=sofm['purity_threshold'],
            train_params=TrainParams(
                epochs=training['epochs'],
                batch_size=training['batch_size'],
                learning_rate=training['learning_rate'],
                momentum=training['momentum'],
                patience=training['patience'],
            ),
            hidden_layers=tuple(training['hidden_layers']),
            threshold=training['threshold'],
            n_runs=self.runs,
            workers=self.workers,
            variants=self.variants,
            dataset_path=self.dataset_path,
        )
