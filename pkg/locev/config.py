#!/usr/bin/env python3

import json
import os
from copy import deepcopy
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, MutableMapping, Optional, Tuple

import click
import jsonschema

from .dynamics.state import default_time_step
from .errors import ConfigError
from .util import config_hash

CONTEXT_SETTINGS = "settings"
SETTINGS_ENV = 'LOCEV_SETTINGS'
SCHEMA_VERSION = 1
MAX_SEED = 2 ** 64 - 1
SEED = click.IntRange(0, MAX_SEED)

KINDS = ('collapse', 'kick', 'master', 'trajectories', 'spdm', 'rates-sweep')

SETTINGS_DEFAULTS = {
    'dimension_cap': 20_000,
    'dense_dimension_cap': 1_000,
    'tolerances': {},
}


class Settings(MutableMapping):
    """Tool-wide settings in a JSON file; missing keys fall back to SETTINGS_DEFAULTS."""

    def __init__(self, file: Optional[str] = None) -> None:
        self.__file = file
        self.__config: Dict[str, Any] = {}
        if file is None:
            return
        try:
            with click.open_file(self.__file, 'r') as fd:
                self.__config = json.load(fd)
        except (OSError, ValueError):
            self.__config = {}
        if type(self.__config) is not dict:
            self.__config = {}

    @classmethod
    def locate(cls, file: Optional[str] = None) -> 'Settings':
        if file is None:
            file = os.environ.get(SETTINGS_ENV) or os.path.join(click.get_app_dir('locev'), 'settings.json')
        return cls(file)

    def __getitem__(self, name: str) -> Any:
        if name in self.__config:
            return deepcopy(self.__config[name])
        if name in SETTINGS_DEFAULTS:
            return deepcopy(SETTINGS_DEFAULTS[name])
        raise KeyError(name)

    def __setitem__(self, name: str, value: Any) -> None:
        self.__config[name] = deepcopy(value)
        self.save()

    def __contains__(self, name) -> bool:
        return name in self.__config or name in SETTINGS_DEFAULTS

    def __delitem__(self, name) -> None:
        del self.__config[name]
        self.save()

    def __iter__(self) -> Iterator:
        return iter(self.__config)

    def __len__(self) -> int:
        return len(self.__config)

    def save(self) -> None:
        if self.__file is None:
            return
        with click.open_file(self.__file, 'w') as fd:
            json.dump(self.__config, fd, indent=2)

    @property
    def dimension_cap(self) -> int:
        return int(self['dimension_cap'])

    @property
    def dense_dimension_cap(self) -> int:
        return int(self['dense_dimension_cap'])

    @property
    def tolerances(self) -> dict:
        return dict(self['tolerances'])


_NUMBER = {'type': 'number'}
_POSITIVE = {'type': 'number', 'exclusiveMinimum': 0}
_NON_NEGATIVE = {'type': 'number', 'minimum': 0}
_COUNT = {'type': 'integer', 'minimum': 1}
_NUMBERS = {'type': 'array', 'items': _NUMBER, 'minItems': 1}
_OCCUPATION = {'type': 'array', 'items': {'type': 'integer', 'minimum': 0}, 'minItems': 1}


def _object(properties: dict, required: List[str] = ()) -> dict:
    return {
        'type': 'object',
        'additionalProperties': False,
        'properties': properties,
        'required': list(required),
    }


_KERNEL = {'oneOf': [
    {'enum': ['delta', 'three_point']},
    _object({'offsets': {'type': 'array', 'items': {'type': 'integer'}, 'minItems': 1},
             'amplitudes': _NUMBERS}, ['offsets', 'amplitudes']),
]}

_INITIAL = {'oneOf': [
    _object({'type': {'const': 'bloch'}, 'q': {'type': 'integer'}}, ['type']),
    _object({'type': {'const': 'fock'}, 'occupation': _OCCUPATION}, ['type', 'occupation']),
    _object({'type': {'const': 'superposition'},
             'occupations': {'type': 'array', 'items': _OCCUPATION, 'minItems': 1},
             'amplitudes': _NUMBERS}, ['type', 'occupations']),
]}

_NOISE = _object({
    'tau_c': _NON_NEGATIVE,
    'spectrum': {'type': 'array', 'items': _NON_NEGATIVE, 'minItems': 1},
    'correlation': _NUMBERS,
}, ['tau_c'])

_LATTICE = {
    'sites': _COUNT,
    'particles': {'type': 'integer', 'minimum': 0},
    'hopping': _NUMBER,
    'rate': _NON_NEGATIVE,
    'total_time': _NON_NEGATIVE,
    'dt': _POSITIVE,
    'record_every': _COUNT,
    'periodic': {'type': 'boolean'},
    'curvature': _NON_NEGATIVE,
    'potential': _NUMBERS,
    'jumps': {'enum': ['site', 'kernel', 'momentum', 'noise', 'none']},
    'kernel': _KERNEL,
    'kick_weights': {'type': 'array', 'items': _NON_NEGATIVE, 'minItems': 1},
    'noise': _NOISE,
    'initial': _INITIAL,
    'observables': {'type': 'array', 'items': {'type': 'string', 'pattern': '^(v_cm|x_cm|n_total|energy|n[0-9]+)$'}},
    'coherences': {'type': 'array', 'items': _object({'row': _OCCUPATION, 'col': _OCCUPATION}, ['row', 'col'])},
}

_GRID = {
    'sigma0': _POSITIVE,
    'points': {'type': 'integer', 'minimum': 16},
    'half_width': _POSITIVE,
    'psi_csv': {'type': 'string'},
    'output_stride': _COUNT,
}

PARAMS_SCHEMA = {
    'master': _object(_LATTICE, ['sites', 'particles', 'total_time']),
    'trajectories': _object(dict(_LATTICE, trajectories=_COUNT, threads=_COUNT),
                            ['sites', 'particles', 'total_time']),
    'spdm': _object({
        'window': {'type': 'integer', 'minimum': 1, 'not': {'multipleOf': 2}},
        'hopping': _NUMBER,
        'curvature': _NON_NEGATIVE,
        'rate': _NON_NEGATIVE,
        'total_time': _NON_NEGATIVE,
        'dt': _POSITIVE,
        'snapshots': _COUNT,
        'particles': _POSITIVE,
        'periodic': {'type': 'boolean'},
        'initial': {'enum': ['ground', 'uniform', 'plane_wave']},
        'q': {'type': 'integer'},
        'boundary_ratio': {'type': ['number', 'null']},
    }, ['window', 'total_time']),
    'collapse': _object(dict(_GRID, width=_POSITIVE, shape_csv={'type': 'string'},
                             positions=_NUMBERS)),
    'kick': _object(dict(_GRID, kicks=_object({
        'distribution': {'enum': ['gaussian', 'uniform']},
        'width': _POSITIVE,
        'cutoff': _POSITIVE,
        'center': _NUMBER,
        'points': {'type': 'integer', 'minimum': 16},
    }, ['distribution']), kicks_csv={'type': 'string'})),
    'rates-sweep': _object({
        'depths': {'type': 'array', 'items': _POSITIVE, 'minItems': 1},
        'particles': _COUNT,
        'sites': _COUNT,
        'n_high_fit': _object({'c0': _NUMBER, 'c1': _NUMBER, 'c2': _NUMBER}),
        'mapping': _object({'hopping_coefficient': _POSITIVE, 'interaction_coefficient': _POSITIVE}),
        'noise': _NOISE,
        'interaction': _NUMBER,
    }),
}

TOLERANCES_SCHEMA = _object({
    'trace': _NON_NEGATIVE,
    'hermiticity': _NON_NEGATIVE,
    'positivity': _NUMBER,
})

CONFIG_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'additionalProperties': False,
    'required': ['schema', 'kind', 'params'],
    'properties': {
        'schema': {'const': SCHEMA_VERSION},
        'kind': {'enum': list(KINDS)},
        'params': {'type': 'object'},
        'output': {'type': 'string'},
        'seed': {'type': 'integer', 'minimum': 0, 'maximum': MAX_SEED},
        'tolerances': TOLERANCES_SCHEMA,
    },
    'allOf': [
        {'if': {'properties': {'kind': {'const': kind}}, 'required': ['kind']},
         'then': {'properties': {'params': schema}}}
        for kind, schema in PARAMS_SCHEMA.items()
    ],
}

_LATTICE_DEFAULTS = {
    'hopping': 1.0,
    'rate': 0.0,
    'record_every': 10,
    'periodic': True,
    'jumps': 'site',
    'initial': {'type': 'bloch', 'q': 1},
    'observables': ['v_cm'],
    'coherences': [],
}

PARAMS_DEFAULTS = {
    'master': _LATTICE_DEFAULTS,
    'trajectories': dict(_LATTICE_DEFAULTS, trajectories=1000, threads=1),
    'spdm': {
        'hopping': 1.0,
        'curvature': 0.1,
        'rate': 0.5,
        'dt': 0.01,
        'snapshots': 10,
        'particles': 1.0,
        'periodic': False,
        'initial': 'ground',
        'q': 0,
        'boundary_ratio': 1e-8,
    },
    'collapse': {'sigma0': 1.0, 'width': 1.0, 'points': 1024, 'output_stride': 8, 'positions': [0.0]},
    'kick': {'sigma0': 1.0, 'points': 1024, 'output_stride': 8,
             'kicks': {'distribution': 'gaussian', 'width': 1.0}},
    'rates-sweep': {
        'depths': [float(v) for v in range(2, 22, 2)],
        'particles': 80,
        'sites': 60,
        'n_high_fit': {'c0': 0.01, 'c1': 0.018, 'c2': 0.0019},
        'mapping': {},
        'interaction': 1.0,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: Dict[str, Any]
    seed: int = 0
    output: Optional[str] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    # params filled from other params rather than given by the user
    derived: Tuple[str, ...] = field(default=(), compare=False)

    def resolved(self) -> Dict[str, Any]:
        doc = {
            'schema': SCHEMA_VERSION,
            'kind': self.kind,
            'params': deepcopy(self.params),
            'seed': self.seed,
            'tolerances': dict(self.tolerances),
        }
        if self.output is not None:
            doc['output'] = self.output
        return doc

    @property
    def hash(self) -> str:
        return config_hash(self.resolved())

    def replace(self, seed: Optional[int] = None, output: Optional[str] = None,
                params: Optional[Dict[str, Any]] = None) -> 'ExperimentConfig':
        """Copy with overrides; derived params left unchanged in params are derived again."""
        derived = self.derived
        if params is None:
            params = self.params
        else:
            given = {k: v for k, v in params.items()
                     if k not in self.derived or v != self.params.get(k)}
            params, derived = _fill_defaults(self.kind, given)
        return ExperimentConfig(
            self.kind,
            deepcopy(params),
            self.seed if seed is None else seed,
            self.output if output is None else output,
            dict(self.tolerances),
            derived,
        )


def _format_error(error: jsonschema.ValidationError) -> str:
    location = '/'.join(str(p) for p in error.absolute_path) or '<root>'
    return f'{location}: {error.message}'


def validate_document(doc: Any) -> List[str]:
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: ([str(p) for p in e.absolute_path], e.message))
    return [_format_error(e) for e in errors]


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _fill_defaults(kind: str, params: Dict[str, Any]) -> Tuple[Dict[str, Any], Tuple[str, ...]]:
    resolved = deepcopy(PARAMS_DEFAULTS[kind])
    resolved.update(deepcopy(params))
    derived: Tuple[str, ...] = ()
    if kind in ('master', 'trajectories') and 'dt' not in resolved and all(
            _is_number(resolved.get(k)) for k in ('hopping', 'rate', 'particles')):
        resolved['dt'] = default_time_step(resolved['hopping'], resolved['rate'], resolved['particles'])
        derived = ('dt',)
    return resolved, derived


def parse_config(text: str) -> ExperimentConfig:
    """Validate a config document; every schema violation is reported in one ConfigError."""
    try:
        doc = json.loads(text)
    except ValueError as e:
        raise ConfigError([f'InvalidJSON({e})'])
    errors = validate_document(doc)
    if errors:
        raise ConfigError(errors)
    kind = doc['kind']
    params, derived = _fill_defaults(kind, doc['params'])
    return ExperimentConfig(
        kind=kind,
        params=params,
        seed=int(doc.get('seed', 0)),
        output=doc.get('output'),
        tolerances=dict(doc.get('tolerances', {})),
        derived=derived,
    )


def load_config(path: str) -> ExperimentConfig:
    with click.open_file(path, 'r', encoding='utf-8') as fd:
        return parse_config(fd.read())
