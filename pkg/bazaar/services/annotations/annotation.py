# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Primitive annotations: the JSON documents describing each primitive.

An annotation file has three sections.  The meta-information (``name``,
``description``, ``documentation``, ``author``, ``modalities``, ``category``
and ``implementation``), the execution information (``fit`` and ``produce``
input/output declarations) and the hyperparameters (``fixed``, ``tunable`` and
``conditional``).  The frozen schema is::

    {
        "name": "bazaar.StandardScaler",
        "implementation": "StandardScaler",
        "fit": {"inputs": [{"name": "X", "type": "matrix"}]},
        "produce": {
            "inputs": [{"name": "X", "type": "matrix"}],
            "outputs": [{"name": "X", "type": "matrix"}]
        },
        "hyperparameters": {
            "fixed": {"copy": true},
            "tunable": {"k": {"type": "int", "range": [1, 20], "default": 5}},
            "conditional": {
                "gamma": {"parent": "kernel",
                          "branches": {"linear": null,
                                       "rbf": {"type": "float", "range": [0.0001, 1], "default": 0.1,
                                               "scale": "log"}}}
            }
        }
    }
"""

import json
import math

from dataclasses import dataclass, field

import jsonschema

from ...errors import MalformedJson, MissingField, UnknownKind, RangeError

VALUE_KINDS = ('table', 'matrix', 'vector', 'scalar', 'label_list')
HYPERPARAM_KINDS = ('int', 'float', 'categorical', 'bool')
SCALES = ('linear', 'log')

_IO_ENTRY = {
    'type': 'object',
    'required': ['name', 'type'],
    'properties': {
        'name': {'type': 'string', 'minLength': 1},
        'type': {'enum': list(VALUE_KINDS)},
        'alias': {'type': 'string', 'minLength': 1},
        'optional': {'type': 'boolean'},
    },
}

_HYPERPARAM = {
    'type': 'object',
    'required': ['type', 'default'],
    'properties': {
        'type': {'enum': list(HYPERPARAM_KINDS)},
        'range': {'type': 'array', 'minItems': 2, 'maxItems': 2, 'items': {'type': 'number'}},
        'values': {'type': 'array', 'minItems': 1},
        'scale': {'enum': list(SCALES)},
        'description': {'type': 'string'},
    },
}

ANNOTATION_SCHEMA = {
    'type': 'object',
    'required': ['name', 'produce'],
    'properties': {
        'name': {'type': 'string', 'minLength': 1},
        'description': {'type': 'string'},
        'documentation': {'type': 'string'},
        'author': {'type': 'string'},
        'category': {'type': 'string'},
        'modalities': {'type': 'array', 'items': {'type': 'string'}},
        'implementation': {'type': ['string', 'null']},
        'fit': {
            'type': 'object',
            'properties': {'inputs': {'type': 'array', 'items': _IO_ENTRY}},
        },
        'produce': {
            'type': 'object',
            'required': ['inputs', 'outputs'],
            'properties': {
                'inputs': {'type': 'array', 'items': _IO_ENTRY},
                'outputs': {'type': 'array', 'items': _IO_ENTRY},
            },
        },
        'hyperparameters': {
            'type': 'object',
            'properties': {
                'fixed': {'type': 'object'},
                'tunable': {'type': 'object', 'additionalProperties': _HYPERPARAM},
                'conditional': {
                    'type': 'object',
                    'additionalProperties': {
                        'type': 'object',
                        'required': ['parent', 'branches'],
                        'properties': {
                            'parent': {'type': 'string', 'minLength': 1},
                            'branches': {
                                'type': 'object',
                                'additionalProperties': {'anyOf': [{'type': 'null'}, _HYPERPARAM]},
                            },
                        },
                    },
                },
            },
        },
    },
}

_validator = jsonschema.Draft7Validator(ANNOTATION_SCHEMA)


@dataclass(frozen=True)
class MLDataType:
    """A named ML data object flowing in or out of a primitive."""
    name: str
    value_kind: str
    alias: str = None
    optional: bool = False

    def matches(self, name):
        """True if ``name`` refers to this entry, either by its name or by its alias."""
        return name == self.name or (self.alias is not None and name == self.alias)

    def to_json(self):
        doc = {'name': self.name, 'type': self.value_kind}
        if self.alias is not None:
            doc['alias'] = self.alias
        if self.optional:
            doc['optional'] = True
        return doc


@dataclass(frozen=True)
class HyperparamSpec:
    """A typed, bounded hyperparameter.

    Numeric kinds use ``lo``/``hi`` (inclusive) and may be log-scaled; categorical
    and bool kinds use ``values``.
    """
    name: str
    kind: str
    default: object
    lo: float = None
    hi: float = None
    values: tuple = ()
    scale: str = 'linear'

    @property
    def is_numeric(self):
        return self.kind in ('int', 'float')

    @property
    def domain(self):
        """The finite value-set of a categorical/bool hyperparameter."""
        return self.values

    def contains(self, value):
        """True if ``value`` is a feasible setting of this hyperparameter."""
        if self.kind == 'bool':
            return isinstance(value, bool)
        if self.kind == 'categorical':
            return any(value == candidate and type(value) == type(candidate) for candidate in self.values)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        if self.kind == 'int' and not float(value).is_integer():
            return False
        if isinstance(value, float) and not math.isfinite(value):
            return False
        return self.lo <= value <= self.hi

    def to_json(self):
        doc = {'type': self.kind, 'default': self.default}
        if self.is_numeric:
            doc['range'] = [self.lo, self.hi]
            doc['scale'] = self.scale
        else:
            doc['values'] = list(self.values)
        return doc


@dataclass(frozen=True)
class ConditionalHyperparamSpec:
    """A hyperparameter whose presence and domain depend on a categorical parent."""
    name: str
    parent: str
    branches: tuple  # ((parent_value, HyperparamSpec or None), ...) sorted by parent value

    def branch(self, parent_value):
        """Returns the spec active for ``parent_value`` (None when absent).

        Raises KeyError when the value has no branch entry.
        """
        for value, spec in self.branches:
            if value == parent_value:
                return spec
        raise KeyError(parent_value)

    @property
    def parent_values(self):
        return tuple(value for value, _ in self.branches)

    def to_json(self):
        return {'parent': self.parent,
                'branches': {value: (spec.to_json() if spec is not None else None) for value, spec in self.branches}}


@dataclass(frozen=True)
class PrimitiveAnnotation:
    """Machine-readable metadata of one primitive."""
    name: str
    produce_outputs: tuple
    description: str = ''
    documentation: str = ''
    author: str = ''
    category: str = ''
    modalities: tuple = ()
    implementation: str = None
    fit_inputs: tuple = ()
    produce_inputs: tuple = ()
    fixed_hyperparams: dict = field(default_factory=dict)
    tunable_hyperparams: tuple = ()
    conditional_hyperparams: tuple = ()

    @property
    def short_name(self):
        return self.name.rsplit('.', 1)[-1]

    @property
    def learns(self):
        """Transformers without a learning component declare no fit inputs."""
        return len(self.fit_inputs) > 0

    @property
    def inputs(self):
        """All declared inputs (fit then produce), without repetition of names."""
        seen = []
        for entry in self.fit_inputs + self.produce_inputs:
            if entry.name not in [other.name for other in seen]:
                seen.append(entry)
        return tuple(seen)

    @property
    def outputs(self):
        return self.produce_outputs

    @property
    def hyperparameter_names(self):
        return (set(self.fixed_hyperparams) | set(spec.name for spec in self.tunable_hyperparams) |
                set(spec.name for spec in self.conditional_hyperparams))

    def tunable(self, name):
        for spec in self.tunable_hyperparams:
            if spec.name == name:
                return spec
        return None

    def conditional(self, name):
        for spec in self.conditional_hyperparams:
            if spec.name == name:
                return spec
        return None

    def to_json(self):
        doc = {
            'name': self.name,
            'description': self.description,
            'documentation': self.documentation,
            'author': self.author,
            'category': self.category,
            'modalities': list(self.modalities),
            'implementation': self.implementation,
            'fit': {'inputs': [entry.to_json() for entry in self.fit_inputs]},
            'produce': {
                'inputs': [entry.to_json() for entry in self.produce_inputs],
                'outputs': [entry.to_json() for entry in self.produce_outputs],
            },
            'hyperparameters': {
                'fixed': dict(self.fixed_hyperparams),
                'tunable': {spec.name: spec.to_json() for spec in self.tunable_hyperparams},
                'conditional': {spec.name: spec.to_json() for spec in self.conditional_hyperparams},
            },
        }
        return doc


def _pointer(path):
    return '/' + '/'.join(str(part) for part in path) if path else ''


def _check_schema(doc):
    errors = sorted(_validator.iter_errors(doc), key=lambda e: ([str(p) for p in e.absolute_path], e.validator))
    if not errors:
        return
    error = errors[0]
    pointer = _pointer(list(error.absolute_path))
    if error.validator == 'required':
        missing = [name for name in error.validator_value if name not in error.instance]
        raise MissingField('{}/{}'.format(pointer, missing[0]))
    if error.validator == 'enum':
        raise UnknownKind(error.instance, pointer)
    raise MalformedJson("Schema violation at '{}': {}".format(pointer, error.message), pointer)


def _parse_io(entries):
    return tuple(MLDataType(name=entry['name'], value_kind=entry['type'], alias=entry.get('alias'),
                            optional=bool(entry.get('optional', False)))
                 for entry in entries)


def parse_hyperparam(name, doc, path):
    """Builds a HyperparamSpec from its JSON stanza, enforcing range constraints."""
    kind = doc['type']
    scale = doc.get('scale', 'linear')
    default = doc['default']
    if kind in ('int', 'float'):
        if 'range' not in doc:
            raise MissingField('{}/range'.format(path))
        lo, hi = doc['range']
        if lo > hi:
            raise RangeError("Range [{}, {}] at '{}' has lo > hi".format(lo, hi, path), path)
        if scale == 'log' and lo <= 0:
            raise RangeError("Log-scaled range at '{}' requires lo > 0".format(path), path)
        if kind == 'int':
            if not all(float(v).is_integer() for v in (lo, hi)):
                raise RangeError("Integer range at '{}' has non-integer bounds".format(path), path)
            lo, hi = int(lo), int(hi)
        else:
            lo, hi = float(lo), float(hi)
        if isinstance(default, bool) or not isinstance(default, (int, float)) or not lo <= default <= hi:
            raise RangeError("Default {!r} at '{}' is outside [{}, {}]".format(default, path, lo, hi), path)
        if kind == 'int':
            if not float(default).is_integer():
                raise RangeError("Default {!r} at '{}' is not an integer".format(default, path), path)
            default = int(default)
        else:
            default = float(default)
        return HyperparamSpec(name=name, kind=kind, default=default, lo=lo, hi=hi, scale=scale)

    if kind == 'bool':
        values = tuple(doc.get('values', [False, True]))
        if not all(isinstance(value, bool) for value in values):
            raise RangeError("Boolean values at '{}' must be true/false".format(path), path)
    else:
        if 'values' not in doc:
            raise MissingField('{}/values'.format(path))
        values = tuple(doc['values'])
    if default not in values:
        raise RangeError("Default {!r} at '{}' is not one of {}".format(default, path, list(values)), path)
    return HyperparamSpec(name=name, kind=kind, default=default, values=values)


def parse_annotation(json_text):
    """Parses one annotation document.

    Parameters
    ----------
    json_text : str
        The UTF-8 JSON text of the annotation.

    Returns
    -------
    PrimitiveAnnotation
        The annotation with absent optional sections defaulted to empty lists/maps.
        Tunable and conditional hyperparameters are ordered by name.
    """
    try:
        doc = json.loads(json_text)
    except ValueError as e:
        raise MalformedJson("Annotation is not valid JSON: {}".format(e))
    if not isinstance(doc, dict):
        raise MalformedJson("Annotation must be a JSON object")
    _check_schema(doc)

    hyperparameters = doc.get('hyperparameters', {})
    tunable = tuple(parse_hyperparam(name, spec, '/hyperparameters/tunable/{}'.format(name))
                    for name, spec in sorted(hyperparameters.get('tunable', {}).items()))
    conditional = []
    for name, spec in sorted(hyperparameters.get('conditional', {}).items()):
        branches = []
        for value, branch in sorted(spec['branches'].items()):
            path = '/hyperparameters/conditional/{}/branches/{}'.format(name, value)
            branches.append((value, parse_hyperparam(name, branch, path) if branch is not None else None))
        conditional.append(ConditionalHyperparamSpec(name=name, parent=spec['parent'], branches=tuple(branches)))

    return PrimitiveAnnotation(
        name=doc['name'],
        description=doc.get('description', ''),
        documentation=doc.get('documentation', ''),
        author=doc.get('author', ''),
        category=doc.get('category', ''),
        modalities=tuple(doc.get('modalities', [])),
        implementation=doc.get('implementation'),
        fit_inputs=_parse_io(doc.get('fit', {}).get('inputs', [])),
        produce_inputs=_parse_io(doc['produce']['inputs']),
        produce_outputs=_parse_io(doc['produce']['outputs']),
        fixed_hyperparams=dict(hyperparameters.get('fixed', {})),
        tunable_hyperparams=tunable,
        conditional_hyperparams=tuple(conditional),
    )


def serialize_annotation(annotation):
    """Renders an annotation back into its JSON document (keys sorted)."""
    return json.dumps(annotation.to_json(), sort_keys=True, indent=2)
