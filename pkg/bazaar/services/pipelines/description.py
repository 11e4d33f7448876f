# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Linear pipeline descriptions: ordered primitive steps plus an input-output map.

The JSON form is::

    {
        "primitives": ["bazaar.SimpleImputer", "bazaar.StandardScaler", ...],
        "init_params": {"bazaar.SimpleImputer": {"strategy": "median"}},
        "input_names": {"bazaar.ClassDecoder#0": {"y_hat": "y_hat"}},
        "output_names": {"bazaar.LSTMTimeSeriesRegressor#0": {"y": "y_hat"}},
        "outputs": ["y_hat"]
    }

Steps are addressed by primitive name or by ``<name>#<k>`` where ``k`` is the
ordinal of that primitive among the steps (counting from 0).  A bare name applies
to every occurrence of the primitive; an ordinal key takes precedence.
"""

import json
import os

from dataclasses import dataclass, field

from ...errors import PipelineError

TEMPLATE_METADATA_FIELDS = ('name', 'description', 'problem_types', 'modalities')


@dataclass(frozen=True)
class Step:
    primitive: str
    init_params: dict = field(default_factory=dict)
    ordinal: int = 0

    @property
    def key(self):
        return '{}#{}'.format(self.primitive, self.ordinal)


@dataclass(frozen=True)
class IORebinding:
    """Renames the ``declared`` input or output of one step to ``bound``."""
    step_index: int
    port: str  # 'input' or 'output'
    declared: str
    bound: str


@dataclass(frozen=True)
class PipelineDescription:
    steps: tuple = ()
    io_map: tuple = ()
    expected_outputs: tuple = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for rebinding in self.io_map:
            if not 0 <= rebinding.step_index < len(self.steps):
                raise PipelineError("Input-output map refers to step {} of a {}-step pipeline".format(
                    rebinding.step_index, len(self.steps)))
            if rebinding.port not in ('input', 'output'):
                raise PipelineError("Unknown port '{}' in the input-output map".format(rebinding.port))
            if not rebinding.bound:
                raise PipelineError("Empty bound name for '{}' of step {}".format(
                    rebinding.declared, rebinding.step_index))

    @property
    def name(self):
        return self.metadata.get('name', '')

    @property
    def primitives(self):
        return [step.primitive for step in self.steps]

    def rebindings(self, step_index, port):
        """The ``declared -> bound`` renames of one port of a step."""
        return {rebinding.declared: rebinding.bound for rebinding in self.io_map
                if rebinding.step_index == step_index and rebinding.port == port}

    def with_init_params(self, step_index, params):
        """A copy of this description with ``params`` merged into one step's init params."""
        steps = list(self.steps)
        step = steps[step_index]
        steps[step_index] = Step(step.primitive, dict(step.init_params, **params), step.ordinal)
        return PipelineDescription(tuple(steps), self.io_map, self.expected_outputs, dict(self.metadata))

    def to_json(self):
        """The canonical JSON document of the description (ordinal keys throughout)."""
        doc = {'primitives': self.primitives}
        init_params = {step.key: dict(step.init_params) for step in self.steps if step.init_params}
        if init_params:
            doc['init_params'] = init_params
        for port, section in (('input', 'input_names'), ('output', 'output_names')):
            renames = {}
            for rebinding in self.io_map:
                if rebinding.port == port:
                    renames.setdefault(self.steps[rebinding.step_index].key, {})[rebinding.declared] = rebinding.bound
            if renames:
                doc[section] = renames
        if self.expected_outputs is not None:
            doc['outputs'] = list(self.expected_outputs)
        for name in TEMPLATE_METADATA_FIELDS:
            if name in self.metadata:
                doc[name] = self.metadata[name]
        return doc

    def canonical_json(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(',', ':'))


def _resolve_step_keys(keys, steps, section):
    """Maps each key of a per-step section onto the step indices it addresses."""
    resolved = {}
    for key in keys:
        indices = [index for index, step in enumerate(steps) if key in (step.primitive, step.key)]
        if not indices:
            raise PipelineError("'{}' in '{}' does not name a step of the pipeline".format(key, section))
        resolved[key] = indices
    return resolved


def parse_description(doc):
    """Builds a PipelineDescription from its JSON document (a dict or JSON text)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except ValueError as e:
            raise PipelineError("Pipeline description is not valid JSON: {}".format(e))
    if not isinstance(doc, dict) or not isinstance(doc.get('primitives', []), list):
        raise PipelineError("Pipeline description must be an object with a 'primitives' list")

    ordinals = {}
    skeleton = []
    for primitive in doc.get('primitives', []):
        skeleton.append(Step(primitive, {}, ordinals.get(primitive, 0)))
        ordinals[primitive] = ordinals.get(primitive, 0) + 1

    init_params = [dict() for _ in skeleton]
    sections = doc.get('init_params', {})
    resolved = _resolve_step_keys(sections, skeleton, 'init_params')
    # bare names first so that ordinal keys override them
    for key in sorted(sections, key=lambda key: '#' in key):
        for index in resolved[key]:
            init_params[index].update(sections[key])
    steps = tuple(Step(step.primitive, params, step.ordinal) for step, params in zip(skeleton, init_params))

    io_map = []
    for port, section in (('input', 'input_names'), ('output', 'output_names')):
        renames = doc.get(section, {})
        resolved = _resolve_step_keys(renames, skeleton, section)
        for key in sorted(renames, key=lambda key: '#' in key):
            for index in resolved[key]:
                for declared, bound in sorted(renames[key].items()):
                    io_map.append(IORebinding(index, port, declared, bound))
    # a later rebinding of the same (step, port, declared) wins
    unique = {}
    for rebinding in io_map:
        unique[(rebinding.step_index, rebinding.port, rebinding.declared)] = rebinding
    io_map = tuple(sorted(unique.values(), key=lambda r: (r.step_index, r.port, r.declared)))

    outputs = doc.get('outputs')
    if outputs is not None:
        outputs = tuple(entry['name'] if isinstance(entry, dict) else entry for entry in outputs)
    metadata = {name: doc[name] for name in TEMPLATE_METADATA_FIELDS if name in doc}
    return PipelineDescription(steps, io_map, outputs, metadata)


def load_description(filename):
    """Reads a description file; its file name stands in for a missing 'name'."""
    with open(filename, encoding='utf-8') as fp:
        try:
            doc = json.load(fp)
        except ValueError as e:
            raise PipelineError("{} is not valid JSON: {}".format(filename, e))
    if isinstance(doc, dict) and 'name' not in doc:
        doc['name'] = os.path.splitext(os.path.basename(filename))[0]
    return parse_description(doc)
