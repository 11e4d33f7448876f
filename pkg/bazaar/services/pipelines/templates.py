# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Templates, hypertemplates and bound pipelines.

A template is a recovered graph plus the joint space of every tunable
hyperparameter its steps leave open, keyed ``(step_index, name)``.  A hypertemplate
additionally keeps the conditional hyperparameters whose categorical parent is
tunable; fixing those parents derives one template per combination of parent
values.  Binding a template to a full assignment of its space yields a pipeline.
"""

import dataclasses
import hashlib
import itertools
import json

from dataclasses import dataclass

from ...errors import InitParamUnknown, MissingHyperparam, OutOfRange
from ..tuning.space import HyperparamSpace, format_key
from .graph import DEFAULT_SOURCE_OUTPUTS, recover_graph


def content_id(description, space, extra=None):
    """128-bit hex digest over the canonical description JSON and the space."""
    digest = hashlib.blake2b(digest_size=16)
    digest.update(description.canonical_json().encode('utf-8'))
    digest.update(json.dumps(space.to_json(), sort_keys=True).encode('utf-8'))
    if extra is not None:
        digest.update(json.dumps(extra, sort_keys=True).encode('utf-8'))
    return digest.hexdigest()


@dataclass(frozen=True)
class Template:
    description: object
    graph: object
    space: HyperparamSpace
    fixed: tuple  # per step: annotation fixed hyperparameters overlaid with init params
    deferred: tuple = ()  # (step_index, ConditionalHyperparamSpec) resolved at bind time
    id: str = ''

    @property
    def name(self):
        return self.description.name or self.id[:12]

    def default_lambda(self):
        """The assignment binding every key to its annotated default."""
        return self.space.defaults()

    def to_json(self):
        return {'id': self.id, 'name': self.name, 'description': self.description.to_json(),
                'space': self.space.to_json(), 'source_outputs': list(self.graph.source_outputs)}


@dataclass(frozen=True)
class Hypertemplate:
    description: object
    graph: object
    space: HyperparamSpace  # the unconditional tunable hyperparameters
    fixed: tuple
    conditionals: tuple  # (step_index, ConditionalHyperparamSpec) with a tunable parent
    id: str = ''

    @property
    def name(self):
        return self.description.name or self.id[:12]

    @property
    def parents(self):
        """Keys of the tunable parents of the conditional hyperparameters, sorted."""
        return sorted(set((index, conditional.parent) for index, conditional in self.conditionals))

    @property
    def space_keys(self):
        """Every key of the conditional space: unconditional keys plus conditional children."""
        keys = list(self.space.keys)
        keys.extend((index, conditional.name) for index, conditional in self.conditionals
                    if any(branch is not None for _, branch in conditional.branches))
        return keys


@dataclass(frozen=True)
class Pipeline:
    template: Template
    assignment: dict
    hyperparameters: tuple  # resolved per-step hyperparameter maps

    @property
    def graph(self):
        return self.template.graph

    @property
    def steps(self):
        return self.template.graph.steps


def _collect(graph):
    """Returns ``(entries, fixed, conditionals)`` for the steps of ``graph``."""
    entries, fixed, conditionals = [], [], []
    for step in graph.steps:
        annotation = step.annotation
        params = step.init_params
        known = annotation.hyperparameter_names
        for name in sorted(params):
            if name not in known:
                raise InitParamUnknown(step.key, name)
        values = dict(annotation.fixed_hyperparams)
        values.update(params)

        for spec in annotation.tunable_hyperparams:
            if spec.name in params:
                if not spec.contains(params[spec.name]):
                    raise OutOfRange((step.index, spec.name), params[spec.name])
            else:
                entries.append(((step.index, spec.name), spec))

        for conditional in annotation.conditional_hyperparams:
            if conditional.name in params:
                continue
            if conditional.parent in values:
                try:
                    branch = conditional.branch(values[conditional.parent])
                except KeyError:
                    raise OutOfRange((step.index, conditional.parent), values[conditional.parent])
                if branch is not None:
                    entries.append(((step.index, conditional.name), branch))
            else:
                conditionals.append((step.index, conditional))
        fixed.append(values)
    return HyperparamSpace(entries), tuple(fixed), tuple(conditionals)


def _template_from_graph(description, graph):
    space, fixed, deferred = _collect(graph)
    return Template(description=description, graph=graph, space=space, fixed=fixed, deferred=deferred,
                    id=content_id(description, space, list(graph.source_outputs)))


def make_template(description, catalog, source_outputs=DEFAULT_SOURCE_OUTPUTS, log=None):
    """Recovers the graph of ``description`` and collects its tunable space.

    Conditional hyperparameters whose parent is tunable are left out of the space;
    a bound pipeline gives them their branch default for the chosen parent value.
    """
    graph = recover_graph(description, catalog, source_outputs, log=log)
    return _template_from_graph(description, graph)


def make_hypertemplate(description, catalog, source_outputs=DEFAULT_SOURCE_OUTPUTS, log=None):
    """Like make_template, but keeps the conditional hyperparameters of tunable parents."""
    graph = recover_graph(description, catalog, source_outputs, log=log)
    space, fixed, conditionals = _collect(graph)
    return Hypertemplate(description=description, graph=graph, space=space, fixed=fixed,
                         conditionals=conditionals,
                         id=content_id(description, space, [list(graph.source_outputs),
                                                            [[i, c.name] for i, c in conditionals]]))


def _with_params(description, graph, assignments):
    for (index, name), value in assignments:
        description = description.with_init_params(index, {name: value})
    suffix = ','.join('{}={}'.format(name, value) for (_, name), value in assignments)
    metadata = dict(description.metadata, name='{}[{}]'.format(description.name, suffix))
    description = dataclasses.replace(description, metadata=metadata)
    steps = tuple(dataclasses.replace(step, init_params=dict(description.steps[step.index].init_params))
                  for step in graph.steps)
    return description, dataclasses.replace(graph, description=description, steps=steps)


def parent_values_key(values):
    """Sort key of a tuple of parent values: numbers compare numerically, other values within their type."""
    key = []
    for value in values:
        if isinstance(value, bool):
            key.append(('bool', value))
        elif isinstance(value, (int, float)):
            key.append(('number', value))
        elif isinstance(value, str):
            key.append(('str', value))
        else:
            key.append((type(value).__name__, str(value)))
    return key


def derive_templates(hypertemplate):
    """Derives one template per combination of conditional-parent values.

    Parents become fixed hyperparameters and only the selected branches enter the
    space.  Templates are ordered lexicographically over the parent value tuples.
    A hypertemplate without conditionals yields its single underlying template.
    """
    parents = hypertemplate.parents
    if not parents:
        return [_template_from_graph(hypertemplate.description, hypertemplate.graph)]

    domains = [hypertemplate.space.spec(key).values for key in parents]
    combinations = sorted(itertools.product(*domains), key=parent_values_key)
    templates = []
    for values in combinations:
        description, graph = _with_params(hypertemplate.description, hypertemplate.graph,
                                          list(zip(parents, values)))
        templates.append(_template_from_graph(description, graph))
    return templates


def bind(template, assignment):
    """Binds a full assignment of the template's space into a Pipeline.

    Raises
    ------
    MissingHyperparam
        If a key of the space has no value.
    InitParamUnknown
        If the assignment holds a key outside of the space.
    OutOfRange
        If a value is not feasible for its hyperparameter.
    """
    keys = set(template.space.keys)
    for key in sorted(keys - set(assignment)):
        raise MissingHyperparam(format_key(key))
    for index, name in sorted(set(assignment) - keys):
        raise InitParamUnknown(template.graph.steps[index].key if 0 <= index < len(template.graph.steps)
                               else index, name)
    template.space.check(assignment)

    hyperparameters = [dict(values) for values in template.fixed]
    for (index, name), value in assignment.items():
        hyperparameters[index][name] = value
    for index, conditional in template.deferred:
        parent_value = hyperparameters[index].get(conditional.parent)
        try:
            branch = conditional.branch(parent_value)
        except KeyError:
            raise OutOfRange((index, conditional.parent), parent_value)
        if branch is not None:
            hyperparameters[index].setdefault(conditional.name, branch.default)
    return Pipeline(template=template, assignment=dict(assignment), hyperparameters=tuple(hyperparameters))
