# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Recovery of the computational graph of a linear pipeline description.

Steps are added to the graph in reverse order.  A working set of unsatisfied
``(consumer, name)`` pairs starts with the sink's inputs; every step, visited from
last to first, satisfies all pending pairs matching its outputs (one edge per
pair) and then contributes its own inputs.  A step satisfying nothing is isolated
and invalidates the description, as does any pair still pending once the source
has been visited.  Consequently every input binds to its nearest preceding
producer.
"""

import logging

from dataclasses import dataclass, field

from ...errors import InvalidPipeline

SOURCE = -1
DEFAULT_SOURCE_OUTPUTS = ('X', 'y')


@dataclass(frozen=True)
class Port:
    """An annotation I/O entry together with the context name it is bound to."""
    entry: object
    bound: str


@dataclass(frozen=True)
class PipelineStep:
    index: int
    key: str
    annotation: object
    init_params: dict = field(default_factory=dict)
    fit_inputs: tuple = ()
    produce_inputs: tuple = ()
    outputs: tuple = ()

    @property
    def input_names(self):
        """Bound names of every input, fit inputs first, without repetition."""
        names = []
        for port in self.fit_inputs + self.produce_inputs:
            if port.bound not in names:
                names.append(port.bound)
        return tuple(names)

    @property
    def output_names(self):
        return tuple(port.bound for port in self.outputs)

    @property
    def label(self):
        return self.annotation.short_name if self.key.endswith('#0') else '{}#{}'.format(
            self.annotation.short_name, self.key.rsplit('#', 1)[1])


@dataclass(frozen=True, order=True)
class Edge:
    producer: int
    consumer: int
    label: str


@dataclass(frozen=True)
class Diagnostic:
    """An input bound to its nearest producer while earlier steps also produce it."""
    step_index: int
    name: str
    alternatives: tuple

    def __str__(self):
        return "step {} binds '{}' to its nearest producer; also produced by {}".format(
            self.step_index, self.name, ', '.join(_node_name(index) for index in self.alternatives))


def _node_name(index):
    return 'source' if index == SOURCE else 'step {}'.format(index)


@dataclass(frozen=True)
class PipelineGraph:
    """A directed acyclic multigraph between the source (-1), the steps and the sink (n)."""
    description: object
    steps: tuple
    edges: tuple
    source_outputs: tuple
    sink_inputs: tuple
    diagnostics: tuple = ()

    @property
    def sink(self):
        return len(self.steps)

    @property
    def nodes(self):
        return [SOURCE] + [step.index for step in self.steps] + [self.sink]

    def in_edges(self, index):
        return [edge for edge in self.edges if edge.consumer == index]

    def out_edges(self, index):
        return [edge for edge in self.edges if edge.producer == index]

    def producer_of(self, index, name):
        for edge in self.edges:
            if edge.consumer == index and edge.label == name:
                return edge.producer
        return None

    def edge_set(self):
        return set(self.edges)


def _bind(entries, renames):
    ports = []
    for entry in entries:
        bound = renames.get(entry.name)
        if bound is None and entry.alias is not None:
            bound = renames.get(entry.alias)
        ports.append(Port(entry, bound or entry.name))
    return tuple(ports)


def resolve_steps(description, catalog):
    """Looks up every step's annotation and applies the input-output map."""
    steps = []
    for index, step in enumerate(description.steps):
        annotation = catalog[step.primitive]
        inputs = description.rebindings(index, 'input')
        outputs = description.rebindings(index, 'output')
        steps.append(PipelineStep(index=index, key=step.key, annotation=annotation,
                                  init_params=dict(step.init_params),
                                  fit_inputs=_bind(annotation.fit_inputs, inputs),
                                  produce_inputs=_bind(annotation.produce_inputs, inputs),
                                  outputs=_bind(annotation.produce_outputs, outputs)))
    return tuple(steps)


def recover_graph(description, catalog, source_outputs=DEFAULT_SOURCE_OUTPUTS, log=None):
    """Recovers the unique graph of a pipeline description.

    Parameters
    ----------
    description : PipelineDescription
    catalog : Catalog
        Catalog resolving the description's primitive names.
    source_outputs : tuple of str
        Names the source node provides (the task's dataset variables).
    log : logging.Logger, optional
        Receives a debug record per ambiguity diagnostic.

    Returns
    -------
    PipelineGraph

    Raises
    ------
    UnknownPrimitive
        If a step names a primitive that is not in the catalog.
    InvalidPipeline
        If a node is isolated or inputs remain unsatisfied.
    """
    log = log or logging.getLogger(__name__)
    steps = resolve_steps(description, catalog)
    sink = len(steps)
    source_outputs = tuple(source_outputs)

    if description.expected_outputs is not None:
        sink_inputs = tuple(description.expected_outputs)
    elif steps:
        sink_inputs = steps[-1].output_names
    else:
        sink_inputs = source_outputs

    pending = [(sink, name) for name in sink_inputs]
    edges = []
    for index in range(sink - 1, SOURCE - 1, -1):
        outputs = steps[index].output_names if index != SOURCE else source_outputs
        matches = [pair for pair in pending if pair[1] in outputs]
        if not matches:
            if index == SOURCE and not pending:
                break
            raise InvalidPipeline('isolated node', index, outputs)
        pending = [pair for pair in pending if pair[1] not in outputs]
        edges.extend(Edge(index, consumer, name) for consumer, name in matches)
        if index != SOURCE:
            pending.extend((index, name) for name in steps[index].input_names)

    if pending:
        raise InvalidPipeline('unsatisfied inputs remain', min(consumer for consumer, _ in pending),
                              set(name for _, name in pending))

    diagnostics = []
    for edge in sorted(edges, key=lambda edge: (edge.consumer, edge.label)):
        alternatives = tuple(index for index in range(SOURCE, edge.producer)
                             if edge.label in (steps[index].output_names if index != SOURCE else source_outputs))
        if alternatives:
            diagnostic = Diagnostic(edge.consumer, edge.label, alternatives)
            log.debug(str(diagnostic))
            diagnostics.append(diagnostic)

    return PipelineGraph(description=description, steps=steps, edges=tuple(sorted(edges)),
                         source_outputs=source_outputs, sink_inputs=sink_inputs, diagnostics=tuple(diagnostics))
