# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Renders recovered graphs as Graphviz DOT text."""

import json
import os

from jinja2 import Environment, FileSystemLoader

from .graph import SOURCE

GRAPH_TEMPLATE_PATH = 'graph.dot.j2'


def dot_quote(text):
    """Quotes ``text`` as a DOT string literal."""
    return '"{}"'.format(str(text).replace('\\', '\\\\').replace('"', '\\"').replace('\n', '\\n'))


def _environment():
    environment = Environment(loader=FileSystemLoader(os.path.join(os.path.dirname(__file__), 'dot')),
                              trim_blocks=True, lstrip_blocks=True, keep_trailing_newline=True)
    environment.filters['dot_quote'] = dot_quote
    return environment


def _node_id(graph, index):
    if index == SOURCE:
        return 'source'
    if index == graph.sink:
        return 'sink'
    return 'step_{}'.format(index)


def render_graph(graph):
    """Renders ``graph`` as deterministic DOT text.

    Steps are labelled with their primitive's short name (plus ``#k`` for repeated
    primitives) and edges with the name of the data flowing along them.
    """
    nodes = [{'id': 'source', 'label': 'source', 'terminal': True}]
    nodes.extend({'id': _node_id(graph, step.index), 'label': step.label, 'terminal': False}
                 for step in graph.steps)
    nodes.append({'id': 'sink', 'label': 'sink', 'terminal': True})
    edges = [{'producer': _node_id(graph, edge.producer), 'consumer': _node_id(graph, edge.consumer),
              'label': edge.label} for edge in graph.edges]
    name = graph.description.name or 'pipeline'
    return _environment().get_template(GRAPH_TEMPLATE_PATH).render(name=name, nodes=nodes, edges=edges)


def graph_to_json(graph):
    """The recovered graph as a JSON document (the ``--render json`` output)."""
    doc = {
        'name': graph.description.name,
        'nodes': [{'index': SOURCE, 'label': 'source', 'outputs': list(graph.source_outputs)}] +
                 [{'index': step.index, 'primitive': step.annotation.name, 'label': step.label,
                   'inputs': list(step.input_names), 'outputs': list(step.output_names)} for step in graph.steps] +
                 [{'index': graph.sink, 'label': 'sink', 'inputs': list(graph.sink_inputs)}],
        'edges': [[edge.producer, edge.consumer, edge.label] for edge in graph.edges],
        'diagnostics': [{'step_index': d.step_index, 'name': d.name, 'alternatives': list(d.alternatives)}
                        for d in graph.diagnostics],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
