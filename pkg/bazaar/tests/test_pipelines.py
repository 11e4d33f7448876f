# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Tests for pipeline descriptions, graph recovery, rendering and templates."""

import os
import unittest

import numpy as np

from bazaar.errors import (InitParamUnknown, InvalidPipeline, MissingHyperparam, OutOfRange, PipelineError,
                              UnknownPrimitive)
from bazaar.services.annotations.annotation import MLDataType, PrimitiveAnnotation
from bazaar.services.annotations.catalogmanager import BUNDLED_CATALOG_DIR, Catalog, load_catalog
from bazaar.services.pipelines.description import (PipelineDescription, Step, load_description,
                                                      parse_description)
from bazaar.services.pipelines.graph import SOURCE, Edge, recover_graph
from bazaar.services.pipelines.render import graph_to_json, render_graph
from bazaar.services.pipelines.templates import (bind, derive_templates, make_hypertemplate, make_template,
                                                 parent_values_key)

RESOURCES = os.path.join(os.path.dirname(__file__), 'resources')
TOY_CATALOG = os.path.join(RESOURCES, 'catalogs', 'toy')
ORION_CATALOG = os.path.join(RESOURCES, 'catalogs', 'orion')

THREE_STEPS = {'primitives': ['toy.Imputer', 'toy.Scaler', 'toy.Classifier'], 'outputs': ['y_hat']}


def brute_force_edges(steps, source_outputs, sink_inputs):
    """Binds every input to its nearest preceding producer; None when the description is invalid.

    ``steps`` is a list of ``(input_names, output_names)``.
    """
    producers = [(SOURCE, tuple(source_outputs))] + [(index, outputs) for index, (_, outputs) in enumerate(steps)]
    consumers = [(index, inputs) for index, (inputs, _) in enumerate(steps)] + [(len(steps), tuple(sink_inputs))]
    edges = set()
    for consumer, inputs in consumers:
        for name in inputs:
            candidates = [producer for producer, outputs in producers if producer < consumer and name in outputs]
            if not candidates:
                return None
            edges.add(Edge(max(candidates), consumer, name))
    used = set(edge.producer for edge in edges)
    if any(index not in used for index in range(len(steps))):
        return None
    return edges


class TestDescription(unittest.TestCase):
    """Tests parsing pipeline description documents."""

    def test_ordinals_and_init_params(self):
        """Repeated primitives should get ordinals; ordinal keys override bare names."""
        description = parse_description({
            'primitives': ['bazaar.SimpleImputer', 'bazaar.StandardScaler', 'bazaar.SimpleImputer'],
            'init_params': {'bazaar.SimpleImputer': {'strategy': 'median'},
                            'bazaar.SimpleImputer#1': {'strategy': 'mode'}},
        })
        self.assertEqual([step.key for step in description.steps],
                         ['bazaar.SimpleImputer#0', 'bazaar.StandardScaler#0', 'bazaar.SimpleImputer#1'])
        self.assertEqual(description.steps[0].init_params, {'strategy': 'median'})
        self.assertEqual(description.steps[2].init_params, {'strategy': 'mode'})
        self.assertIsNone(description.expected_outputs)

    def test_io_map(self):
        """Input and output names should become rebindings of the addressed steps."""
        description = load_description(os.path.join(RESOURCES, 'pipelines', 'orion_lstm.json'))
        self.assertEqual(description.name, 'orion_lstm')
        self.assertEqual(description.rebindings(6, 'input'), {'index': 'target_index'})
        self.assertEqual(description.rebindings(4, 'output'), {'y': 'y_hat'})
        self.assertEqual(description.rebindings(4, 'input'), {})

    def test_canonical_json_round_trip(self):
        description = load_description(os.path.join(RESOURCES, 'pipelines', 'orion_lstm.json'))
        self.assertEqual(parse_description(description.to_json()), description)

    def test_invalid_descriptions(self):
        """Malformed documents and unknown step keys should raise PipelineError."""
        with self.assertRaises(PipelineError):
            parse_description('{"primitives": ')
        with self.assertRaises(PipelineError):
            parse_description({'primitives': 'toy.Scaler'})
        with self.assertRaises(PipelineError):
            parse_description({'primitives': ['toy.Scaler'], 'init_params': {'toy.Imputer': {}}})
        with self.assertRaises(PipelineError):
            parse_description({'primitives': ['toy.Scaler'], 'output_names': {'toy.Scaler': {'X': ''}}})


class TestRecoverGraph(unittest.TestCase):
    """Tests graph recovery from linear descriptions."""

    @classmethod
    def setUpClass(cls):
        cls.toy = load_catalog([TOY_CATALOG])
        cls.orion = load_catalog([ORION_CATALOG])

    def test_identity_pipeline(self):
        """An empty description should wire the source straight to the sink."""
        graph = recover_graph(PipelineDescription(expected_outputs=('X', 'y')), self.toy, ('X', 'y'))
        self.assertEqual(graph.edge_set(), {Edge(SOURCE, 0, 'X'), Edge(SOURCE, 0, 'y')})
        self.assertEqual(graph.nodes, [SOURCE, 0])

    def test_three_steps(self):
        """Each input should bind to the nearest preceding producer."""
        graph = recover_graph(parse_description(THREE_STEPS), self.toy, ('X', 'y'))
        self.assertEqual(graph.edge_set(), {
            Edge(SOURCE, 0, 'X'), Edge(0, 1, 'X'), Edge(1, 2, 'X'), Edge(SOURCE, 2, 'y'), Edge(2, 3, 'y_hat')})
        self.assertEqual(graph.producer_of(2, 'y'), SOURCE)
        self.assertEqual(graph.sink_inputs, ('y_hat',))

    def test_sink_defaults_to_last_outputs(self):
        graph = recover_graph(parse_description({'primitives': THREE_STEPS['primitives']}), self.toy)
        self.assertEqual(graph.sink_inputs, ('y_hat',))

    def test_orion_pipeline(self):
        """The anomaly detection pipeline should recover, identically across runs."""
        description = load_description(os.path.join(RESOURCES, 'pipelines', 'orion_lstm.json'))
        graph = recover_graph(description, self.orion, ('X',))
        self.assertEqual(graph.edge_set(), {
            Edge(SOURCE, 0, 'X'), Edge(0, 1, 'X'), Edge(0, 3, 'index'), Edge(1, 2, 'X'), Edge(2, 3, 'X'),
            Edge(3, 4, 'X'), Edge(3, 4, 'y'), Edge(3, 5, 'y'), Edge(3, 6, 'target_index'), Edge(4, 5, 'y_hat'),
            Edge(5, 6, 'errors'), Edge(6, 7, 'y'),
        })
        self.assertEqual(recover_graph(description, self.orion, ('X',)).edges, graph.edges)
        for edge in graph.edges:
            self.assertLess(edge.producer, edge.consumer)

    def test_nearest_producer_isolates_earlier(self):
        """A producer shadowed by a nearer one should be isolated."""
        description = parse_description({'primitives': ['toy.MakeX', 'toy.MakeX', 'toy.Consumer']})
        with self.assertRaises(InvalidPipeline) as context:
            recover_graph(description, self.toy, ())
        self.assertEqual(context.exception.why, 'isolated node')
        self.assertEqual(context.exception.step_index, 0)
        self.assertEqual(context.exception.names, ('X',))

    def test_unsatisfied_inputs(self):
        """Inputs nobody produces should invalidate the description."""
        with self.assertRaises(InvalidPipeline) as context:
            recover_graph(parse_description(THREE_STEPS), self.toy, ('X',))
        self.assertEqual(context.exception.names, ('y',))
        self.assertIn('y', context.exception.reason)

    def test_unknown_primitive(self):
        with self.assertRaises(UnknownPrimitive):
            recover_graph(parse_description({'primitives': ['toy.Nothing']}), self.toy)

    def test_diagnostics(self):
        """Inputs with earlier alternative producers should be reported."""
        graph = recover_graph(parse_description(THREE_STEPS), self.toy, ('X', 'y'))
        diagnostics = {(d.step_index, d.name): d.alternatives for d in graph.diagnostics}
        self.assertEqual(diagnostics, {(1, 'X'): (SOURCE,), (2, 'X'): (SOURCE, 0)})

    def test_io_map_renaming(self):
        """Consistently renaming a producer output and consumer input should preserve the graph shape."""
        renamed = dict(THREE_STEPS, output_names={'toy.Imputer': {'X': 'Z'}}, input_names={'toy.Scaler': {'X': 'Z'}})
        plain = recover_graph(parse_description(THREE_STEPS), self.toy, ('X', 'y'))
        graph = recover_graph(parse_description(renamed), self.toy, ('X', 'y'))
        self.assertEqual([(e.producer, e.consumer) for e in graph.edges],
                         [(e.producer, e.consumer) for e in plain.edges])
        self.assertIn(Edge(0, 1, 'Z'), graph.edge_set())

    def test_agrees_with_brute_force(self):
        """Random descriptions should recover exactly the nearest-producer edge set."""
        rng = np.random.default_rng(7)
        names = ['a', 'b', 'c', 'd']
        for _ in range(300):
            n_steps = int(rng.integers(0, 9))
            annotations, steps = {}, []
            for index in range(n_steps):
                inputs = tuple(rng.choice(names, size=int(rng.integers(0, 3)), replace=False))
                outputs = tuple(rng.choice(names, size=int(rng.integers(1, 3)), replace=False))
                name = 'random.P{}'.format(index)
                annotations[name] = PrimitiveAnnotation(
                    name=name, produce_inputs=tuple(MLDataType(str(n), 'vector') for n in inputs),
                    produce_outputs=tuple(MLDataType(str(n), 'vector') for n in outputs))
                steps.append(([str(n) for n in inputs], [str(n) for n in outputs]))
            source = tuple(str(n) for n in rng.choice(names, size=int(rng.integers(0, 3)), replace=False))
            expected = tuple(str(n) for n in rng.choice(names, size=int(rng.integers(1, 3)), replace=False))
            description = PipelineDescription(steps=tuple(Step(name) for name in annotations),
                                              expected_outputs=expected)
            oracle = brute_force_edges(steps, source, expected)
            try:
                graph = recover_graph(description, Catalog(annotations), source)
            except InvalidPipeline:
                self.assertIsNone(oracle, (steps, source, expected))
                continue
            self.assertEqual(graph.edge_set(), oracle, (steps, source, expected))


class TestRenderGraph(unittest.TestCase):
    """Tests DOT and JSON rendering."""

    @classmethod
    def setUpClass(cls):
        cls.toy = load_catalog([TOY_CATALOG])

    def test_identity_rendering(self):
        graph = recover_graph(PipelineDescription(expected_outputs=('X', 'y')), self.toy, ('X', 'y'))
        dot = render_graph(graph)
        self.assertEqual(dot.count('->'), 2)
        self.assertIn('"source"', dot)
        self.assertIn('"sink"', dot)

    def test_three_step_rendering(self):
        """Every node and labelled edge should be rendered, identically every time."""
        graph = recover_graph(parse_description(dict(THREE_STEPS, name='three')), self.toy, ('X', 'y'))
        dot = render_graph(graph)
        self.assertTrue(dot.startswith('digraph "three"'))
        self.assertEqual(dot.count('->'), 5)
        for label in ('Imputer', 'Scaler', 'Classifier'):
            self.assertIn('label="{}"'.format(label), dot)
        self.assertIn('label="y_hat"', dot)
        self.assertEqual(render_graph(graph), dot)

    def test_json_rendering(self):
        graph = recover_graph(parse_description(THREE_STEPS), self.toy, ('X', 'y'))
        self.assertIn('"toy.Classifier"', graph_to_json(graph))


class TestTemplates(unittest.TestCase):
    """Tests templates, hypertemplates and binding."""

    @classmethod
    def setUpClass(cls):
        cls.toy = load_catalog([TOY_CATALOG])
        cls.bundled = load_catalog([BUNDLED_CATALOG_DIR])

    def test_transformer_template_has_empty_space(self):
        template = make_template(parse_description({'primitives': ['toy.Imputer', 'toy.Scaler']}), self.toy)
        self.assertEqual(len(template.space), 0)
        pipeline = bind(template, {})
        self.assertEqual(pipeline.hyperparameters, ({}, {}))

    def test_tunable_space(self):
        """The space should hold the open tunables; init params fix them."""
        template = make_template(parse_description(THREE_STEPS), self.toy)
        self.assertEqual(template.space.keys, [(2, 'depth'), (2, 'min_leaf')])
        fixed = make_template(parse_description(dict(THREE_STEPS, init_params={'toy.Classifier': {'depth': 5}})),
                              self.toy)
        self.assertEqual(fixed.space.keys, [(2, 'min_leaf')])
        self.assertEqual(fixed.fixed[2], {'criterion': 'gini', 'depth': 5})
        self.assertNotEqual(template.id, fixed.id)
        self.assertEqual(len(template.id), 32)

    def test_unknown_init_param(self):
        with self.assertRaises(InitParamUnknown):
            make_template(parse_description(dict(THREE_STEPS, init_params={'toy.Classifier': {'width': 5}})),
                          self.toy)

    def test_bind(self):
        """Binding should merge fixed values and the assignment, and check the space."""
        template = make_template(parse_description(THREE_STEPS), self.toy)
        pipeline = bind(template, template.default_lambda())
        self.assertEqual(pipeline.hyperparameters[2], {'criterion': 'gini', 'depth': 5, 'min_leaf': 1})
        with self.assertRaises(OutOfRange):
            bind(template, {(2, 'depth'): 30, (2, 'min_leaf'): 1})
        with self.assertRaises(MissingHyperparam):
            bind(template, {(2, 'depth'): 3})
        with self.assertRaises(InitParamUnknown):
            bind(template, {(2, 'depth'): 3, (2, 'min_leaf'): 1, (2, 'width'): 1})

    def test_zero_conditionals(self):
        """A hypertemplate without conditionals should derive its own template."""
        hypertemplate = make_hypertemplate(parse_description(THREE_STEPS), self.toy)
        derived = derive_templates(hypertemplate)
        self.assertEqual(len(derived), 1)
        self.assertEqual(derived[0].id, make_template(parse_description(THREE_STEPS), self.toy).id)

    def test_one_parent(self):
        """One parent with two values should derive two templates in value order."""
        hypertemplate = make_hypertemplate(parse_description({'primitives': ['toy.SVC']}), self.toy)
        self.assertEqual(hypertemplate.parents, [(0, 'kernel')])
        self.assertEqual(sorted(hypertemplate.space_keys), [(0, 'C'), (0, 'gamma'), (0, 'kernel')])
        linear, rbf = derive_templates(hypertemplate)
        self.assertEqual(linear.space.keys, [(0, 'C')])
        self.assertEqual(rbf.space.keys, [(0, 'C'), (0, 'gamma')])
        self.assertEqual(rbf.fixed[0]['kernel'], 'rbf')
        self.assertTrue(linear.name.endswith('[kernel=linear]'))

    def test_two_parents(self):
        """Two parents with domains of size 2 and 3 should derive 6 templates covering the space."""
        hypertemplate = make_hypertemplate(parse_description({'primitives': ['toy.TwoParents']}), self.toy)
        derived = derive_templates(hypertemplate)
        self.assertEqual(len(derived), 6)
        self.assertEqual(len(set(template.id for template in derived)), 6)
        keys = set()
        for template in derived:
            keys.update(template.space.keys)
            keys.update((0, parent) for parent in ('loss', 'penalty'))
        self.assertEqual(keys, set(hypertemplate.space_keys))

    def test_parent_value_order(self):
        """Numeric parent values should sort numerically and strings lexicographically."""
        self.assertEqual(sorted([(10, 'b'), (9, 'b'), (9, 'a')], key=parent_values_key),
                         [(9, 'a'), (9, 'b'), (10, 'b')])
        self.assertEqual(sorted([(2.5,), (10,), (-1,)], key=parent_values_key), [(-1,), (2.5,), (10,)])
        self.assertEqual(sorted([(True,), (False,)], key=parent_values_key), [(False,), (True,)])
        self.assertEqual(sorted([('sqrt',), ('fraction',), ('none',)], key=parent_values_key),
                         [('fraction',), ('none',), ('sqrt',)])

    def test_deferred_conditional_default(self):
        """A plain template should give conditional children their branch default."""
        template = make_template(parse_description({'primitives': ['toy.SVC']}), self.toy)
        self.assertEqual(template.space.keys, [(0, 'C'), (0, 'kernel')])
        pipeline = bind(template, {(0, 'C'): 1.0, (0, 'kernel'): 'rbf'})
        self.assertEqual(pipeline.hyperparameters[0]['gamma'], 0.1)
        pipeline = bind(template, {(0, 'C'): 1.0, (0, 'kernel'): 'linear'})
        self.assertNotIn('gamma', pipeline.hyperparameters[0])

    def test_bundled_forest_template(self):
        """The forest description should derive one template per feature subsampling mode."""
        description = load_description(os.path.join(os.path.dirname(BUNDLED_CATALOG_DIR), 'templates',
                                                    'single_table.classification.forest.json'))
        derived = derive_templates(make_hypertemplate(description, self.bundled))
        self.assertEqual([template.fixed[6]['feature_subsampling'] for template in derived],
                         ['fraction', 'none', 'sqrt'])
        self.assertIn((6, 'feature_fraction'), derived[0].space)
        self.assertNotIn((6, 'feature_fraction'), derived[1].space)


if __name__ == '__main__':
    unittest.main()
