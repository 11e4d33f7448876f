# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Tests for annotation parsing, validation and catalog loading."""

import json
import os
import shutil
import tempfile
import unittest

from bazaar.errors import (DuplicatePrimitive, InvalidAnnotation, MalformedJson, MissingField, RangeError,
                              UnknownKind, UnknownPrimitive)
from bazaar.services.annotations.annotation import parse_annotation, serialize_annotation
from bazaar.services.annotations.catalogmanager import (BUNDLED_CATALOG_DIR, CatalogManager, load_catalog)
from bazaar.services.annotations.validation import validate_annotation
from bazaar.services.primitives.registry import default_registry

RESOURCES = os.path.join(os.path.dirname(__file__), 'resources')

MINIMAL = {
    'name': 'test.Identity',
    'produce': {'inputs': [{'name': 'X', 'type': 'matrix'}], 'outputs': [{'name': 'X', 'type': 'matrix'}]},
}

GAUSSIAN_BLUR = {
    'name': 'skimage.filters.gaussian',
    'description': 'Blurs an image with a Gaussian kernel',
    'documentation': 'https://scikit-image.org/docs/stable/api/skimage.filters.html',
    'author': 'Bazaar Development Team',
    'modalities': ['image'],
    'produce': {'inputs': [{'name': 'image', 'type': 'matrix'}], 'outputs': [{'name': 'image', 'type': 'matrix'}]},
    'hyperparameters': {'fixed': {'sigma': 1, 'mode': 'nearest', 'truncate': 4.0}},
}

FULL = {
    'name': 'test.Everything',
    'description': 'Uses every section of the schema',
    'category': 'classifier',
    'modalities': ['single_table', 'text'],
    'implementation': None,
    'fit': {'inputs': [{'name': 'X', 'type': 'matrix'}, {'name': 'y', 'type': 'vector', 'alias': 'target'}]},
    'produce': {'inputs': [{'name': 'X', 'type': 'matrix'}],
                'outputs': [{'name': 'y_hat', 'type': 'vector'}, {'name': 'proba', 'type': 'matrix',
                                                                   'optional': True}]},
    'hyperparameters': {
        'fixed': {'verbose': False},
        'tunable': {
            'depth': {'type': 'int', 'range': [1, 20], 'default': 5},
            'rate': {'type': 'float', 'range': [0.001, 1.0], 'default': 0.1, 'scale': 'log'},
            'shuffle': {'type': 'bool', 'default': True},
            'kernel': {'type': 'categorical', 'values': ['linear', 'rbf'], 'default': 'rbf'},
        },
        'conditional': {
            'gamma': {'parent': 'kernel', 'branches': {
                'linear': None, 'rbf': {'type': 'float', 'range': [0.0001, 1], 'default': 0.1, 'scale': 'log'}}},
        },
    },
}


def _with_hyperparams(doc, **hyperparameters):
    doc = json.loads(json.dumps(doc))
    doc['hyperparameters'] = hyperparameters
    return doc


class TestParseAnnotation(unittest.TestCase):
    """Tests parsing annotation documents."""

    def test_minimal_transformer(self):
        """The smallest legal annotation should default every optional section."""
        annotation = parse_annotation(json.dumps(MINIMAL))
        self.assertEqual(annotation.name, 'test.Identity')
        self.assertEqual(annotation.fit_inputs, ())
        self.assertEqual(annotation.tunable_hyperparams, ())
        self.assertEqual(annotation.conditional_hyperparams, ())
        self.assertEqual(annotation.fixed_hyperparams, {})
        self.assertIsNone(annotation.implementation)
        self.assertFalse(annotation.learns)

    def test_fixed_only_hyperparameters(self):
        """An annotation with only fixed hyperparameters should have nothing to tune."""
        annotation = parse_annotation(json.dumps(GAUSSIAN_BLUR))
        self.assertEqual(annotation.tunable_hyperparams, ())
        self.assertEqual(annotation.fixed_hyperparams['mode'], 'nearest')
        self.assertEqual(annotation.short_name, 'gaussian')
        self.assertEqual(annotation.produce_inputs[0].value_kind, 'matrix')

    def test_all_sections(self):
        """Tunable and conditional hyperparameters should be parsed and ordered by name."""
        annotation = parse_annotation(json.dumps(FULL))
        self.assertEqual([spec.name for spec in annotation.tunable_hyperparams],
                         ['depth', 'kernel', 'rate', 'shuffle'])
        depth = annotation.tunable('depth')
        self.assertEqual((depth.lo, depth.hi, depth.default), (1, 20, 5))
        self.assertEqual(annotation.tunable('rate').scale, 'log')
        self.assertEqual(annotation.tunable('shuffle').values, (False, True))
        gamma = annotation.conditional('gamma')
        self.assertEqual(gamma.parent_values, ('linear', 'rbf'))
        self.assertIsNone(gamma.branch('linear'))
        self.assertEqual(gamma.branch('rbf').default, 0.1)
        self.assertEqual(annotation.fit_inputs[1].alias, 'target')
        self.assertTrue(annotation.fit_inputs[1].matches('target'))
        self.assertTrue(annotation.produce_outputs[1].optional)
        self.assertEqual(annotation.hyperparameter_names, {'verbose', 'depth', 'rate', 'shuffle', 'kernel', 'gamma'})

    def test_round_trip(self):
        """Serializing then parsing again should yield an equal annotation."""
        for doc in (MINIMAL, GAUSSIAN_BLUR, FULL):
            annotation = parse_annotation(json.dumps(doc))
            self.assertEqual(parse_annotation(serialize_annotation(annotation)), annotation)

    def test_malformed_json(self):
        """Text that is not JSON should raise MalformedJson."""
        with self.assertRaises(MalformedJson):
            parse_annotation('{"name": "test.Broken", ')
        with self.assertRaises(MalformedJson):
            parse_annotation('[1, 2, 3]')

    def test_missing_field(self):
        """A missing required section should be reported by its JSON pointer."""
        with self.assertRaises(MissingField) as context:
            parse_annotation(json.dumps({'name': 'test.NoProduce'}))
        self.assertEqual(context.exception.path, '/produce')

        doc = _with_hyperparams(MINIMAL, tunable={'k': {'type': 'int', 'default': 3}})
        with self.assertRaises(MissingField) as context:
            parse_annotation(json.dumps(doc))
        self.assertEqual(context.exception.path, '/hyperparameters/tunable/k/range')

    def test_unknown_kind(self):
        """Unknown value kinds and hyperparameter kinds should raise UnknownKind."""
        doc = json.loads(json.dumps(MINIMAL))
        doc['produce']['inputs'][0]['type'] = 'tensor'
        with self.assertRaises(UnknownKind) as context:
            parse_annotation(json.dumps(doc))
        self.assertEqual(context.exception.value, 'tensor')
        self.assertEqual(context.exception.path, '/produce/inputs/0/type')

        doc = _with_hyperparams(MINIMAL, tunable={'k': {'type': 'complex', 'range': [1, 2], 'default': 1}})
        with self.assertRaises(UnknownKind):
            parse_annotation(json.dumps(doc))

    def test_range_errors(self):
        """Empty ranges, infeasible defaults and non-positive log ranges should raise RangeError."""
        invalid = [
            {'type': 'int', 'range': [5, 1], 'default': 3},
            {'type': 'int', 'range': [1, 5], 'default': 7},
            {'type': 'int', 'range': [1, 5], 'default': 2.5},
            {'type': 'float', 'range': [0.0, 1.0], 'default': 0.5, 'scale': 'log'},
            {'type': 'categorical', 'values': ['a', 'b'], 'default': 'c'},
            {'type': 'bool', 'default': 'yes'},
        ]
        for spec in invalid:
            with self.assertRaises(RangeError):
                parse_annotation(json.dumps(_with_hyperparams(MINIMAL, tunable={'k': spec})))


class TestValidateAnnotation(unittest.TestCase):
    """Tests the annotation invariant checks."""

    def setUp(self):
        self.registry = default_registry()

    def _codes(self, doc):
        return [violation.code for violation in validate_annotation(parse_annotation(json.dumps(doc)), self.registry)]

    def test_valid_annotations(self):
        """Every bundled annotation should validate against the default registry."""
        for filename in sorted(os.listdir(BUNDLED_CATALOG_DIR)):
            with open(os.path.join(BUNDLED_CATALOG_DIR, filename), encoding='utf-8') as fp:
                annotation = parse_annotation(fp.read())
            self.assertEqual(validate_annotation(annotation, self.registry), [], filename)
        self.assertEqual(self._codes(FULL), [])

    def test_unknown_implementation(self):
        """An unregistered implementation key should be a violation."""
        doc = dict(MINIMAL, implementation='NoSuchPrimitive')
        self.assertEqual(self._codes(doc), ['UnknownImplementation'])

    def test_arity_mismatch(self):
        """The annotation I/O lists should match the implementation's arity."""
        doc = dict(MINIMAL, implementation='StandardScaler',
                   fit={'inputs': [{'name': 'X', 'type': 'matrix'}, {'name': 'y', 'type': 'vector'}]})
        self.assertEqual(self._codes(doc), ['ArityMismatch'])

    def test_dangling_conditional_parent(self):
        """A conditional whose parent does not exist should be a violation."""
        doc = _with_hyperparams(MINIMAL, conditional={
            'gamma': {'parent': 'kernel', 'branches': {'rbf': {'type': 'float', 'range': [0, 1], 'default': 0.5}}}})
        self.assertEqual(self._codes(doc), ['DanglingConditionalParent'])

    def test_conditional_parent_not_categorical(self):
        doc = _with_hyperparams(MINIMAL, tunable={'depth': {'type': 'int', 'range': [1, 3], 'default': 1}},
                                conditional={'gamma': {'parent': 'depth', 'branches': {'1': None}}})
        self.assertEqual(self._codes(doc), ['ConditionalParentNotCategorical'])

    def test_branch_mismatch(self):
        """Every value of the parent's domain needs exactly one branch."""
        doc = _with_hyperparams(MINIMAL, tunable={'kernel': {'type': 'categorical', 'values': ['linear', 'rbf'],
                                                             'default': 'rbf'}},
                                conditional={'gamma': {'parent': 'kernel', 'branches': {'rbf': None}}})
        self.assertEqual(self._codes(doc), ['BranchMismatch'])

    def test_overlapping_and_duplicate_names(self):
        """Hyperparameter sets must be disjoint and I/O names unique."""
        doc = _with_hyperparams(MINIMAL, fixed={'k': 1}, tunable={'k': {'type': 'int', 'range': [1, 3], 'default': 1}})
        self.assertEqual(self._codes(doc), ['OverlappingHyperparam'])

        doc = json.loads(json.dumps(MINIMAL))
        doc['produce']['outputs'].append({'name': 'X', 'type': 'table'})
        self.assertEqual(self._codes(doc), ['DuplicateIOName'])

    def test_empty_outputs(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc['produce']['outputs'] = []
        self.assertEqual(self._codes(doc), ['EmptyOutputs'])

    def test_validation_is_pure(self):
        """Validating twice should give the same violations."""
        annotation = parse_annotation(json.dumps(dict(MINIMAL, implementation='Missing')))
        self.assertEqual(validate_annotation(annotation, self.registry),
                         validate_annotation(annotation, self.registry))


class TestCatalog(unittest.TestCase):
    """Tests loading annotation directories into catalogs."""

    def setUp(self):
        self.environ = dict(os.environ)
        self.workdir = tempfile.mkdtemp()

    def tearDown(self):
        os.environ = self.environ
        shutil.rmtree(self.workdir, ignore_errors=True)

    def _directory(self, name, *docs):
        path = os.path.join(self.workdir, name)
        os.makedirs(path)
        for index, doc in enumerate(docs):
            with open(os.path.join(path, '{}.{}.json'.format(index, doc['name'])), 'w') as fp:
                json.dump(doc, fp)
        return path

    def test_bundled_catalog(self):
        """The bundled catalog should hold one entry per shipped annotation file."""
        catalog = load_catalog([BUNDLED_CATALOG_DIR])
        files = [name for name in os.listdir(BUNDLED_CATALOG_DIR) if name.endswith('.json')]
        self.assertEqual(len(catalog), len(files))
        self.assertIn('bazaar.SimpleImputer', catalog)
        self.assertTrue(catalog.source_path('bazaar.SimpleImputer').endswith('bazaar.SimpleImputer.json'))

    def test_empty_directory(self):
        self.assertEqual(len(load_catalog([self._directory('empty')])), 0)

    def test_lookup(self):
        """Lookups should return the parsed annotation, and unknown names should raise."""
        catalog = load_catalog([os.path.join(RESOURCES, 'catalogs', 'toy')])
        with open(os.path.join(RESOURCES, 'catalogs', 'toy', 'toy.Classifier.json')) as fp:
            self.assertEqual(catalog['toy.Classifier'], parse_annotation(fp.read()))
        with self.assertRaises(UnknownPrimitive):
            catalog['toy.Missing']

    def test_duplicate_primitive(self):
        """Identical names in two directories should clash unless shadowing is allowed."""
        first = self._directory('first', dict(MINIMAL, name='bazaar.SimpleImputer'))
        shadow = dict(MINIMAL, name='bazaar.SimpleImputer', description='shadow')
        second = self._directory('second', shadow)
        with self.assertRaises(DuplicatePrimitive):
            load_catalog([first, second])
        catalog = load_catalog([first, second], allow_shadowing=True)
        self.assertEqual(catalog['bazaar.SimpleImputer'].description, 'shadow')

    def test_duplicate_within_directory(self):
        """Duplicates within one directory are an error even with shadowing."""
        path = self._directory('twice', MINIMAL, MINIMAL)
        with self.assertRaises(DuplicatePrimitive):
            load_catalog([path], allow_shadowing=True)

    def test_invalid_annotation_provenance(self):
        """A failing file should be named by the error."""
        path = self._directory('bad', dict(MINIMAL, implementation='NoSuchPrimitive'))
        with self.assertRaises(InvalidAnnotation) as context:
            load_catalog([path])
        self.assertIn(path, context.exception.reason)
        self.assertEqual(context.exception.violations[0].code, 'UnknownImplementation')

    def test_search(self):
        """Catalog search should filter by modality and text."""
        catalog = load_catalog([BUNDLED_CATALOG_DIR])
        names = [annotation.name for annotation in catalog.search(modality='benchmark')]
        self.assertEqual(names, ['bazaar.BraninObjective'])
        names = [annotation.name for annotation in catalog.search(text='SCALER')]
        self.assertEqual(sorted(names), ['bazaar.MinMaxScaler', 'bazaar.StandardScaler'])

    def test_catalog_manager_env_vars(self):
        """Env vars should be honored for the catalog manager's traitlets."""
        toy = os.path.join(RESOURCES, 'catalogs', 'toy')
        orion = os.path.join(RESOURCES, 'catalogs', 'orion')
        os.environ['BAZAAR_CATALOG'] = os.pathsep.join([toy, orion])
        os.environ['BAZAAR_ALLOW_SHADOWING'] = 'true'

        manager = CatalogManager()

        self.assertEqual(manager.catalog_paths, [toy, orion])
        self.assertTrue(manager.allow_shadowing)
        catalog = manager.catalog
        self.assertIn('bazaar.StandardScaler', catalog)
        self.assertIn('toy.Classifier', catalog)
        self.assertIn('orion.find_anomalies', catalog)
        self.assertIs(manager.catalog, catalog)

    def test_catalog_manager_skips_missing_directory(self):
        manager = CatalogManager(catalog_paths=[os.path.join(self.workdir, 'absent')], include_bundled=False)
        self.assertEqual(len(manager.catalog), 0)


if __name__ == '__main__':
    unittest.main()
