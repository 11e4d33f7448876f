# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Tests for tasks, scoring, cross-validation and the search loop."""

import math
import os
import shutil
import tempfile
import unittest

from unittest import mock

import numpy as np
import pandas as pd

from bazaar.errors import (BudgetExhaustedWithNoSuccess, FoldDegenerate, MissingTarget, NoTemplatesForTask,
                              SchemaMismatch, SearchError, ShapeMismatch, SingularKernel, TaskError)
from bazaar.services.annotations.catalogmanager import BUNDLED_CATALOG_DIR, load_catalog
from bazaar.services.pipelines.description import load_description
from bazaar.services.pipelines.templates import bind, make_template
from bazaar.services.primitives.registry import default_registry
from bazaar.services.search import datasets
from bazaar.services.search.scoring import get_scorer
from bazaar.services.search.searcher import (BUNDLED_TEMPLATES_DIR, Budget, SearchTrial, best_trial,
                                                checkpoint_bests, format_checkpoint, improvement_sd,
                                                load_available_templates, parse_checkpoint, search)
from bazaar.services.search.tasks import ingest_task, parse_task
from bazaar.services.search.validation import cross_validate_score, kfold_indices, make_folds

RESOURCES = os.path.join(os.path.dirname(__file__), 'resources')
TASKS = os.path.join(RESOURCES, 'tasks')


def bundled_template(name, catalog):
    return make_template(load_description(os.path.join(BUNDLED_TEMPLATES_DIR, name + '.json')), catalog)


def trial(iteration, score, finished_s=0.0, template_id='t'):
    return SearchTrial(iteration=iteration, template_id=template_id, template_name=template_id, assignment={},
                       cv_score=score, cv_sd=0.0 if score is not None else None, elapsed_s=0.0,
                       finished_s=finished_s, status='ok' if score is not None else 'failed')


class TestTasks(unittest.TestCase):
    """Tests task documents and folder ingestion."""

    def test_ingest(self):
        """Missing targets should drop rows and column types should come from the train split."""
        data = ingest_task(os.path.join(TASKS, 'tiny_regression'))
        self.assertEqual(data.task.data_modality, 'single_table')
        self.assertEqual(data.column_types, {'size': 'numeric', 'color': 'categorical', 'age': 'numeric'})
        self.assertEqual(len(data.X_train), 20)
        self.assertEqual(data.y_train.dtype, np.float64)
        self.assertTrue(pd.isna(data.X_train['color'][4]))
        self.assertTrue(math.isnan(data.X_train['age'][8]))
        self.assertTrue(math.isnan(data.X_test['age'][3]))
        self.assertEqual(data.X_test['color'][6], 'purple')
        self.assertEqual(data.y_test.tolist(), [7.0, 13.0, 22.0, 25.0, 31.0, 40.0, 14.0])
        self.assertEqual(data.classes, [])

    def test_schema_mismatch(self):
        with self.assertRaises(SchemaMismatch) as context:
            ingest_task(os.path.join(TASKS, 'mismatched_columns'))
        self.assertIn('order differs', context.exception.reason)

    def test_missing_target(self):
        with self.assertRaises(MissingTarget):
            ingest_task(os.path.join(TASKS, 'missing_target'))

    def test_parse_task(self):
        """The problem type should follow from the metric when omitted."""
        task = parse_task({'metric': 'f1_macro', 'target': 'label', 'data_modality': 'Single-Table'}, '/data/churn/')
        self.assertEqual(task.problem_type, 'classification')
        self.assertEqual(task.data_modality, 'single_table')
        self.assertEqual(task.id, 'churn')
        self.assertEqual(task.source_outputs, ('X', 'y'))
        with self.assertRaises(TaskError):
            parse_task({'metric': 'auc', 'target': 'label'})
        with self.assertRaises(TaskError):
            parse_task({'metric': 'mse', 'problem_type': 'classification', 'target': 'label'})
        with self.assertRaises(MissingTarget):
            parse_task({'metric': 'mse'})
        with self.assertRaises(TaskError):
            ingest_task(os.path.join(TASKS, 'no_such_task'))

    def test_iris_shaped_task(self):
        """A 150-row, four-feature task with three species should report three classes."""
        workdir = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, workdir, True)
        doc, frame = datasets.blobs(seed=0, n_rows=150)
        data = ingest_task(datasets.write_task_folder(os.path.join(workdir, 'iris'), doc, frame, frame.head(30)))
        self.assertEqual(data.X_train.shape, (150, 4))
        self.assertEqual(data.task.problem_type, 'classification')
        self.assertEqual(data.classes, ['setosa', 'versicolor', 'virginica'])
        registry = default_registry()
        state = registry.fit('UniqueCounter', {}, {'y': data.y_train}, 0)
        self.assertEqual(len(registry.produce('UniqueCounter', {}, state, {})['classes']), 3)


class TestScoring(unittest.TestCase):
    """Tests the oriented scorers."""

    def test_classification_metrics(self):
        y_true, y_pred = ['a', 'a', 'b', 'b'], ['a', 'b', 'b', 'b']
        self.assertEqual(get_scorer('accuracy')(y_true, y_pred), 0.75)
        self.assertAlmostEqual(get_scorer('f1_macro')(y_true, y_pred), (2 / 3 + 4 / 5) / 2)

    def test_regression_metrics(self):
        """Errors should be negated so that higher is always better."""
        scorer = get_scorer('mse')
        score = scorer([1.0, 2.0, 3.0], [1.0, 2.0, 5.0])
        self.assertAlmostEqual(score, -4 / 3)
        self.assertAlmostEqual(scorer.raw(score), 4 / 3)
        self.assertAlmostEqual(get_scorer('r2')([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]), 1.0)
        self.assertAlmostEqual(get_scorer('r2')([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]), 0.0)
        self.assertEqual(get_scorer('r2')([2.0, 2.0], [2.0, 3.0]), 0.0)

    def test_scorer_errors(self):
        with self.assertRaises(ShapeMismatch):
            get_scorer('accuracy')(['a'], ['a', 'b'])
        with self.assertRaises(ShapeMismatch):
            get_scorer('mse')([1.0], ['a'])
        with self.assertRaises(ValueError):
            get_scorer('auc')


class TestValidation(unittest.TestCase):
    """Tests fold construction and cross-validation."""

    def test_kfold_indices(self):
        """Folds should partition the rows with sizes differing by at most one."""
        folds = kfold_indices(np.zeros(23), 5, seed=1)
        self.assertEqual(sorted(np.concatenate(folds).tolist()), list(range(23)))
        self.assertEqual(sorted(len(fold) for fold in folds), [4, 4, 5, 5, 5])
        self.assertEqual([fold.tolist() for fold in kfold_indices(np.zeros(23), 5, seed=1)],
                         [fold.tolist() for fold in folds])
        with self.assertRaises(SearchError):
            kfold_indices(np.zeros(3), 1)
        with self.assertRaises(SearchError):
            kfold_indices(np.zeros(3), 4)

    def test_stratified_folds(self):
        y = np.array(['a'] * 10 + ['b'] * 5)
        for fold in kfold_indices(y, 5, seed=2, stratified=True):
            self.assertEqual(sorted(y[fold].tolist()), ['a', 'a', 'b'])

    def test_degenerate_folds(self):
        with self.assertRaises(FoldDegenerate):
            make_folds(np.array(['a'] * 5 + ['b']), 2, stratified=True)
        self.assertEqual(len(make_folds(np.array(['a'] * 5 + ['b']), 2)), 2)

    def test_cross_validate_score(self):
        catalog = load_catalog([BUNDLED_CATALOG_DIR])
        _, frame = datasets.blobs(seed=0, n_rows=60)
        X, y = frame.drop(columns=['species']), frame['species'].to_numpy()
        template = bundled_template('single_table.classification.knn', catalog)
        pipeline = bind(template, template.default_lambda())
        mean, sd = cross_validate_score(get_scorer('accuracy'), pipeline, X, y, 3, seed=0,
                                        registry=default_registry())
        self.assertGreater(mean, 0.5)
        self.assertLessEqual(mean, 1.0)
        self.assertGreaterEqual(sd, 0.0)
        self.assertEqual(cross_validate_score(get_scorer('accuracy'), pipeline, X, y, 3, seed=0), (mean, sd))


class TestSearchBookkeeping(unittest.TestCase):
    """Tests budgets, checkpoints and the improvement metric."""

    def test_improvement(self):
        improvement, zero_variance = improvement_sd([0.5, 0.6, 0.7], 0.5)
        self.assertAlmostEqual(improvement, 2.0)
        self.assertFalse(zero_variance)
        self.assertEqual(improvement_sd([0.4, 0.4, 0.4], 0.4), (0.0, True))
        self.assertEqual(improvement_sd([0.4], 0.4), (0.0, True))
        self.assertEqual(improvement_sd([0.7, 0.2], 0.7)[0], 0.0)
        self.assertAlmostEqual(improvement_sd([trial(1, 0.5), trial(2, None), trial(3, 0.7), trial(4, 0.6)], 0.5)[0],
                               2.0)

    def test_checkpoint_marks(self):
        self.assertEqual(parse_checkpoint('iter:3'), ('iter', 3))
        self.assertEqual(parse_checkpoint('5'), ('iter', 5))
        self.assertEqual(parse_checkpoint('time:1.5'), ('time', 1.5))
        self.assertEqual(format_checkpoint(('time', 60.0)), 'time:60')
        for mark in ('steps:3', 'iter:0', 'time:-1'):
            with self.assertRaises(ValueError):
                parse_checkpoint(mark)

    def test_budget(self):
        budget = Budget(4, checkpoints=('iter:2', 'iter:1', 'iter:2'))
        self.assertEqual(budget.checkpoints, (('iter', 1), ('iter', 2)))
        self.assertTrue(budget.exhausted(4, 0.0))
        self.assertFalse(budget.exhausted(3, 1e6))
        self.assertTrue(Budget(4, time_limit=2.0).exhausted(0, 2.0))
        with self.assertRaises(SearchError):
            Budget(0)
        with self.assertRaises(SearchError):
            Budget(2, checkpoints=('iter:3',))
        with self.assertRaises(SearchError):
            Budget(2, time_limit=1.0, checkpoints=('time:5',))

    def test_checkpoint_bests(self):
        """Iteration marks cover earlier iterations, time marks cover trials finished in time."""
        trials = [trial(1, 0.3, 0.5), trial(2, 0.9, 2.5), trial(3, None, 3.0), trial(4, 0.9, 3.5)]
        bests = checkpoint_bests(trials, (('iter', 1), ('iter', 4), ('time', 1.0), ('time', 0.1)))
        self.assertIs(bests['iter:1'], trials[0])
        self.assertIs(bests['iter:4'], trials[1])
        self.assertIs(bests['time:1'], trials[0])
        self.assertIsNone(bests['time:0.1'])
        self.assertIsNone(best_trial([trial(1, None)]))


class TestSearch(unittest.TestCase):
    """Tests the search loop on small generated tasks."""

    @classmethod
    def setUpClass(cls):
        cls.catalog = load_catalog([BUNDLED_CATALOG_DIR])
        cls.registry = default_registry()
        cls.workdir = tempfile.mkdtemp()
        doc, frame = datasets.blobs(seed=0, n_rows=60)
        train, test = datasets.split(frame, seed=0)
        custom = {'name': 'custom_tree', 'problem_types': ['classification'], 'modalities': ['single_table'],
                  'primitives': ['bazaar.UniqueCounter', 'bazaar.ClassEncoder', 'bazaar.TableToMatrix',
                                 'bazaar.DecisionTreeClassifier', 'bazaar.ClassDecoder']}
        cls.task_path = datasets.write_task_folder(os.path.join(cls.workdir, doc['id']), doc, train, test,
                                                   pipelines={'custom_tree': custom})
        cls.data = ingest_task(cls.task_path)
        cls.templates = [bundled_template('single_table.classification.tree', cls.catalog),
                         bundled_template('single_table.classification.knn', cls.catalog)]

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.workdir, ignore_errors=True)

    def run_search(self, budget, templates=None, seed=0, **kwargs):
        return search(self.data, self.templates if templates is None else templates, budget, tuner_kind='random',
                      seed=seed, cv_folds=3, registry=self.registry, **kwargs)

    def test_available_templates(self):
        """Bundled templates should be filtered by problem type; task folder pipelines come last."""
        templates = load_available_templates(self.data.task, self.catalog)
        self.assertEqual(len(templates), 8)
        self.assertEqual(templates[-1].name, 'custom_tree')
        names = [template.name for template in templates]
        self.assertIn('single_table.classification.forest[feature_subsampling=fraction]', names)
        regression = parse_task({'metric': 'r2', 'target': 'target'})
        self.assertEqual(len(load_available_templates(regression, self.catalog)), 6)
        with self.assertRaises(NoTemplatesForTask):
            load_available_templates(regression, self.catalog, include_bundled=False)

    def test_search(self):
        """Every template should first be tried with its defaults; the best trial wins."""
        seen = []
        result = self.run_search(Budget(4, checkpoints=('iter:2',)), on_trial=seen.append)
        self.assertEqual(len(result.trials), 4)
        self.assertEqual(list(result.trials), seen)
        self.assertEqual([trial.template_id for trial in result.trials[:2]],
                         [template.id for template in self.templates])
        self.assertTrue(all(trial.is_default for trial in result.trials[:2]))
        self.assertFalse(any(trial.is_default for trial in result.trials[2:]))
        self.assertEqual(result.trials[0].assignment, self.templates[0].default_lambda())
        self.assertEqual(result.cv_score, max(trial.cv_score for trial in result.trials))
        self.assertEqual(result.default_score, result.trials[0].cv_score)
        self.assertIs(result.checkpoints['iter:2'], best_trial(result.trials[:2]))
        self.assertTrue(0.0 <= result.test_score <= 1.0)
        bests = result.best_so_far()
        self.assertEqual(bests, sorted(bests))
        self.assertEqual([trial.iteration for trial in result.trials], [1, 2, 3, 4])

    def test_search_is_deterministic(self):
        first = self.run_search(Budget(3), seed=4)
        second = self.run_search(Budget(3), seed=4)
        self.assertEqual([trial.cv_score for trial in first.trials], [trial.cv_score for trial in second.trials])
        self.assertEqual([trial.assignment for trial in first.trials], [trial.assignment for trial in second.trials])
        self.assertEqual(first.test_score, second.test_score)

    def test_budget_of_one(self):
        result = self.run_search(Budget(1))
        self.assertEqual(len(result.trials), 1)
        self.assertEqual(result.best_template.id, self.templates[0].id)
        self.assertEqual((result.improvement, result.zero_variance), (0.0, True))
        self.assertIsNotNone(result.fitted)

    def test_failing_templates(self):
        """A template that cannot fit the task should record failures without stopping the search."""
        failing = bundled_template('single_table.regression.linear', self.catalog)
        result = self.run_search(Budget(3), templates=[failing, self.templates[0]])
        self.assertEqual(result.trials[0].status, 'failed')
        self.assertIsNone(result.trials[0].cv_score)
        self.assertIsNotNone(result.trials[0].error)
        self.assertEqual(result.best_template.id, self.templates[0].id)
        self.assertEqual(result.failed, sum(not trial.succeeded for trial in result.trials))
        with self.assertRaises(BudgetExhaustedWithNoSuccess):
            self.run_search(Budget(2), templates=[failing])

    def test_tuner_failure_falls_back_to_sampling(self):
        """A GP that cannot be fitted should not end the search."""
        failing_fit = mock.patch('bazaar.services.tuning.tuners.gp_fit', side_effect=SingularKernel('singular'))
        with failing_fit as gp_fit, self.assertLogs('bazaar.services.search.searcher', level='WARNING') as logs:
            result = search(self.data, self.templates[:1], Budget(8), tuner_kind='gp-se-ei', cv_folds=3,
                            registry=self.registry)
        self.assertTrue(gp_fit.called)
        self.assertEqual(len(result.trials), 8)
        self.assertTrue(all(trial.succeeded for trial in result.trials))
        self.assertIsNotNone(result.best_pipeline)
        self.assertTrue(any('sampling uniformly' in line for line in logs.output))

    def test_no_templates(self):
        with self.assertRaises(NoTemplatesForTask):
            self.run_search(Budget(1), templates=[])

    def test_regression_search(self):
        data = ingest_task(os.path.join(TASKS, 'tiny_regression'))
        template = bundled_template('single_table.regression.tree', self.catalog)
        result = search(data, [template], Budget(2), tuner_kind='random', cv_folds=4, registry=self.registry)
        self.assertEqual(len(result.trials), 2)
        self.assertTrue(math.isfinite(result.test_score))


if __name__ == '__main__':
    unittest.main()
