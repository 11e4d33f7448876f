# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Acceptance runs of the search loop on the bundled tasks."""

import numpy as np

from bazaar.services.execution.context import Context
from bazaar.services.execution.engine import fit, produce
from bazaar.services.execution.serialization import load, save
from bazaar.services.pipelines.templates import bind
from bazaar.services.search.searcher import load_available_templates
from bazaar.services.store.resultsstore import summary_record, trial_record

from .test_base import TestBase

TIMING_FIELDS = ('elapsed_s', 'finished_s')


def without_timing(record):
    return {key: value for key, value in record.items() if key not in TIMING_FIELDS}


class TestSearchImprovement(TestBase):
    """
    GP-EI with UCB1 should never end below the default pipeline and should clearly
    improve on it for some task.
    """

    def test_improvement_over_defaults(self, budget, tasks_dir):
        improvements = []
        for data in self.get_tasks(tasks_dir):
            result = self.run_search(data, budget)
            assert result.default_score is not None
            assert result.cv_score >= result.default_score
            bests = [best for best in result.best_so_far() if best is not None]
            assert bests == sorted(bests)
            improvements.append(result.improvement)
        assert max(improvements) >= self.get_expected_min_improvement()


class TestDeterminism(TestBase):
    """Identical searches should write identical records, and fitted pipelines should survive a round trip."""

    def test_repeated_search(self, budget, tasks_dir):
        data = self.get_tasks(tasks_dir)[0]
        run = {'task_id': data.task.id, 'tuner': 'gp-se-ei', 'selector': 'ucb1', 'seed': 3}
        records = []
        for _ in range(2):
            result = self.run_search(data, min(budget, 12), seed=3)
            records.append([without_timing(trial_record(run, trial)) for trial in result.trials] +
                           [without_timing(summary_record(run, result, data.task.metric))])
        assert records[0] == records[1]

    def test_round_trip_predictions(self, tasks_dir):
        for data in self.get_tasks(tasks_dir):
            template = load_available_templates(data.task, self.catalog)[0]
            fitted = fit(bind(template, template.default_lambda()), data.train_context(), self.registry, seed=1)
            loaded = load(save(fitted), self.catalog, self.registry)
            output = fitted.pipeline.graph.sink_inputs[0]
            expected = produce(fitted, Context.from_dataset(data.X_test), self.registry)[output]
            actual = produce(loaded, Context.from_dataset(data.X_test), self.registry)[output]
            np.testing.assert_array_equal(actual, expected)
