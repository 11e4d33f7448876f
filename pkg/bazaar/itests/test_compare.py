# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Ablation harness: paired comparisons of searches over the bundled tasks."""

import pytest

from bazaar.services.store.reports import compare
from bazaar.services.store.resultsstore import StoreContents, summary_record

from .test_base import TestBase

HARNESS_BUDGET = 10


class TestCompareHarness(TestBase):

    def store_of(self, tasks_dir, tuner_kind='gp-se-ei', template_filter=None):
        summaries = []
        for data in self.get_tasks(tasks_dir):
            result = self.run_search(data, HARNESS_BUDGET, tuner_kind=tuner_kind, template_filter=template_filter)
            run = {'task_id': data.task.id, 'tuner': tuner_kind, 'selector': 'ucb1', 'seed': 0}
            summaries.append(summary_record(run, result, data.task.metric))
        return StoreContents(summaries=summaries)

    def check_harness(self, store_a, store_b):
        assert compare(store_a, store_a).tie_fraction == 1.0
        forward, backward = compare(store_a, store_b), compare(store_b, store_a)
        assert forward.win_fraction + backward.win_fraction + forward.tie_fraction == pytest.approx(1.0)
        assert (forward.wins, forward.losses) == (backward.losses, backward.wins)
        assert compare(store_a, store_b).to_json() == forward.to_json()

    def test_kernel_ablation(self, tasks_dir):
        self.check_harness(self.store_of(tasks_dir, 'gp-se-ei'), self.store_of(tasks_dir, 'gp-matern52-ei'))

    def test_primitive_ablation(self, tasks_dir):
        self.check_harness(self.store_of(tasks_dir, template_filter='.forest'),
                           self.store_of(tasks_dir, template_filter='.gbt'))
