# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Append-only JSON-lines store of search trials and search summaries."""

import json
import logging
import math
import os
import threading

from dataclasses import dataclass, field

from jupyter_core.paths import jupyter_data_dir
from traitlets import Unicode, default
from traitlets.config.configurable import LoggingConfigurable

from ..tuning.space import assignment_to_json

store_lock = threading.Lock()

RESULTS_DIR_NAME = os.path.join("bazaar", "results")
RESULTS_FILE_NAME = "results.jsonl"


def _finite(value):
    return value if value is None or math.isfinite(value) else None


def run_id(task_id, tuner, selector, seed):
    return '{}:{}:{}:{}'.format(task_id, tuner, selector, seed)


def trial_record(run, trial):
    """The store line of one SearchTrial; ``run`` holds task_id, tuner, selector and seed."""
    return {
        'type': 'trial',
        'run_id': run_id(run['task_id'], run['tuner'], run['selector'], run['seed']),
        'task_id': run['task_id'],
        'template_id': trial.template_id,
        'template_name': trial.template_name,
        'lambda': assignment_to_json(trial.assignment),
        'cv_score': trial.cv_score,
        'cv_sd': trial.cv_sd,
        'elapsed_s': trial.elapsed_s,
        'iteration': trial.iteration,
        'status': trial.status,
        'is_default': trial.is_default,
        'seed': run['seed'],
        'tuner': run['tuner'],
        'selector': run['selector'],
        'error': trial.error,
    }


def summary_record(run, result, metric=None):
    """The terminal store line of a completed search."""
    best = result.best_trial
    return {
        'type': 'summary',
        'run_id': run_id(run['task_id'], run['tuner'], run['selector'], run['seed']),
        'task_id': result.task_id,
        'metric': metric,
        'best_template_id': best.template_id,
        'best_template_name': best.template_name,
        'best_lambda': assignment_to_json(best.assignment),
        'cv_score': result.cv_score,
        'cv_sd': result.cv_sd,
        'test_score': _finite(result.test_score),
        'default_score': result.default_score,
        'improvement_sd': result.improvement,
        'zero_variance': result.zero_variance,
        'trials': len(result.trials),
        'failed': result.failed,
        'checkpoints': {mark: None if trial is None else trial.cv_score
                        for mark, trial in sorted(result.checkpoints.items())},
        'seed': run['seed'],
        'tuner': run['tuner'],
        'selector': run['selector'],
    }


@dataclass(frozen=True)
class StoreContents:
    trials: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    corrupt_lines: list = field(default_factory=list)  # 1-based line numbers that were skipped


def read_store(path, log=None):
    """Parses a store file; unparseable lines are skipped with a warning and counted.

    A missing file reads as an empty store.
    """
    log = log or logging.getLogger(__name__)
    contents = StoreContents()
    if not os.path.exists(path):
        log.warning("Results store '{}' does not exist; treating it as empty.".format(path))
        return contents
    with open(path, encoding='utf-8') as fp:
        for line_no, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                kind = record['type']
            except (ValueError, KeyError, TypeError):
                log.warning("Skipping corrupt line {} of results store '{}'".format(line_no, path))
                contents.corrupt_lines.append(line_no)
                continue
            if kind == 'trial':
                contents.trials.append(record)
            elif kind == 'summary':
                contents.summaries.append(record)
            else:
                log.warning("Skipping line {} of results store '{}': unknown record type '{}'".format(
                    line_no, path, kind))
                contents.corrupt_lines.append(line_no)
    return contents


class ResultsStore(LoggingConfigurable):
    """Appends search trials and summaries to a JSON-lines file.

    Every record is written as one whole line and flushed, so a crash loses at most
    the line being written and concurrent readers only ever see complete lines.
    """

    results_dir_env = 'BAZAAR_RESULTS_DIR'
    results_dir = Unicode(config=True,
                          help="""Directory of the default results store. Default is
                          <jupyter_data_dir>/bazaar/results (BAZAAR_RESULTS_DIR env var)""")

    @default('results_dir')
    def results_dir_default(self):
        return os.getenv(self.results_dir_env, os.path.join(jupyter_data_dir(), RESULTS_DIR_NAME))

    results_file = Unicode(config=True,
                           help="""Path of the results store; results.jsonl under results_dir by default.""")

    @default('results_file')
    def results_file_default(self):
        return os.path.join(self.results_dir, RESULTS_FILE_NAME)

    def __init__(self, **kwargs):
        super(ResultsStore, self).__init__(**kwargs)
        self._announced = False

    @property
    def path(self):
        return os.path.abspath(self.results_file)

    def append(self, record):
        line = json.dumps(record, sort_keys=True, separators=(',', ':'), allow_nan=False) + '\n'
        with store_lock:
            directory = os.path.dirname(self.path)
            if directory and not os.path.isdir(directory):
                os.makedirs(directory, exist_ok=True)
            with open(self.path, 'a', encoding='utf-8') as fp:
                fp.write(line)
                fp.flush()
        if not self._announced:
            self.log.info("Writing results to '{}'".format(self.path))
            self._announced = True

    def append_trial(self, run, trial):
        self.append(trial_record(run, trial))

    def append_summary(self, run, result, metric=None):
        self.append(summary_record(run, result, metric))
        self.log.debug("Search summary of task '{}' written to '{}'".format(result.task_id, self.path))

    def read(self):
        return read_store(self.path, log=self.log)
