# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Task folders: ``task.json`` metadata plus ``train.csv`` and ``test.csv`` splits.

A ``task.json`` looks like::

    {
        "id": "churn",
        "data_modality": "single_table",
        "problem_type": "classification",
        "metric": "f1_macro",
        "target": "churned",
        "source_outputs": ["X", "y"]
    }

``problem_type`` may be omitted when the metric implies it.  An optional
``pipelines/`` directory holds custom pipeline descriptions for the task.
"""

import json
import logging
import os

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ...errors import EmptySplit, MissingTarget, SchemaMismatch, TaskError
from ..execution.context import Context
from ..pipelines.graph import DEFAULT_SOURCE_OUTPUTS

TASK_FILE = 'task.json'
TRAIN_FILE = 'train.csv'
TEST_FILE = 'test.csv'
PIPELINES_DIR = 'pipelines'

PROBLEM_TYPES = ('classification', 'regression')
METRIC_PROBLEM_TYPES = {
    'accuracy': 'classification',
    'f1_macro': 'classification',
    'mse': 'regression',
    'r2': 'regression',
}
MISSING_TOKENS = ('', 'nan')


def normalize_modality(modality):
    return str(modality).strip().lower().replace(' ', '_').replace('-', '_')


@dataclass(frozen=True)
class Task:
    id: str
    data_modality: str
    problem_type: str
    metric: str
    target: str
    source_outputs: tuple = DEFAULT_SOURCE_OUTPUTS
    path: str = ''

    @property
    def train_path(self):
        return os.path.join(self.path, TRAIN_FILE)

    @property
    def test_path(self):
        return os.path.join(self.path, TEST_FILE)

    @property
    def pipelines_dir(self):
        return os.path.join(self.path, PIPELINES_DIR)

    def to_json(self):
        return {'id': self.id, 'data_modality': self.data_modality, 'problem_type': self.problem_type,
                'metric': self.metric, 'target': self.target, 'source_outputs': list(self.source_outputs)}


@dataclass(frozen=True)
class TaskData:
    """An ingested task: train features and target, test features and target."""
    task: Task
    X_train: pd.DataFrame
    y_train: np.ndarray
    X_test: pd.DataFrame
    y_test: np.ndarray
    column_types: dict  # column -> 'numeric' or 'categorical', inferred on train

    def train_context(self):
        return Context.from_dataset(self.X_train, self.y_train)

    def test_context(self):
        return Context.from_dataset(self.X_test)

    @property
    def classes(self):
        return sorted(set(self.y_train.tolist())) if self.task.problem_type == 'classification' else []


def parse_task(doc, path=''):
    """Builds a Task from the parsed ``task.json`` document."""
    if not isinstance(doc, dict):
        raise TaskError("task.json must hold an object")
    metric = doc.get('metric')
    if metric not in METRIC_PROBLEM_TYPES:
        raise TaskError("Unknown metric '{}'; expected one of {}".format(
            metric, ', '.join(sorted(METRIC_PROBLEM_TYPES))))
    problem_type = doc.get('problem_type', METRIC_PROBLEM_TYPES[metric])
    if problem_type not in PROBLEM_TYPES:
        raise TaskError("Unknown problem type '{}'".format(problem_type))
    if METRIC_PROBLEM_TYPES[metric] != problem_type:
        raise TaskError("Metric '{}' cannot score a {} task".format(metric, problem_type))
    if not doc.get('target'):
        raise MissingTarget("task.json does not name a target column")
    task_id = doc.get('id') or os.path.basename(os.path.normpath(path)) or 'task'
    return Task(id=str(task_id), data_modality=normalize_modality(doc.get('data_modality', 'single_table')),
                problem_type=problem_type, metric=metric, target=str(doc['target']),
                source_outputs=tuple(doc.get('source_outputs', DEFAULT_SOURCE_OUTPUTS)), path=path)


def load_task(path):
    filename = os.path.join(path, TASK_FILE)
    try:
        with open(filename, encoding='utf-8') as fp:
            doc = json.load(fp)
    except OSError as e:
        raise TaskError("Cannot read {}: {}".format(filename, e))
    except ValueError as e:
        raise TaskError("{} is not valid JSON: {}".format(filename, e))
    return parse_task(doc, path)


def is_missing(cells):
    """Boolean mask of the missing cells of a string column."""
    return cells.str.strip().str.lower().isin(MISSING_TOKENS)


def infer_column_type(cells):
    """``numeric`` if every non-missing cell parses as a number, else ``categorical``."""
    present = cells[~is_missing(cells)]
    parsed = pd.to_numeric(present, errors='coerce')
    return 'numeric' if not parsed.isna().any() else 'categorical'


def convert_column(cells, column_type):
    missing = is_missing(cells)
    if column_type == 'numeric':
        values = pd.to_numeric(cells.where(~missing, None), errors='coerce')
        return values.astype(np.float64)
    return cells.where(~missing, None).astype(object)


def _read_split(filename):
    try:
        return pd.read_csv(filename, dtype=str, keep_default_na=False, encoding='utf-8')
    except FileNotFoundError:
        raise TaskError("Missing split file {}".format(filename))
    except pd.errors.EmptyDataError:
        raise EmptySplit("{} holds no header and no rows".format(filename))


def _target(frame, task, split, log):
    cells = frame[task.target]
    missing = is_missing(cells)
    if missing.any():
        log.warning("Dropping {} row(s) of the {} split with a missing target".format(int(missing.sum()), split))
        frame, cells = frame[~missing].reset_index(drop=True), cells[~missing].reset_index(drop=True)
    if task.problem_type == 'classification':
        return frame, cells.str.strip().to_numpy(dtype=str)
    values = pd.to_numeric(cells, errors='coerce')
    if values.isna().any():
        raise SchemaMismatch("Target column '{}' of the {} split is not numeric".format(task.target, split))
    return frame, values.to_numpy(dtype=np.float64)


def ingest_task(path, log=None):
    """Loads a task folder into a TaskData.

    Column types are inferred on the train split and applied to the test split.
    Test cells of a numeric column that do not parse are treated as missing.

    Raises
    ------
    MissingTarget
        If the target column is absent from either split.
    SchemaMismatch
        If the feature columns of the splits differ.
    EmptySplit
        If a split has no rows.
    """
    log = log or logging.getLogger(__name__)
    task = load_task(path)
    train, test = _read_split(task.train_path), _read_split(task.test_path)
    for split, frame in (('train', train), ('test', test)):
        if task.target not in frame.columns:
            raise MissingTarget("Target column '{}' is missing from the {} split".format(task.target, split))
    train_columns = [column for column in train.columns if column != task.target]
    test_columns = [column for column in test.columns if column != task.target]
    if train_columns != test_columns:
        only_train = sorted(set(train_columns) - set(test_columns))
        only_test = sorted(set(test_columns) - set(train_columns))
        raise SchemaMismatch("Train and test columns differ (train only: {}; test only: {}{})".format(
            only_train or '-', only_test or '-', '' if only_train or only_test else '; order differs'))

    train, y_train = _target(train, task, 'train', log)
    test, y_test = _target(test, task, 'test', log)
    for split, frame in (('train', train), ('test', test)):
        if len(frame) == 0:
            raise EmptySplit("The {} split of task '{}' has no rows".format(split, task.id))

    column_types = {column: infer_column_type(train[column]) for column in train_columns}
    X_train = pd.DataFrame({column: convert_column(train[column], column_types[column])
                            for column in train_columns})
    X_test = pd.DataFrame({column: convert_column(test[column], column_types[column])
                           for column in train_columns})
    log.debug("Ingested task '{}': {} train row(s), {} test row(s), {} numeric / {} categorical column(s)".format(
        task.id, len(X_train), len(X_test), sum(kind == 'numeric' for kind in column_types.values()),
        sum(kind == 'categorical' for kind in column_types.values())))
    return TaskData(task=task, X_train=X_train, y_train=y_train, X_test=X_test, y_test=y_test,
                    column_types=column_types)
