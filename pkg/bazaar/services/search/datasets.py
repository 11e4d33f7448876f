# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Bundled synthetic tasks and the Branin benchmark template.

The tasks are generated deterministically from a seed, so ``make_tasks`` writes
byte-identical folders on every run.
"""

import json
import logging
import os

import numpy as np
import pandas as pd

from ..execution.context import Context
from ..execution.engine import fit
from ..pipelines.description import parse_description
from ..pipelines.templates import bind, make_template
from .tasks import PIPELINES_DIR, TASK_FILE, TEST_FILE, TRAIN_FILE

TEST_FRACTION = 0.25
BRANIN_PRIMITIVE = 'bazaar.BraninObjective'


def blobs(seed=0, n_rows=400):
    """Three Gaussian classes in four numeric features."""
    rng = np.random.default_rng([seed, 1])
    centers = np.array([[0.0, 0.0, 0.0, 0.0], [2.5, 1.0, -1.0, 0.5], [0.5, 3.0, 1.5, -1.5]])
    labels = np.array(['setosa', 'versicolor', 'virginica'])
    classes = rng.integers(len(centers), size=n_rows)
    features = centers[classes] + rng.normal(scale=1.0, size=(n_rows, centers.shape[1]))
    frame = pd.DataFrame(np.round(features, 4), columns=['sepal_length', 'sepal_width', 'petal_length',
                                                          'petal_width'])
    frame['species'] = labels[classes]
    doc = {'id': 'synthetic_blobs', 'data_modality': 'single_table', 'problem_type': 'classification',
           'metric': 'accuracy', 'target': 'species'}
    return doc, frame


def churn(seed=0, n_rows=600):
    """Binary churn labels from numeric and categorical columns, with missing cells."""
    rng = np.random.default_rng([seed, 2])
    tenure = rng.integers(1, 72, size=n_rows).astype(np.float64)
    charges = np.round(rng.uniform(20, 120, size=n_rows), 2)
    plan = rng.choice(['basic', 'plus', 'pro'], size=n_rows, p=[0.5, 0.3, 0.2])
    region = rng.choice(['north', 'south', 'east', 'west'], size=n_rows)
    logit = 1.5 - 0.06 * tenure + 0.02 * charges + np.where(plan == 'basic', 0.8, -0.6) + \
        np.where(region == 'south', 0.5, 0.0)
    churned = np.where(rng.random(n_rows) < 1 / (1 + np.exp(-logit)), 'yes', 'no')

    frame = pd.DataFrame({'tenure': tenure, 'monthly_charges': charges, 'plan': plan, 'region': region})
    frame = frame.astype(object)
    for column in ('tenure', 'plan'):
        missing = rng.random(n_rows) < 0.05
        frame.loc[missing, column] = ''
    frame['churned'] = churned
    doc = {'id': 'synthetic_churn', 'data_modality': 'single_table', 'problem_type': 'classification',
           'metric': 'f1_macro', 'target': 'churned'}
    return doc, frame


def friedman(seed=0, n_rows=500):
    """The Friedman #1 regression problem: five informative and three noise features."""
    rng = np.random.default_rng([seed, 3])
    X = rng.random((n_rows, 8))
    y = 10 * np.sin(np.pi * X[:, 0] * X[:, 1]) + 20 * (X[:, 2] - 0.5) ** 2 + 10 * X[:, 3] + 5 * X[:, 4] + \
        rng.normal(scale=1.0, size=n_rows)
    frame = pd.DataFrame(np.round(X, 5), columns=['x{}'.format(i) for i in range(X.shape[1])])
    frame['target'] = np.round(y, 5)
    doc = {'id': 'synthetic_friedman', 'data_modality': 'single_table', 'problem_type': 'regression',
           'metric': 'r2', 'target': 'target'}
    return doc, frame


BUNDLED_TASKS = (blobs, churn, friedman)


def split(frame, seed=0, test_fraction=TEST_FRACTION):
    """Shuffled train/test split of ``frame``."""
    rng = np.random.default_rng([seed, 0])
    order = rng.permutation(len(frame))
    n_test = int(round(len(frame) * test_fraction))
    test, train = np.sort(order[:n_test]), np.sort(order[n_test:])
    return frame.iloc[train].reset_index(drop=True), frame.iloc[test].reset_index(drop=True)


def write_task_folder(path, doc, train, test, pipelines=None):
    """Writes ``task.json``, ``train.csv``, ``test.csv`` and optional pipeline descriptions."""
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, TASK_FILE), 'w', encoding='utf-8') as fp:
        json.dump(doc, fp, indent=4, sort_keys=True)
        fp.write('\n')
    train.to_csv(os.path.join(path, TRAIN_FILE), index=False)
    test.to_csv(os.path.join(path, TEST_FILE), index=False)
    for name, description in sorted((pipelines or {}).items()):
        os.makedirs(os.path.join(path, PIPELINES_DIR), exist_ok=True)
        with open(os.path.join(path, PIPELINES_DIR, '{}.json'.format(name)), 'w', encoding='utf-8') as fp:
            json.dump(description, fp, indent=4, sort_keys=True)
    return path


def make_tasks(out_dir, seed=0, log=None):
    """Writes the bundled synthetic tasks under ``out_dir``; returns their folders."""
    log = log or logging.getLogger(__name__)
    paths = []
    for generator in BUNDLED_TASKS:
        doc, frame = generator(seed)
        train, test = split(frame, seed)
        path = write_task_folder(os.path.join(out_dir, doc['id']), doc, train, test)
        log.info("Wrote task '{}' ({} train / {} test rows) to {}".format(doc['id'], len(train), len(test), path))
        paths.append(path)
    return paths


def branin_template(catalog):
    """A template whose only step is the Branin objective, tunable over x1 and x2."""
    description = parse_description({'name': 'branin', 'primitives': [BRANIN_PRIMITIVE], 'outputs': ['score'],
                                     'modalities': ['benchmark']})
    return make_template(description, catalog, source_outputs=())


def evaluate_objective(template, assignment, registry, seed=0):
    """Runs a source-less template and returns its ``score`` output."""
    ctx = Context()
    fit(bind(template, assignment), ctx, registry, seed=seed)
    return float(ctx['score'])
