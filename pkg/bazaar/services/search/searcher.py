# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""The search-and-evaluation loop.

Each iteration selects a template with the selector, asks that template's tuner for
an assignment (its defaults the first time a template is selected), scores the
bound pipeline by cross-validation and feeds the score back to both the selector
and the tuner.  The best pipeline is finally re-fitted on the whole train split and
scored on the test split.
"""

import glob
import logging
import math
import os
import time

from dataclasses import dataclass, field

import numpy as np

from traitlets import Float, Int, List, Unicode, default
from traitlets.config.configurable import LoggingConfigurable

from ...errors import (BazaarError, BudgetExhaustedWithNoSuccess, NoTemplatesForTask, NonFiniteScore,
                       SearchError, TuningError, log_and_raise)
from ..pipelines.description import load_description
from ..pipelines.templates import bind, derive_templates, make_hypertemplate
from ..selection.selectors import canonical_selector_kind, new_selector, select, selector_record
from ..tuning.tuners import canonical_tuner_kind, new_tuner, tuner_fit, tuner_propose, tuner_record, tuner_sample
from .scoring import get_scorer
from .tasks import METRIC_PROBLEM_TYPES
from .validation import cross_validate_score, fit_and_score, make_folds

BUNDLED_TEMPLATES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), 'templates')


def parse_checkpoint(mark):
    """Parses ``iter:<n>`` or ``time:<seconds>``; a bare number is an iteration mark."""
    if isinstance(mark, (tuple, list)):
        kind, value = mark
    elif isinstance(mark, str) and ':' in mark:
        kind, value = mark.split(':', 1)
    else:
        kind, value = 'iter', mark
    kind = {'iteration': 'iter', 'iter': 'iter', 'time': 'time'}.get(str(kind).strip().lower())
    if kind is None:
        raise ValueError("Unknown checkpoint mark '{}'".format(mark))
    value = int(value) if kind == 'iter' else float(value)
    if value <= 0:
        raise ValueError("Checkpoint mark '{}' must be positive".format(mark))
    return kind, value


def format_checkpoint(mark):
    kind, value = mark
    return '{}:{}'.format(kind, value if kind == 'iter' else '{:g}'.format(value))


@dataclass(frozen=True)
class Budget:
    max_iterations: int
    time_limit: float = None  # seconds
    checkpoints: tuple = ()  # parsed (kind, value) marks

    def __post_init__(self):
        if self.max_iterations is None or self.max_iterations < 1:
            raise SearchError("The search budget must allow at least one iteration")
        if self.time_limit is not None and self.time_limit <= 0:
            raise SearchError("The search time limit must be positive")
        marks = tuple(parse_checkpoint(mark) for mark in self.checkpoints)
        for kind, value in marks:
            if kind == 'iter' and value > self.max_iterations:
                raise SearchError("Checkpoint iter:{} lies beyond the budget of {} iteration(s)".format(
                    value, self.max_iterations))
            if kind == 'time' and self.time_limit is not None and value > self.time_limit:
                raise SearchError("Checkpoint time:{:g} lies beyond the time limit of {:g}s".format(
                    value, self.time_limit))
        object.__setattr__(self, 'checkpoints', tuple(sorted(set(marks))))

    def exhausted(self, iterations, elapsed):
        return iterations >= self.max_iterations or (self.time_limit is not None and elapsed >= self.time_limit)


@dataclass(frozen=True)
class SearchTrial:
    iteration: int  # 1-based
    template_id: str
    template_name: str
    assignment: dict
    cv_score: float  # None when the trial failed
    cv_sd: float
    elapsed_s: float
    finished_s: float  # seconds since the search started, at completion
    status: str  # 'ok' or 'failed'
    is_default: bool = False
    error: str = None

    @property
    def succeeded(self):
        return self.status == 'ok'


@dataclass(frozen=True)
class SearchResult:
    task_id: str
    best_template: object
    best_pipeline: object
    cv_score: float
    cv_sd: float
    test_score: float
    trials: tuple
    checkpoints: dict = field(default_factory=dict)  # mark -> best trial at that mark (or None)
    default_score: float = None
    improvement: float = 0.0
    zero_variance: bool = False
    fitted: object = None

    @property
    def best_trial(self):
        return best_trial(self.trials)

    def best_so_far(self):
        """CV score of the best successful trial after every iteration (None before the first)."""
        bests, current = [], None
        for trial in self.trials:
            if trial.succeeded and (current is None or trial.cv_score > current):
                current = trial.cv_score
            bests.append(current)
        return bests

    @property
    def failed(self):
        return sum(not trial.succeeded for trial in self.trials)


def best_trial(trials):
    """The successful trial with the highest CV score, ties going to the earliest."""
    best = None
    for trial in trials:
        if trial.succeeded and (best is None or trial.cv_score > best.cv_score):
            best = trial
    return best


def improvement_sd(records, default_score):
    """Improvement of the best score over ``default_score`` in standard deviations of all scores.

    ``records`` are scores or trials (only successful trials count).  Returns
    ``(improvement, zero_variance)``; with fewer than two scores or no score
    variance the improvement is 0 and ``zero_variance`` is True.
    The deviation is the sample standard deviation (ddof=1), so scores 0.5, 0.6 and
    0.7 with default 0.5 give an improvement of 2.0.
    """
    scores = [record.cv_score if isinstance(record, SearchTrial) else record for record in records
              if not isinstance(record, SearchTrial) or record.succeeded]
    scores = np.asarray([score for score in scores if score is not None], dtype=np.float64)
    if len(scores) < 2 or default_score is None:
        return 0.0, True
    sd = float(scores.std(ddof=1))
    if sd == 0.0:
        return 0.0, True
    return float((scores.max() - default_score) / sd), False


def checkpoint_bests(trials, checkpoints):
    """Best trial at each checkpoint mark.

    An iteration mark ``c`` covers trials with iteration <= c; a time mark covers
    trials that completed within that many seconds of the start of the search.
    """
    bests = {}
    for kind, value in checkpoints:
        if kind == 'iter':
            covered = [trial for trial in trials if trial.iteration <= value]
        else:
            covered = [trial for trial in trials if trial.finished_s <= value]
        bests[format_checkpoint((kind, value))] = best_trial(covered)
    return bests


def _template_documents(directory):
    return sorted(glob.glob(os.path.join(directory, '*.json')))


def _matches(description, task):
    problem_types = description.metadata.get('problem_types')
    modalities = description.metadata.get('modalities')
    if problem_types is not None and task.problem_type not in problem_types:
        return False
    if modalities is not None and task.data_modality not in modalities:
        return False
    return True


def load_available_templates(task, catalog, template_dirs=(), include_bundled=True, log=None):
    """Templates of every description whose tags match the task.

    Descriptions are read from the bundled templates, then ``template_dirs``, then the
    task's own ``pipelines/`` folder, each directory in file-name order.  A
    description without ``problem_types`` or ``modalities`` tags matches any task;
    descriptions of the task folder must match as well.  Hypertemplates are expanded
    and duplicate templates (same id) are kept once.

    Raises
    ------
    NoTemplatesForTask
        If no template matches.
    """
    log = log or logging.getLogger(__name__)
    directories = ([BUNDLED_TEMPLATES_DIR] if include_bundled else []) + list(template_dirs)
    if task.path:
        directories.append(task.pipelines_dir)

    templates, seen = [], set()
    for directory in directories:
        if not os.path.isdir(directory):
            if directory != task.pipelines_dir:
                log.warning("Template directory '{}' does not exist and is skipped.".format(directory))
            continue
        for filename in _template_documents(directory):
            try:
                description = load_description(filename)
                if not _matches(description, task):
                    continue
                hypertemplate = make_hypertemplate(description, catalog, task.source_outputs, log=log)
                derived = derive_templates(hypertemplate)
            except BazaarError as e:
                log.warning("Skipping template {}: {}".format(filename, e.reason))
                continue
            for template in derived:
                if template.id not in seen:
                    seen.add(template.id)
                    templates.append(template)
    if not templates:
        log_and_raise(log, NoTemplatesForTask("No template matches task '{}' ({} / {})".format(
            task.id, task.problem_type, task.data_modality)))
    log.debug("Loaded {} template(s) for task '{}'".format(len(templates), task.id))
    return templates


def _tuner_seed(seed, index):
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def propose_assignment(state, log):
    """Fits and queries a tuner; returns ``(state, assignment)``.

    When the GP cannot be fitted or queried the state is returned unchanged and the
    assignment is a uniform sample from the tuner's seeded stream.
    """
    try:
        state = tuner_fit(state)
        return state, tuner_propose(state)
    except (TuningError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        log.warning("Tuner proposal failed ({}); sampling uniformly instead.".format(e))
        return state, tuner_sample(state)


def search(data, templates, budget, tuner_kind='gp-se-ei', selector_kind='ucb1', seed=0, cv_folds=5,
           registry=None, on_trial=None, log=None):
    """Searches ``templates`` for the best pipeline of an ingested task.

    Parameters
    ----------
    data : TaskData
    templates : list of Template
    budget : Budget
    tuner_kind, selector_kind : str
    seed : int
        Seeds the folds, the tuners, the selector and every pipeline fit.
    cv_folds : int
    registry : NativeRegistry, optional
    on_trial : callable, optional
        Called with every SearchTrial as soon as it completes.

    Returns
    -------
    SearchResult

    Raises
    ------
    BudgetExhaustedWithNoSuccess
        If no trial succeeded.
    """
    log = log or logging.getLogger(__name__)
    if registry is None:
        from ..primitives.registry import default_registry
        registry = default_registry()
    if not templates:
        raise NoTemplatesForTask("No templates to search for task '{}'".format(data.task.id))
    task = data.task
    scorer = get_scorer(task.metric)
    tuner_kind = canonical_tuner_kind(tuner_kind)
    folds = make_folds(data.y_train, cv_folds, seed, METRIC_PROBLEM_TYPES[task.metric] == 'classification')

    by_id = {template.id: template for template in templates}
    order = list(by_id)
    tuners = {template_id: new_tuner(by_id[template_id].space, tuner_kind, _tuner_seed(seed, index))
              for index, template_id in enumerate(order)}
    selector = new_selector(canonical_selector_kind(selector_kind), seed)
    untried = set(order)
    trials = []
    started = time.monotonic()

    log.info("Searching {} template(s) for task '{}' (budget {} iteration(s){}, tuner {}, selector {})".format(
        len(order), task.id, budget.max_iterations,
        '' if budget.time_limit is None else ' or {:g}s'.format(budget.time_limit), tuner_kind, selector.kind))
    while not budget.exhausted(len(trials), time.monotonic() - started):
        iteration = len(trials) + 1
        template_id = select(selector, order)
        template = by_id[template_id]
        is_default = template_id in untried
        untried.discard(template_id)

        trial_start = time.monotonic()
        score, sd, error = None, None, None
        assignment = template.default_lambda()
        try:
            if not is_default:
                tuners[template_id], assignment = propose_assignment(tuners[template_id], log)
            pipeline = bind(template, assignment)
            score, sd = cross_validate_score(scorer, pipeline, data.X_train, data.y_train, cv_folds, seed=seed,
                                             registry=registry, folds=folds, log=log)
            if not math.isfinite(score):
                raise NonFiniteScore(score)
        except BazaarError as e:
            score, sd, error = None, None, e.reason
            log.warning("Trial {} of template '{}' failed: {}".format(iteration, template.name, error))
        now = time.monotonic()

        selector = selector_record(selector, template_id, score)
        if score is not None:
            tuners[template_id] = tuner_record(tuners[template_id], assignment, score, now - trial_start)
        else:
            succeeded = [trial.cv_score for trial in trials if trial.succeeded]
            if succeeded:
                tuners[template_id] = tuner_record(tuners[template_id], assignment, min(succeeded),
                                                   now - trial_start)

        trial = SearchTrial(iteration=iteration, template_id=template_id, template_name=template.name,
                            assignment=dict(assignment), cv_score=score, cv_sd=sd, elapsed_s=now - trial_start,
                            finished_s=now - started, status='ok' if score is not None else 'failed',
                            is_default=is_default, error=error)
        trials.append(trial)
        if score is not None:
            log.debug("Trial {}: template '{}' scored {:.6f} (sd {:.6f})".format(iteration, template.name, score, sd))
        if on_trial is not None:
            on_trial(trial)
        for mark in budget.checkpoints:
            if mark == ('iter', iteration):
                best = best_trial(trials)
                log.info("Checkpoint {}: best CV score {}".format(
                    format_checkpoint(mark), 'n/a' if best is None else '{:.6f}'.format(best.cv_score)))

    best = best_trial(trials)
    if best is None:
        log_and_raise(log, BudgetExhaustedWithNoSuccess("None of the {} trial(s) of task '{}' succeeded".format(
            len(trials), task.id)))

    best_template = by_id[best.template_id]
    best_pipeline = bind(best_template, best.assignment)
    test_score, fitted = fit_and_score(best_pipeline, scorer, data.X_train, data.y_train, data.X_test,
                                       data.y_test, registry, seed=seed, log=log)
    first = trials[0]
    default_score = first.cv_score if first.succeeded else next(
        (trial.cv_score for trial in trials if trial.succeeded and trial.is_default), None)
    improvement, zero_variance = improvement_sd(trials, default_score)
    log.info("Search of task '{}' finished after {} trial(s) ({} failed): best CV {:.6f} with '{}', test {:.6f}"
             .format(task.id, len(trials), sum(not trial.succeeded for trial in trials), best.cv_score,
                     best_template.name, test_score))
    return SearchResult(task_id=task.id, best_template=best_template, best_pipeline=best_pipeline,
                        cv_score=best.cv_score, cv_sd=best.cv_sd, test_score=test_score, trials=tuple(trials),
                        checkpoints=checkpoint_bests(trials, budget.checkpoints), default_score=default_score,
                        improvement=improvement, zero_variance=zero_variance, fitted=fitted)


class Searcher(LoggingConfigurable):
    """Runs searches with the configured budget, tuner, selector and folds."""

    cv_folds_env = 'BAZAAR_CV_FOLDS'
    cv_folds_default_value = 5
    cv_folds = Int(cv_folds_default_value, config=True,
                   help="""Number of cross-validation folds. (BAZAAR_CV_FOLDS env var)""")

    @default('cv_folds')
    def cv_folds_default(self):
        return int(os.getenv(self.cv_folds_env, self.cv_folds_default_value))

    seed_env = 'BAZAAR_SEED'
    seed_default_value = 0
    seed = Int(seed_default_value, config=True,
               help="""Seed of the folds, tuners, selector and pipeline fits. (BAZAAR_SEED env var)""")

    @default('seed')
    def seed_default(self):
        return int(os.getenv(self.seed_env, self.seed_default_value))

    tuner_env = 'BAZAAR_TUNER'
    tuner_default_value = 'gp-ei'
    tuner = Unicode(tuner_default_value, config=True,
                    help="""Tuner kind: gp-se-ei (alias gp-ei), gp-matern52-ei, gp-max or random.
                    (BAZAAR_TUNER env var)""")

    @default('tuner')
    def tuner_default(self):
        return os.getenv(self.tuner_env, self.tuner_default_value)

    selector_env = 'BAZAAR_SELECTOR'
    selector_default_value = 'ucb1'
    selector = Unicode(selector_default_value, config=True,
                       help="""Selector kind: ucb1 or random. (BAZAAR_SELECTOR env var)""")

    @default('selector')
    def selector_default(self):
        return os.getenv(self.selector_env, self.selector_default_value)

    budget_env = 'BAZAAR_BUDGET'
    budget_default_value = 50
    budget = Int(budget_default_value, config=True,
                 help="""Maximum number of trials per search. (BAZAAR_BUDGET env var)""")

    @default('budget')
    def budget_default(self):
        return int(os.getenv(self.budget_env, self.budget_default_value))

    time_limit_env = 'BAZAAR_TIME_LIMIT'
    time_limit = Float(None, allow_none=True, config=True,
                       help="""Wall-clock limit of a search in seconds; none by default.
                       (BAZAAR_TIME_LIMIT env var)""")

    @default('time_limit')
    def time_limit_default(self):
        value = os.getenv(self.time_limit_env)
        return float(value) if value else None

    checkpoints = List(Unicode(), config=True,
                       help="""Checkpoint marks reported with the result, e.g. iter:10 or time:60.""")

    template_paths_env = 'BAZAAR_TEMPLATES'
    template_paths = List(Unicode(), config=True,
                          help="""Additional template directories, searched after the bundled templates.
                          (BAZAAR_TEMPLATES env var - os.pathsep-separated list)""")

    @default('template_paths')
    def template_paths_default(self):
        value = os.getenv(self.template_paths_env, '')
        return [path for path in value.split(os.pathsep) if path]

    def __init__(self, catalog, registry, **kwargs):
        super(Searcher, self).__init__(**kwargs)
        self.catalog = catalog
        self.registry = registry

    def make_budget(self):
        return Budget(max_iterations=self.budget, time_limit=self.time_limit, checkpoints=tuple(self.checkpoints))

    def templates_for(self, task):
        return load_available_templates(task, self.catalog, [os.path.abspath(path) for path in self.template_paths],
                                        log=self.log)

    def search(self, data, templates=None, on_trial=None):
        if templates is None:
            templates = self.templates_for(data.task)
        return search(data, templates, self.make_budget(), tuner_kind=self.tuner, selector_kind=self.selector,
                      seed=self.seed, cv_folds=self.cv_folds, registry=self.registry, on_trial=on_trial,
                      log=self.log)
