# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Bazaar command-line application."""

import json
import os
import sys

import pandas as pd

from tornado.log import LogFormatter

from jupyter_core.application import JupyterApp, base_aliases, base_flags
from traitlets import Bool, CaselessStrEnum, Int, List, Unicode, default

from ._version import __version__
from .errors import BazaarError
from .services.annotations.catalogmanager import CatalogManager
from .services.execution.context import Context
from .services.execution.engine import PipelineRunner
from .services.execution.serialization import load, save
from .services.pipelines.description import load_description
from .services.pipelines.graph import DEFAULT_SOURCE_OUTPUTS
from .services.pipelines.render import graph_to_json, render_graph
from .services.pipelines.templates import bind, make_template
from .services.search.datasets import make_tasks
from .services.search.scoring import get_scorer
from .services.search.searcher import Searcher
from .services.search.tasks import ingest_task, load_task
from .services.selection.selectors import canonical_selector_kind
from .services.store.reports import compare, format_comparison, format_report, format_table, report
from .services.store.resultsstore import ResultsStore, read_store
from .services.tuning.space import assignment_from_json, format_key
from .services.tuning.tuners import canonical_tuner_kind

bazaar_aliases = dict(base_aliases)
bazaar_aliases.update({
    'catalog': 'CatalogManager.catalog_paths',
})
bazaar_flags = dict(base_flags)
bazaar_flags.update({
    'allow-shadowing': ({'CatalogManager': {'allow_shadowing': True}},
                        "Let later catalog directories shadow earlier annotations."),
})


def domain_text(spec):
    if spec.is_numeric:
        return '[{}, {}]{}'.format(spec.lo, spec.hi, ' log' if spec.scale == 'log' else '')
    return '{' + ', '.join(str(value) for value in spec.domain) + '}'


class BazaarSubcommand(JupyterApp):
    """Base of the subcommand applications: logging, catalog and error handling."""

    version = __version__
    aliases = bazaar_aliases
    flags = bazaar_flags
    classes = [CatalogManager]

    _log_formatter_cls = LogFormatter

    @default('log_format')
    def _default_log_format(self):
        """override default log format to include milliseconds"""
        return u"%(color)s[%(levelname)1.1s %(asctime)s.%(msecs).03d %(name)s]%(end_color)s %(message)s"

    @property
    def catalog_manager(self):
        if getattr(self, '_catalog_manager', None) is None:
            self._catalog_manager = CatalogManager(parent=self, log=self.log)
        return self._catalog_manager

    @property
    def catalog(self):
        return self.catalog_manager.catalog

    @property
    def registry(self):
        return self.catalog_manager.registry

    def argument(self, position, what):
        if len(self.extra_args) <= position:
            self.log.error("Missing argument: {}".format(what))
            self.exit(1)
        return self.extra_args[position]

    def write_output(self, text, path=None):
        if path:
            with open(path, 'w', encoding='utf-8') as fp:
                fp.write(text if text.endswith('\n') else text + '\n')
            self.log.info("Wrote {}".format(path))
        else:
            sys.stdout.write(text if text.endswith('\n') else text + '\n')

    def run(self):
        raise NotImplementedError

    def start(self):
        try:
            self.run()
        except BazaarError as e:
            self.log.error(e.reason)
            self.exit(e.exit_code)


class ListPrimitivesApp(BazaarSubcommand):
    name = 'bazaar-list-primitives'
    description = """List the primitives of the catalog, optionally filtered by modality or text."""

    modality = Unicode(None, allow_none=True, config=True, help="""Only list primitives tagged with this modality.""")
    filter = Unicode(None, allow_none=True, config=True,
                     help="""Only list primitives whose name, description or category contains this text.""")
    as_json = Bool(False, config=True, help="""Emit the matching annotations as JSON.""")

    aliases = dict(bazaar_aliases, modality='ListPrimitivesApp.modality', filter='ListPrimitivesApp.filter')
    flags = dict(bazaar_flags, json=({'ListPrimitivesApp': {'as_json': True}}, "Emit JSON."))

    def run(self):
        annotations = self.catalog.search(modality=self.modality, text=self.filter)
        if self.as_json:
            self.write_output(json.dumps([annotation.to_json() for annotation in annotations], indent=2,
                                         sort_keys=True))
            return
        rows = [{'name': a.name, 'category': a.category, 'modalities': ','.join(a.modalities),
                 'description': a.description} for a in annotations]
        self.write_output(format_table(rows, ['name', 'category', 'modalities', 'description']))


class DescribeApp(BazaarSubcommand):
    name = 'bazaar-describe'
    description = """Show the meta-information, I/O signature and hyperparameters of one primitive."""

    def run(self):
        annotation = self.catalog[self.argument(0, 'primitive name')]
        lines = [annotation.name, '', annotation.description]
        for label, value in (('category', annotation.category), ('modalities', ', '.join(annotation.modalities)),
                             ('author', annotation.author), ('documentation', annotation.documentation),
                             ('implementation', annotation.implementation or '-'),
                             ('source', self.catalog.source_path(annotation.name) or '-')):
            lines.append('{:<15}{}'.format(label + ':', value))

        io_rows = []
        for phase, entries in (('fit', annotation.fit_inputs), ('produce', annotation.produce_inputs)):
            io_rows.extend({'phase': phase, 'direction': 'input', 'name': entry.name, 'type': entry.value_kind,
                            'optional': entry.optional} for entry in entries)
        io_rows.extend({'phase': 'produce', 'direction': 'output', 'name': entry.name, 'type': entry.value_kind,
                        'optional': entry.optional} for entry in annotation.produce_outputs)
        lines.extend(['', format_table(io_rows, ['phase', 'direction', 'name', 'type', 'optional'])])

        hp_rows = [{'name': name, 'kind': 'fixed', 'domain': '-', 'default': value}
                   for name, value in sorted(annotation.fixed_hyperparams.items())]
        hp_rows.extend({'name': spec.name, 'kind': spec.kind, 'domain': domain_text(spec), 'default': spec.default}
                       for spec in annotation.tunable_hyperparams)
        for conditional in annotation.conditional_hyperparams:
            for parent_value, spec in conditional.branches:
                hp_rows.append({'name': '{} [{}={}]'.format(conditional.name, conditional.parent, parent_value),
                                'kind': spec.kind if spec else '-',
                                'domain': domain_text(spec) if spec else 'inactive',
                                'default': spec.default if spec else None})
        if hp_rows:
            lines.extend(['', format_table(hp_rows, ['name', 'kind', 'domain', 'default'])])
        self.write_output('\n'.join(lines))


class RecoverApp(BazaarSubcommand):
    name = 'bazaar-recover'
    description = """Recover the graph of a pipeline description and render it as DOT or JSON."""

    render = CaselessStrEnum(['dot', 'json'], default_value='dot', config=True, help="""Output format.""")
    task_dir = Unicode(None, allow_none=True, config=True,
                       help="""Task folder whose declared source variables feed the pipeline.""")
    source_outputs = List(Unicode(), config=True,
                          help="""Names provided by the source node (default X and y, or the task's).""")
    out = Unicode(None, allow_none=True, config=True, help="""Write the rendering to this file.""")

    aliases = dict(bazaar_aliases, render='RecoverApp.render', task='RecoverApp.task_dir',
                   source='RecoverApp.source_outputs', out='RecoverApp.out')

    def run(self):
        description = load_description(self.argument(0, 'pipeline description file'))
        source_outputs = tuple(self.source_outputs) or (
            load_task(self.task_dir).source_outputs if self.task_dir else DEFAULT_SOURCE_OUTPUTS)
        template = make_template(description, self.catalog, source_outputs, log=self.log)
        for diagnostic in template.graph.diagnostics:
            self.log.warning(str(diagnostic))
        graph = template.graph
        self.write_output(render_graph(graph) if self.render == 'dot' else graph_to_json(graph), self.out)


class FitApp(BazaarSubcommand):
    name = 'bazaar-fit'
    description = """Fit a pipeline description on the train split of a task and save the fitted pipeline."""

    task_dir = Unicode(None, allow_none=True, config=True, help="""Task folder to fit on.""")
    hyperparams = Unicode(None, allow_none=True, config=True,
                          help="""JSON file of [step, name, value] triples overriding the defaults.""")
    out = Unicode('pipeline.bzp', config=True, help="""File receiving the fitted pipeline.""")

    aliases = dict(bazaar_aliases, task='FitApp.task_dir', hyperparams='FitApp.hyperparams', out='FitApp.out',
                   seed='PipelineRunner.seed')
    classes = [CatalogManager, PipelineRunner]

    def run(self):
        if not self.task_dir:
            self.log.error("--task is required")
            self.exit(1)
        data = ingest_task(self.task_dir, log=self.log)
        template = make_template(load_description(self.argument(0, 'pipeline description file')), self.catalog,
                                 data.task.source_outputs, log=self.log)
        assignment = template.default_lambda()
        if self.hyperparams:
            with open(self.hyperparams, encoding='utf-8') as fp:
                assignment.update(assignment_from_json(json.load(fp)))
        runner = PipelineRunner(self.registry, parent=self, log=self.log)
        fitted = runner.fit(bind(template, assignment), data.train_context())
        with open(self.out, 'wb') as fp:
            fp.write(save(fitted))
        self.log.info("Fitted '{}' on {} row(s) of task '{}' ({})".format(
            template.name, len(data.X_train), data.task.id,
            ', '.join('{}={}'.format(format_key(key), value) for key, value in sorted(assignment.items())) or
            'no tunable hyperparameters'))
        self.log.info("Saved fitted pipeline to {}".format(self.out))


class PredictApp(BazaarSubcommand):
    name = 'bazaar-predict'
    description = """Apply a fitted pipeline to a split of a task and write its predictions as CSV."""

    model = Unicode(None, allow_none=True, config=True, help="""Fitted pipeline file written by fit or search.""")
    task_dir = Unicode(None, allow_none=True, config=True, help="""Task folder to predict on.""")
    split = CaselessStrEnum(['test', 'train'], default_value='test', config=True, help="""Split to predict.""")
    until_step = Int(None, allow_none=True, config=True, help="""Stop after this step index.""")
    debug_context = Unicode(None, allow_none=True, config=True,
                            help="""Dump a JSON summary of the final context to this file.""")
    out = Unicode(None, allow_none=True, config=True, help="""Predictions CSV (stdout by default).""")

    aliases = dict(bazaar_aliases, model='PredictApp.model', task='PredictApp.task_dir', split='PredictApp.split',
                   out='PredictApp.out', **{'until-step': 'PredictApp.until_step',
                                            'debug-context': 'PredictApp.debug_context'})
    classes = [CatalogManager, PipelineRunner]

    def run(self):
        if not self.model or not self.task_dir:
            self.log.error("--model and --task are required")
            self.exit(1)
        with open(self.model, 'rb') as fp:
            fitted = load(fp.read(), self.catalog, self.registry)
        data = ingest_task(self.task_dir, log=self.log)
        X, y = (data.X_test, data.y_test) if self.split == 'test' else (data.X_train, data.y_train)
        runner = PipelineRunner(self.registry, parent=self, log=self.log)
        ctx = runner.produce(fitted, Context.from_dataset(X), until_step=self.until_step)
        if self.debug_context:
            with open(self.debug_context, 'w', encoding='utf-8') as fp:
                json.dump(ctx.summary(), fp, indent=2, sort_keys=True)
            self.log.info("Wrote context summary to {}".format(self.debug_context))
        output = fitted.pipeline.graph.sink_inputs[0]
        if self.until_step is not None or output not in ctx:
            return
        predictions = ctx[output]
        if len(predictions) == len(y):
            scorer = get_scorer(data.task.metric)
            self.log.info("{} on the {} split: {:.6f}".format(scorer.metric, self.split,
                                                               scorer.raw(scorer(y, predictions))))
        self.write_output(pd.DataFrame({output: predictions}).to_csv(index=False), self.out)


class SearchApp(BazaarSubcommand):
    name = 'bazaar-search'
    description = """Search the templates matching a task for its best pipeline."""

    task_dir = Unicode(None, allow_none=True, config=True, help="""Task folder to search.""")
    save_model = Unicode(None, allow_none=True, config=True,
                         help="""Save the best pipeline, re-fitted on the whole train split, to this file.""")

    aliases = dict(bazaar_aliases, task='SearchApp.task_dir', budget='Searcher.budget', tuner='Searcher.tuner',
                   selector='Searcher.selector', seed='Searcher.seed', checkpoint='Searcher.checkpoints',
                   templates='Searcher.template_paths', out='ResultsStore.results_file',
                   **{'cv-k': 'Searcher.cv_folds', 'time-limit': 'Searcher.time_limit',
                      'save-model': 'SearchApp.save_model'})
    classes = [CatalogManager, Searcher, ResultsStore]

    def run(self):
        if not self.task_dir:
            self.log.error("--task is required")
            self.exit(1)
        data = ingest_task(self.task_dir, log=self.log)
        searcher = Searcher(self.catalog, self.registry, parent=self, log=self.log)
        store = ResultsStore(parent=self, log=self.log)
        run = {'task_id': data.task.id, 'tuner': canonical_tuner_kind(searcher.tuner),
               'selector': canonical_selector_kind(searcher.selector), 'seed': searcher.seed}
        result = searcher.search(data, on_trial=lambda trial: store.append_trial(run, trial))
        store.append_summary(run, result, metric=data.task.metric)
        if self.save_model:
            with open(self.save_model, 'wb') as fp:
                fp.write(save(result.fitted))
            self.log.info("Saved best pipeline to {}".format(self.save_model))
        scorer = get_scorer(data.task.metric)
        lines = ['task:           {}'.format(data.task.id),
                 'best template:  {}'.format(result.best_template.name),
                 'cv {}:{}{:.6f} (sd {:.6f})'.format(scorer.metric, ' ' * max(1, 11 - len(scorer.metric)),
                                                     scorer.raw(result.cv_score), result.cv_sd),
                 'test {}:{}{:.6f}'.format(scorer.metric, ' ' * max(1, 9 - len(scorer.metric)),
                                           scorer.raw(result.test_score)),
                 'improvement:    {:.3f} sd{}'.format(result.improvement,
                                                      ' (no score variance)' if result.zero_variance else ''),
                 'trials:         {} ({} failed)'.format(len(result.trials), result.failed)]
        for mark, trial in result.checkpoints.items():
            lines.append('checkpoint {}: {}'.format(mark, '-' if trial is None else '{:.6f}'.format(
                scorer.raw(trial.cv_score))))
        self.write_output('\n'.join(lines))


class ReportApp(BazaarSubcommand):
    name = 'bazaar-report'
    description = """Summarise a results store: per-task bests, improvements and per-template wins."""

    task = Unicode(None, allow_none=True, config=True, help="""Only report this task.""")
    tuner = Unicode(None, allow_none=True, config=True, help="""Only report searches with this tuner.""")
    selector = Unicode(None, allow_none=True, config=True, help="""Only report searches with this selector.""")
    as_json = Bool(False, config=True, help="""Emit the report as JSON.""")

    aliases = dict(bazaar_aliases, task='ReportApp.task', tuner='ReportApp.tuner', selector='ReportApp.selector')
    flags = dict(bazaar_flags, json=({'ReportApp': {'as_json': True}}, "Emit JSON."))

    def run(self):
        contents = read_store(self.argument(0, 'results store'), log=self.log)
        tuner = canonical_tuner_kind(self.tuner) if self.tuner else None
        selector = canonical_selector_kind(self.selector) if self.selector else None
        summary = report(contents, task=self.task, tuner=tuner, selector=selector)
        if self.as_json:
            self.write_output(json.dumps({'rows': summary.rows, 'template_trials': summary.template_trials,
                                          'template_wins': summary.template_wins,
                                          'failed_trials': summary.failed_trials,
                                          'corrupt_lines': summary.corrupt_lines}, indent=2))
        else:
            self.write_output(format_report(summary))


class CompareApp(BazaarSubcommand):
    name = 'bazaar-compare'
    description = """Compare the per-task best searches of two results stores (A against B)."""

    as_json = Bool(False, config=True, help="""Emit the comparison as JSON.""")
    flags = dict(bazaar_flags, json=({'CompareApp': {'as_json': True}}, "Emit JSON."))

    def run(self):
        contents_a = read_store(self.argument(0, 'results store A'), log=self.log)
        contents_b = read_store(self.argument(1, 'results store B'), log=self.log)
        comparison = compare(contents_a, contents_b)
        if self.as_json:
            self.write_output(json.dumps(comparison.to_json(), indent=2))
        else:
            self.write_output(format_comparison(comparison))


class MakeTasksApp(BazaarSubcommand):
    name = 'bazaar-make-tasks'
    description = """Write the bundled synthetic task folders."""

    out = Unicode('tasks', config=True, help="""Directory receiving one folder per task.""")
    seed = Int(0, config=True, help="""Seed of the generated data.""")

    aliases = dict(bazaar_aliases, out='MakeTasksApp.out', seed='MakeTasksApp.seed')

    def run(self):
        for path in make_tasks(os.path.abspath(self.out), seed=self.seed, log=self.log):
            self.write_output(path)


class BazaarApp(JupyterApp):
    """Application that catalogs primitives, recovers and executes pipelines, and
    searches pipeline templates for the best pipeline of a task.
    """
    name = 'bazaar'
    version = __version__
    description = """
        Bazaar

        Composes machine learning pipelines from annotated primitives and searches
        pipeline templates with tuners and selectors.
    """

    subcommands = {
        'list-primitives': (ListPrimitivesApp, ListPrimitivesApp.description.splitlines()[0]),
        'describe': (DescribeApp, DescribeApp.description.splitlines()[0]),
        'recover': (RecoverApp, RecoverApp.description.splitlines()[0]),
        'fit': (FitApp, FitApp.description.splitlines()[0]),
        'predict': (PredictApp, PredictApp.description.splitlines()[0]),
        'search': (SearchApp, SearchApp.description.splitlines()[0]),
        'report': (ReportApp, ReportApp.description.splitlines()[0]),
        'compare': (CompareApp, CompareApp.description.splitlines()[0]),
        'make-tasks': (MakeTasksApp, MakeTasksApp.description.splitlines()[0]),
    }

    _log_formatter_cls = LogFormatter

    @default('log_format')
    def _default_log_format(self):
        """override default log format to include milliseconds"""
        return u"%(color)s[%(levelname)1.1s %(asctime)s.%(msecs).03d %(name)s]%(end_color)s %(message)s"

    def start(self):
        if self.subapp is None:
            print("No subcommand given; one of: {}".format(', '.join(sorted(self.subcommands))))
            self.print_subcommands()
            self.exit(1)
        self.subapp.start()


launch_instance = BazaarApp.launch_instance
