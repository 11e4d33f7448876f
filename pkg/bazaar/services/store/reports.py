# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Summary reports over results stores and paired comparisons between two stores."""

from collections import Counter, OrderedDict
from dataclasses import dataclass, field

from ...errors import NoSharedTasks

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Report:
    rows: list = field(default_factory=list)  # one per completed search, sorted by task id
    template_trials: dict = field(default_factory=dict)  # template name -> trial count
    template_wins: dict = field(default_factory=dict)  # template name -> searches it won
    failed_trials: dict = field(default_factory=dict)  # task id -> failed trial count
    corrupt_lines: int = 0


def _selected(record, task=None, tuner=None, selector=None):
    return ((task is None or record.get('task_id') == task) and
            (tuner is None or record.get('tuner') == tuner) and
            (selector is None or record.get('selector') == selector))


def report(contents, task=None, tuner=None, selector=None):
    """Summarises a parsed store, optionally restricted to one task, tuner or selector."""
    summaries = [record for record in contents.summaries if _selected(record, task, tuner, selector)]
    trials = [record for record in contents.trials if _selected(record, task, tuner, selector)]

    rows = []
    for record in sorted(summaries, key=lambda record: record.get('task_id', '')):
        rows.append(OrderedDict([
            ('task_id', record.get('task_id')),
            ('run_id', record.get('run_id')),
            ('metric', record.get('metric')),
            ('best_template', record.get('best_template_name')),
            ('cv_score', record.get('cv_score')),
            ('test_score', record.get('test_score')),
            ('default_score', record.get('default_score')),
            ('improvement_sd', record.get('improvement_sd')),
            ('trials', record.get('trials')),
            ('failed', record.get('failed')),
        ]))

    template_trials = Counter(record.get('template_name') for record in trials)
    template_wins = Counter(record.get('best_template_name') for record in summaries)
    failed = Counter(record.get('task_id') for record in trials if record.get('status') != 'ok')
    return Report(rows=rows, template_trials=dict(sorted(template_trials.items())),
                  template_wins=dict(sorted(template_wins.items())), failed_trials=dict(sorted(failed.items())),
                  corrupt_lines=len(contents.corrupt_lines))


def _format_value(value):
    if isinstance(value, float):
        return '{:.6f}'.format(value)
    return '-' if value is None else str(value)


def format_table(rows, columns):
    """Left-aligned plain text table of ``rows`` (mappings) over ``columns``."""
    cells = [[str(column) for column in columns]] + [[_format_value(row.get(column)) for column in columns]
                                                      for row in rows]
    widths = [max(len(line[index]) for line in cells) for index in range(len(columns))]
    return '\n'.join('  '.join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in cells)


def format_report(summary):
    lines = [format_table(summary.rows, ['task_id', 'metric', 'best_template', 'cv_score', 'test_score',
                                         'default_score', 'improvement_sd', 'trials', 'failed'])]
    if summary.template_trials:
        rows = [{'template': name, 'trials': count, 'wins': summary.template_wins.get(name, 0)}
                for name, count in summary.template_trials.items()]
        lines.extend(['', format_table(rows, ['template', 'trials', 'wins'])])
    if summary.corrupt_lines:
        lines.extend(['', '{} corrupt line(s) skipped'.format(summary.corrupt_lines)])
    return '\n'.join(lines)


@dataclass(frozen=True)
class Comparison:
    pairs: list  # (task_id, score_a, score_b, outcome) with outcome 'win', 'loss' or 'tie' for A
    wins: int
    losses: int
    ties: int

    @property
    def total(self):
        return len(self.pairs)

    @property
    def win_fraction(self):
        return self.wins / self.total

    @property
    def loss_fraction(self):
        return self.losses / self.total

    @property
    def tie_fraction(self):
        return self.ties / self.total

    def to_json(self):
        return {'pairs': [{'task_id': task, 'score_a': a, 'score_b': b, 'outcome': outcome}
                          for task, a, b, outcome in self.pairs],
                'wins': self.wins, 'losses': self.losses, 'ties': self.ties,
                'win_fraction': self.win_fraction, 'loss_fraction': self.loss_fraction,
                'tie_fraction': self.tie_fraction}


def best_summaries(contents):
    """Per task, the completed search with the best CV score (ties to the earliest line)."""
    best = {}
    for record in contents.summaries:
        task = record.get('task_id')
        if record.get('cv_score') is None or record.get('test_score') is None:
            continue
        if task not in best or record['cv_score'] > best[task]['cv_score']:
            best[task] = record
    return best


def compare(contents_a, contents_b):
    """Pairs the best search of every shared task and compares their test scores.

    Raises
    ------
    NoSharedTasks
        If the stores have no completed task in common.
    """
    best_a, best_b = best_summaries(contents_a), best_summaries(contents_b)
    shared = sorted(set(best_a) & set(best_b))
    if not shared:
        raise NoSharedTasks("The two results stores have no completed task in common")
    pairs, outcomes = [], Counter()
    for task in shared:
        score_a, score_b = best_a[task]['test_score'], best_b[task]['test_score']
        if abs(score_a - score_b) < TIE_TOLERANCE:
            outcome = 'tie'
        else:
            outcome = 'win' if score_a > score_b else 'loss'
        outcomes[outcome] += 1
        pairs.append((task, score_a, score_b, outcome))
    return Comparison(pairs=pairs, wins=outcomes['win'], losses=outcomes['loss'], ties=outcomes['tie'])


def format_comparison(comparison):
    rows = [{'task_id': task, 'score_a': a, 'score_b': b, 'outcome': outcome}
            for task, a, b, outcome in comparison.pairs]
    return '\n'.join([
        format_table(rows, ['task_id', 'score_a', 'score_b', 'outcome']),
        '',
        'A wins {:.1%}, loses {:.1%}, ties {:.1%} of {} task(s)'.format(
            comparison.win_fraction, comparison.loss_fraction, comparison.tie_fraction, comparison.total),
    ])
