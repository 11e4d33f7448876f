# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Invariant checks run against parsed annotations."""

from dataclasses import dataclass

from .annotation import VALUE_KINDS, HYPERPARAM_KINDS


@dataclass(frozen=True)
class Violation:
    """One failed annotation invariant.  Violations are data, never raised."""
    code: str
    path: str
    message: str

    def __str__(self):
        return '{} at {}: {}'.format(self.code, self.path or '/', self.message)


def _check_io(entries, path, violations):
    names = [entry.name for entry in entries]
    for position, entry in enumerate(entries):
        if not entry.name:
            violations.append(Violation('EmptyName', '{}/{}'.format(path, position), 'I/O entry has no name'))
        if entry.value_kind not in VALUE_KINDS:
            violations.append(Violation('UnknownValueKind', '{}/{}/type'.format(path, position),
                                        "'{}' is not a value kind".format(entry.value_kind)))
    for name in sorted(set(name for name in names if names.count(name) > 1)):
        violations.append(Violation('DuplicateIOName', path, "'{}' is declared more than once".format(name)))


def _check_spec(spec, path, violations):
    if spec.kind not in HYPERPARAM_KINDS:
        violations.append(Violation('UnknownHyperparamKind', path,
                                    "'{}' is not a hyperparameter kind".format(spec.kind)))
        return
    if spec.is_numeric:
        if spec.lo is None or spec.hi is None or spec.lo > spec.hi:
            violations.append(Violation('InvalidRange', path, 'range [{}, {}] is empty'.format(spec.lo, spec.hi)))
            return
        if spec.scale == 'log' and spec.lo <= 0:
            violations.append(Violation('LogScaleNonPositive', path, 'log scale requires lo > 0'))
    elif not spec.values:
        violations.append(Violation('InvalidRange', path, 'value-set is empty'))
        return
    if not spec.contains(spec.default):
        violations.append(Violation('DefaultOutOfRange', path, 'default {!r} is not feasible'.format(spec.default)))


def validate_annotation(annotation, registry):
    """Checks every annotation invariant and the implementation binding.

    Parameters
    ----------
    annotation : PrimitiveAnnotation
        The annotation to check.
    registry : NativeRegistry
        The registry against which ``implementation`` keys and arities are checked.

    Returns
    -------
    list of Violation
        Empty when the annotation is valid.
    """
    violations = []

    if not annotation.name:
        violations.append(Violation('EmptyName', '/name', 'annotation has no name'))
    if not annotation.produce_outputs:
        violations.append(Violation('EmptyOutputs', '/produce/outputs', 'at least one output is required'))

    _check_io(annotation.fit_inputs, '/fit/inputs', violations)
    _check_io(annotation.produce_inputs, '/produce/inputs', violations)
    _check_io(annotation.produce_outputs, '/produce/outputs', violations)

    fixed = set(annotation.fixed_hyperparams)
    tunable = [spec.name for spec in annotation.tunable_hyperparams]
    conditional = [spec.name for spec in annotation.conditional_hyperparams]
    for name in sorted((fixed & set(tunable)) | (fixed & set(conditional)) | (set(tunable) & set(conditional))):
        violations.append(Violation('OverlappingHyperparam', '/hyperparameters',
                                    "'{}' appears in more than one hyperparameter set".format(name)))

    for spec in annotation.tunable_hyperparams:
        _check_spec(spec, '/hyperparameters/tunable/{}'.format(spec.name), violations)

    for spec in annotation.conditional_hyperparams:
        path = '/hyperparameters/conditional/{}'.format(spec.name)
        parent_tunable = annotation.tunable(spec.parent)
        if spec.parent in annotation.fixed_hyperparams:
            domain = (annotation.fixed_hyperparams[spec.parent],)
        elif parent_tunable is not None:
            if parent_tunable.kind != 'categorical':
                violations.append(Violation('ConditionalParentNotCategorical', path + '/parent',
                                            "parent '{}' is not categorical".format(spec.parent)))
                continue
            domain = parent_tunable.values
        else:
            violations.append(Violation('DanglingConditionalParent', path + '/parent',
                                        "parent '{}' is not a fixed or tunable hyperparameter".format(spec.parent)))
            continue

        values = spec.parent_values
        for value in domain:
            if values.count(value) != 1:
                violations.append(Violation('BranchMismatch', path + '/branches',
                                            "parent value {!r} needs exactly one branch".format(value)))
        for value, branch in spec.branches:
            if branch is not None:
                _check_spec(branch, '{}/branches/{}'.format(path, value), violations)

    if annotation.implementation is not None:
        if annotation.implementation not in registry:
            violations.append(Violation('UnknownImplementation', '/implementation',
                                        "no native implementation registered as '{}'".format(
                                            annotation.implementation)))
        else:
            primitive = registry.get(annotation.implementation)
            arities = (('/fit/inputs', annotation.fit_inputs, primitive.fit_args),
                       ('/produce/inputs', annotation.produce_inputs, primitive.produce_args),
                       ('/produce/outputs', annotation.produce_outputs, primitive.produce_outputs))
            for path, declared, implemented in arities:
                if len(declared) != len(implemented):
                    violations.append(Violation('ArityMismatch', path,
                                                '{} declared but the implementation takes {}'.format(
                                                    len(declared), len(implemented))))

    return violations
