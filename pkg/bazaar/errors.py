# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Exceptions raised across the Bazaar engine.

Every error carries a human-readable ``reason`` and an ``exit_code`` that the
command-line applications use when the error escapes a subcommand.
"""


class BazaarError(Exception):
    """Base class of all engine errors."""
    exit_code = 1

    def __init__(self, reason=None):
        if reason is None:
            reason = "Internal engine issue!"
        super(BazaarError, self).__init__(reason)
        self.reason = reason


def log_and_raise(log, error):
    """Helper that combines the logging and raising of engine errors.

    Parameters
    ----------
    log : logging.Logger
        The logger against which the error's reason is reported.
    error : BazaarError
        The exception instance to raise.
    """
    log.error(error.reason)
    raise error


# Annotations

class AnnotationError(BazaarError):
    """Raised when an annotation document cannot be turned into an annotation."""
    def __init__(self, reason, path=''):
        super(AnnotationError, self).__init__(reason)
        self.path = path


class MalformedJson(AnnotationError):
    pass


class MissingField(AnnotationError):
    def __init__(self, path):
        super(MissingField, self).__init__("Missing required field '{}'".format(path), path)


class UnknownKind(AnnotationError):
    def __init__(self, value, path=''):
        super(UnknownKind, self).__init__("Unknown kind '{}' at '{}'".format(value, path), path)
        self.value = value


class RangeError(AnnotationError):
    pass


class InvalidAnnotation(AnnotationError):
    """The annotation parsed but failed validation."""
    def __init__(self, name, violations, path=''):
        reason = "Annotation '{}' failed validation: {}".format(
            name, '; '.join(str(violation) for violation in violations))
        super(InvalidAnnotation, self).__init__(reason, path)
        self.violations = violations


class DuplicatePrimitive(BazaarError):
    def __init__(self, name, paths=()):
        super(DuplicatePrimitive, self).__init__(
            "Primitive '{}' is defined more than once ({})".format(name, ', '.join(paths)))
        self.name = name


class UnknownPrimitive(BazaarError):
    def __init__(self, name):
        super(UnknownPrimitive, self).__init__("Unknown primitive '{}'".format(name))
        self.name = name


# Pipelines

class PipelineError(BazaarError):
    pass


class InvalidPipeline(PipelineError):
    """Graph recovery failed for the description."""
    def __init__(self, reason, step_index=None, names=()):
        super(InvalidPipeline, self).__init__(
            "INVALID pipeline ({}) at step {}: {}".format(reason, step_index, ', '.join(sorted(names))))
        self.why = reason
        self.step_index = step_index
        self.names = tuple(sorted(names))


class InitParamUnknown(PipelineError):
    def __init__(self, step, name):
        super(InitParamUnknown, self).__init__("Step '{}' has no hyperparameter named '{}'".format(step, name))
        self.step = step
        self.name = name


class MissingHyperparam(PipelineError):
    def __init__(self, key):
        super(MissingHyperparam, self).__init__("No value bound for hyperparameter {}".format(key))
        self.key = key


class OutOfRange(PipelineError):
    def __init__(self, key, value):
        super(OutOfRange, self).__init__("Value {!r} is out of range for hyperparameter {}".format(value, key))
        self.key = key
        self.value = value


# Execution

class ExecutionError(BazaarError):
    pass


class MissingInput(ExecutionError):
    def __init__(self, step, name):
        super(MissingInput, self).__init__("Step {} requires input '{}' which is not in the context".format(
            step, name))
        self.step = step
        self.name = name


class TypeMismatch(ExecutionError):
    def __init__(self, step, name, expected, actual):
        super(TypeMismatch, self).__init__("Step {} expected '{}' to be a {} but found {}".format(
            step, name, expected, actual))
        self.step = step
        self.name = name
        self.expected = expected
        self.actual = actual


class UnimplementedPrimitive(ExecutionError):
    def __init__(self, name):
        super(UnimplementedPrimitive, self).__init__(
            "Primitive '{}' has no native implementation and cannot be executed".format(name))
        self.name = name


class StepFailure(ExecutionError):
    def __init__(self, step, cause):
        super(StepFailure, self).__init__("Step {} failed: {}".format(step, cause))
        self.step = step
        self.cause = cause


class NotFitted(ExecutionError):
    pass


class FormatVersionMismatch(ExecutionError):
    pass


# Primitives

class PrimitiveError(BazaarError):
    pass


class DegenerateInput(PrimitiveError):
    pass


class ShapeMismatch(PrimitiveError):
    pass


# Tuning

class TuningError(BazaarError):
    pass


class SingularKernel(TuningError):
    pass


class NonFiniteScore(TuningError):
    def __init__(self, score):
        super(NonFiniteScore, self).__init__("Score {!r} is not finite".format(score))
        self.score = score


# Tasks, search and results

class TaskError(BazaarError):
    pass


class MissingTarget(TaskError):
    pass


class SchemaMismatch(TaskError):
    pass


class EmptySplit(TaskError):
    pass


class SearchError(BazaarError):
    pass


class NoTemplatesForTask(SearchError):
    pass


class FoldDegenerate(SearchError):
    pass


class BudgetExhaustedWithNoSuccess(SearchError):
    exit_code = 2


class StoreError(BazaarError):
    pass


class NoSharedTasks(StoreError):
    pass
