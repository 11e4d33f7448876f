# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Fit/produce execution of bound pipelines over a Context."""

import hashlib
import json
import logging
import os

from dataclasses import dataclass

import numpy as np

from traitlets import Int, default
from traitlets.config.configurable import LoggingConfigurable

from ...errors import (BazaarError, ExecutionError, MissingInput, NotFitted, StepFailure, TypeMismatch,
                       UnimplementedPrimitive)
from .context import conforms, describe_value


@dataclass(frozen=True)
class FittedPipeline:
    pipeline: object
    step_states: tuple  # one encoded state per step (b'' for stateless steps)
    fit_fingerprint: str
    seed: int = 0


def step_seeds(seed, n_steps):
    """Splits one seed into independent per-step seeds."""
    children = np.random.SeedSequence(seed).spawn(n_steps)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def fingerprint(ctx):
    """Hash of the context schema (names, value types and trailing shapes)."""
    digest = hashlib.blake2b(digest_size=16)
    digest.update(json.dumps([[name, kind, list(shape)] for name, kind, shape in ctx.schema()]).encode('utf-8'))
    return digest.hexdigest()


def _read_inputs(step, ports, arg_names, ctx):
    inputs = {}
    for port, arg_name in zip(ports, arg_names):
        if port.bound not in ctx:
            if port.entry.optional:
                inputs[arg_name] = None
                continue
            raise MissingInput(step.index, port.bound)
        value = ctx[port.bound]
        if not conforms(value, port.entry.value_kind):
            raise TypeMismatch(step.index, port.bound, port.entry.value_kind, describe_value(value))
        inputs[arg_name] = value
    return inputs


def _write_outputs(step, primitive, outputs, ctx, phase):
    for port, arg_name in zip(step.outputs, primitive.produce_outputs):
        if arg_name not in outputs:
            if port.entry.optional:
                continue
            raise StepFailure(step.index, "output '{}' was not produced".format(port.bound))
        value = outputs[arg_name]
        if not conforms(value, port.entry.value_kind):
            raise TypeMismatch(step.index, port.bound, port.entry.value_kind, describe_value(value))
        ctx.set(port.bound, value, step=step.index, phase=phase)


def _implementation(step, registry):
    key = step.annotation.implementation
    if key is None:
        raise StepFailure(step.index, UnimplementedPrimitive(step.annotation.name))
    try:
        return registry.get(key)
    except UnimplementedPrimitive as e:
        raise StepFailure(step.index, e)


def _guarded(step, call):
    try:
        return call()
    except ExecutionError:
        raise
    except Exception as e:
        raise StepFailure(step.index, e if isinstance(e, BazaarError) else '{}: {}'.format(type(e).__name__, e))


def fit(pipeline, ctx, registry, seed=0, log=None):
    """Fits every step in description order, writing outputs back to ``ctx``.

    Each step reads its inputs from ``ctx``, runs its fit routine (when it learns)
    then its produce routine, and overwrites ``ctx`` entries with its outputs.

    Parameters
    ----------
    pipeline : Pipeline
    ctx : Context
        The training context; updated in place.
    registry : NativeRegistry
    seed : int
        Split deterministically into one seed per step.
    log : logging.Logger, optional

    Returns
    -------
    FittedPipeline
    """
    log = log or logging.getLogger(__name__)
    fit_fingerprint = fingerprint(ctx)
    seeds = step_seeds(seed, len(pipeline.steps))
    states = []
    for step, hyperparams, step_seed in zip(pipeline.steps, pipeline.hyperparameters, seeds):
        primitive = _implementation(step, registry)
        key = step.annotation.implementation
        state = b''
        if step.annotation.learns:
            inputs = _read_inputs(step, step.fit_inputs, primitive.fit_args, ctx)
            state = _guarded(step, lambda: registry.fit(key, hyperparams, inputs, step_seed))
        inputs = _read_inputs(step, step.produce_inputs, primitive.produce_args, ctx)
        outputs = _guarded(step, lambda: registry.produce(key, hyperparams, state, inputs))
        _write_outputs(step, primitive, outputs, ctx, 'fit')
        log.debug("Fitted step {} ({}): outputs {}".format(step.index, step.key, list(step.output_names)))
        states.append(state)
    return FittedPipeline(pipeline=pipeline, step_states=tuple(states), fit_fingerprint=fit_fingerprint, seed=seed)


def produce(fitted, ctx, registry, until_step=None, log=None):
    """Runs the produce routines of a fitted pipeline on a copy of ``ctx``.

    Parameters
    ----------
    fitted : FittedPipeline
    ctx : Context
        Left untouched; the returned context holds the results.
    registry : NativeRegistry
    until_step : int, optional
        Stop after this step index and return the intermediate context.

    Returns
    -------
    Context
    """
    log = log or logging.getLogger(__name__)
    if fitted is None or not isinstance(fitted, FittedPipeline) or \
            len(fitted.step_states) != len(fitted.pipeline.steps):
        raise NotFitted("Pipeline has not been fitted")
    ctx = ctx.copy()
    last = len(fitted.pipeline.steps) - 1 if until_step is None else until_step
    for step, hyperparams, state in zip(fitted.pipeline.steps, fitted.pipeline.hyperparameters,
                                        fitted.step_states):
        if step.index > last:
            break
        primitive = _implementation(step, registry)
        inputs = _read_inputs(step, step.produce_inputs, primitive.produce_args, ctx)
        outputs = _guarded(step, lambda: registry.produce(step.annotation.implementation, hyperparams, state, inputs))
        _write_outputs(step, primitive, outputs, ctx, 'produce')
        log.debug("Produced step {} ({})".format(step.index, step.key))
    return ctx


class PipelineRunner(LoggingConfigurable):
    """Fits and applies pipelines with a configured seed."""

    seed_env = 'BAZAAR_SEED'
    seed_default_value = 0
    seed = Int(seed_default_value, config=True,
               help="""Seed split across the steps of every fitted pipeline. (BAZAAR_SEED env var)""")

    @default('seed')
    def seed_default(self):
        return int(os.getenv(self.seed_env, self.seed_default_value))

    def __init__(self, registry, **kwargs):
        super(PipelineRunner, self).__init__(**kwargs)
        self.registry = registry

    def fit(self, pipeline, ctx, seed=None):
        return fit(pipeline, ctx, self.registry, self.seed if seed is None else seed, log=self.log)

    def produce(self, fitted, ctx, until_step=None):
        return produce(fitted, ctx, self.registry, until_step=until_step, log=self.log)
