# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Binary envelope for fitted pipelines.

Layout (big-endian)::

    b'MLBZ' | u16 format version | u32 length | pipeline JSON (UTF-8)
            | u32 number of steps | (u32 length | state blob) per step

The pipeline JSON holds the canonical description, the source outputs, the bound
assignment, the fit seed and the fit fingerprint.  State blobs are each
primitive's own encoding.
"""

import json
import struct

from ...errors import FormatVersionMismatch
from ..pipelines.description import parse_description
from ..pipelines.templates import bind, make_template
from ..tuning.space import assignment_from_json, assignment_to_json
from .engine import FittedPipeline

MAGIC = b'MLBZ'
FORMAT_VERSION = 1


def save(fitted):
    """Encodes a fitted pipeline into the binary envelope."""
    pipeline = fitted.pipeline
    document = {
        'description': pipeline.template.description.to_json(),
        'source_outputs': list(pipeline.graph.source_outputs),
        'assignment': assignment_to_json(pipeline.assignment),
        'seed': fitted.seed,
        'fit_fingerprint': fitted.fit_fingerprint,
    }
    payload = json.dumps(document, sort_keys=True, separators=(',', ':')).encode('utf-8')
    parts = [MAGIC, struct.pack('>H', FORMAT_VERSION), struct.pack('>I', len(payload)), payload,
             struct.pack('>I', len(fitted.step_states))]
    for state in fitted.step_states:
        parts.append(struct.pack('>I', len(state)))
        parts.append(state)
    return b''.join(parts)


class _Reader(object):

    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, size):
        if self.offset + size > len(self.data):
            raise FormatVersionMismatch("Fitted pipeline data is truncated at byte {}".format(len(self.data)))
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]


def load(data, catalog, registry):
    """Decodes the binary envelope back into a FittedPipeline.

    Parameters
    ----------
    data : bytes
        Output of ``save``.
    catalog : Catalog
        Must hold every primitive the pipeline references.
    registry : NativeRegistry
        Must implement every step.

    Raises
    ------
    FormatVersionMismatch
        On a foreign, truncated or differently-versioned stream.
    UnknownPrimitive
        If the catalog lacks a referenced primitive.
    """
    reader = _Reader(bytes(data))
    if reader.take(len(MAGIC)) != MAGIC:
        raise FormatVersionMismatch("Not a fitted pipeline (bad magic bytes)")
    version = reader.unpack('>H')
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch("Fitted pipeline format version {} is not supported (expected {})".format(
            version, FORMAT_VERSION))
    try:
        document = json.loads(reader.take(reader.unpack('>I')).decode('utf-8'))
    except ValueError as e:
        raise FormatVersionMismatch("Corrupt pipeline document: {}".format(e))
    states = tuple(reader.take(reader.unpack('>I')) for _ in range(reader.unpack('>I')))
    if reader.offset != len(reader.data):
        raise FormatVersionMismatch("Unexpected trailing data after the last step state")

    template = make_template(parse_description(document['description']), catalog,
                             tuple(document['source_outputs']))
    if len(states) != len(template.graph.steps):
        raise FormatVersionMismatch("Expected {} step state(s), found {}".format(
            len(template.graph.steps), len(states)))
    for step in template.graph.steps:
        if step.annotation.implementation is not None:
            registry.get(step.annotation.implementation)
    pipeline = bind(template, assignment_from_json(document['assignment']))
    return FittedPipeline(pipeline=pipeline, step_states=states, fit_fingerprint=document['fit_fingerprint'],
                          seed=document['seed'])
