# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Catalog of primitive annotations loaded from annotation directories."""

import logging
import os

from collections import OrderedDict

from traitlets import Bool, List, Unicode, default
from traitlets.config.configurable import LoggingConfigurable

from ...errors import AnnotationError, DuplicatePrimitive, InvalidAnnotation, UnknownPrimitive
from .annotation import parse_annotation
from .validation import validate_annotation

BUNDLED_CATALOG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), 'catalog')


class Catalog(object):
    """An immutable mapping of fully-qualified primitive names to annotations.

    Entries keep the order in which they were loaded.  ``source_paths`` records, per
    name, the annotation file the entry came from.
    """

    def __init__(self, entries=None, source_paths=None):
        self._entries = OrderedDict(entries or ())
        self._source_paths = dict(source_paths or {})

    def __getitem__(self, name):
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownPrimitive(name)

    def __contains__(self, name):
        return name in self._entries

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def get(self, name, default=None):
        return self._entries.get(name, default)

    def names(self):
        return list(self._entries)

    def annotations(self):
        return list(self._entries.values())

    def source_path(self, name):
        return self._source_paths.get(name)

    @property
    def source_paths(self):
        return sorted(set(self._source_paths.values()))

    def search(self, modality=None, text=None):
        """Returns the annotations matching a modality tag and/or a free-text filter.

        The text filter is a case-insensitive substring match against the name, the
        description and the category.
        """
        matches = []
        for annotation in self._entries.values():
            if modality is not None and modality not in annotation.modalities:
                continue
            if text:
                haystack = ' '.join((annotation.name, annotation.description, annotation.category)).lower()
                if text.lower() not in haystack:
                    continue
            matches.append(annotation)
        return matches

    def merged(self, other):
        """A new catalog holding this catalog's entries plus ``other``'s (which must not collide)."""
        entries = OrderedDict(self._entries)
        paths = dict(self._source_paths)
        for name in other:
            if name in entries:
                raise DuplicatePrimitive(name, (paths[name], other.source_path(name)))
            entries[name] = other[name]
            paths[name] = other.source_path(name)
        return Catalog(entries, paths)


def _annotation_files(path):
    files = []
    for dirpath, dirnames, filenames in os.walk(path):
        dirnames.sort()
        for filename in sorted(filenames):
            if filename.endswith('.json'):
                files.append(os.path.join(dirpath, filename))
    return files


def load_annotation_file(filename, registry):
    """Parses and validates one annotation file, attaching the file to any error."""
    try:
        with open(filename, encoding='utf-8') as fp:
            annotation = parse_annotation(fp.read())
    except AnnotationError as e:
        e.reason = '{}: {}'.format(filename, e.reason)
        e.args = (e.reason,)
        e.source = filename
        raise
    violations = validate_annotation(annotation, registry)
    if violations:
        error = InvalidAnnotation(annotation.name, violations, filename)
        error.reason = '{}: {}'.format(filename, error.reason)
        error.source = filename
        raise error
    return annotation


def load_catalog(paths, registry=None, allow_shadowing=False, log=None):
    """Loads every ``*.json`` annotation under ``paths`` into a Catalog.

    Parameters
    ----------
    paths : list of str
        Catalog directories, in increasing precedence order.
    registry : NativeRegistry, optional
        Registry used to validate implementation keys (the default registry when omitted).
    allow_shadowing : bool
        When True, an annotation of a later path replaces an identically-named one of
        an earlier path.  Duplicates within one path are always an error.
    log : logging.Logger, optional

    Returns
    -------
    Catalog
    """
    if registry is None:
        from ..primitives.registry import default_registry
        registry = default_registry()
    log = log or logging.getLogger(__name__)

    entries = OrderedDict()
    source_paths = {}
    for path in paths:
        path_names = {}
        for filename in _annotation_files(path):
            annotation = load_annotation_file(filename, registry)
            name = annotation.name
            if name in path_names:
                raise DuplicatePrimitive(name, (path_names[name], filename))
            path_names[name] = filename
            if name in entries:
                if not allow_shadowing:
                    raise DuplicatePrimitive(name, (source_paths[name], filename))
                log.debug("Primitive '{}' from {} shadows {}".format(name, filename, source_paths[name]))
            entries[name] = annotation
            source_paths[name] = filename
        log.debug("Loaded {} annotation(s) from {}".format(len(path_names), path))
    return Catalog(entries, source_paths)


class CatalogManager(LoggingConfigurable):
    """Loads and caches the catalog from the bundled and user-configured directories."""

    catalog_paths_env = 'BAZAAR_CATALOG'
    catalog_paths = List(Unicode(), config=True,
                         help="""Additional catalog directories, searched after the bundled catalog.
                         (BAZAAR_CATALOG env var - os.pathsep-separated list)""")

    @default('catalog_paths')
    def catalog_paths_default(self):
        value = os.getenv(self.catalog_paths_env, '')
        return [path for path in value.split(os.pathsep) if path]

    allow_shadowing_env = 'BAZAAR_ALLOW_SHADOWING'
    allow_shadowing_default_value = False
    allow_shadowing = Bool(allow_shadowing_default_value, config=True,
                           help="""Allow annotations in later catalog directories to replace identically named
                           ones in earlier directories. (BAZAAR_ALLOW_SHADOWING env var)""")

    @default('allow_shadowing')
    def allow_shadowing_default(self):
        return bool(os.getenv(self.allow_shadowing_env,
                              str(self.allow_shadowing_default_value)).lower() == 'true')

    include_bundled = Bool(True, config=True,
                           help="""Include the catalog bundled with the package ahead of user directories.""")

    def __init__(self, registry=None, **kwargs):
        super(CatalogManager, self).__init__(**kwargs)
        self._registry = registry
        self._catalog = None

    @property
    def registry(self):
        if self._registry is None:
            from ..primitives.registry import default_registry
            self._registry = default_registry()
        return self._registry

    @property
    def search_paths(self):
        paths = [BUNDLED_CATALOG_DIR] if self.include_bundled else []
        return paths + [os.path.abspath(path) for path in self.catalog_paths]

    @property
    def catalog(self):
        if self._catalog is None:
            self._catalog = self.load()
        return self._catalog

    def load(self):
        """Loads the catalog afresh from the configured directories."""
        paths = self.search_paths
        for path in paths:
            if not os.path.isdir(path):
                self.log.warning("Catalog directory '{}' does not exist and is skipped.".format(path))
        catalog = load_catalog([path for path in paths if os.path.isdir(path)], registry=self.registry,
                               allow_shadowing=self.allow_shadowing, log=self.log)
        self.log.info("Catalog loaded: {} primitive(s) from {} director{}".format(
            len(catalog), len(paths), 'y' if len(paths) == 1 else 'ies'))
        return catalog
