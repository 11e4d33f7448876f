# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Entrypoint for the bazaar package."""
from .bazaarapp import launch_instance
from ._version import __version__
