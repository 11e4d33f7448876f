"""bazaar version info"""

# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.

__version__ = '0.1.0.dev0'
