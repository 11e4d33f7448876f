# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
