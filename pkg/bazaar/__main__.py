# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""CLI entrypoint for the bazaar package."""

if __name__ == '__main__':
    import bazaar.bazaarapp as app
    app.launch_instance()
