# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.

import os
import sys
from setuptools import setup

here = os.path.abspath(os.path.dirname(__file__))

v = sys.version_info
if v[:2] < (3, 7):
    error = "ERROR: Bazaar requires Python version 3.7 or above."
    print(error, file=sys.stderr)
    sys.exit(1)

version_ns = {}
with open(os.path.join(here, 'bazaar', '_version.py')) as f:
    exec(f.read(), {}, version_ns)

setup_args = dict(
    name='bazaar',
    author='Bazaar Development Team',
    description='Composes machine learning pipelines from annotated primitives and searches them with AutoML',
    long_description='''\
An engine that catalogs annotated machine learning primitives, recovers
pipeline graphs from step lists, fits and serializes pipelines, and searches
pipeline templates with Gaussian-process tuners and bandit selectors.
''',
    version=version_ns['__version__'],
    license='BSD',
    platforms="Linux, Mac OS X, Windows",
    keywords=['AutoML', 'Machine Learning', 'Pipelines', 'Hyperparameter Tuning'],
    packages=[
        'bazaar',
        'bazaar.services',
        'bazaar.services.annotations',
        'bazaar.services.execution',
        'bazaar.services.pipelines',
        'bazaar.services.primitives',
        'bazaar.services.search',
        'bazaar.services.selection',
        'bazaar.services.store',
        'bazaar.services.tuning',
    ],
    package_data={
        'bazaar': ['catalog/*.json', 'templates/*.json', 'services/pipelines/dot/*.j2'],
    },
    install_requires=[
        'jinja2>=2.10',
        'jsonschema>=3.0.0',
        'jupyter_core>=4.4.0',
        'numpy>=1.17.0',
        'pandas>=1.0.0',
        'scipy>=1.4.0',
        'tornado>=4.2.0',
        'traitlets>=4.3.0',
    ],
    python_requires='>=3.7',
    classifiers=[
        'Intended Audience :: Developers',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3'
    ],
    include_package_data=True,
)

if 'setuptools' in sys.modules:
    # setupstools turns entrypoint scripts into executables on windows
    setup_args['entry_points'] = {
        'console_scripts': [
            'bazaar = bazaar:launch_instance'
        ]
    }

if __name__ == '__main__':
    setup(**setup_args)
