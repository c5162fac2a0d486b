import os
from setuptools import setup

# Utility function to read the README file.
# Used for the long_description.  It's nice, because now 1) we have a top level
# README file and 2) it's easier to type in the README file than to put a raw
# string in below ...
def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()

setup(
    name = "rbtools",
    version = "0.1.0",
    description = ("Roundabout decision making for an autonomous ego vehicle: "
                   "object-oriented POMDP planning with Monte-Carlo tree search "
                   "and a kinematic traffic microsimulator."),
    license = "Apache2.0",
    package_dir = {'': 'lib'},
    packages=['rbtools', 'rbtools.tests'],
    python_requires='>=3.7',
    install_requires=[
      'numpy',
      'scipy',
      'pandas',
      'wrapit',
      'doit',
      'pytest'],
    package_data={
        'rbtools': ['data/scenarios/*.json'],
    },
    entry_points = {
                    'console_scripts': [
                        'rbtools = rbtools.main:main',
                    ]
                   },
    long_description=read('README.md'),
    include_package_data=True,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering",
        "License :: OSI Approved :: Apache Software License",
    ],
)
