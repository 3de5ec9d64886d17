#!/usr/bin/env python
import configparser

config = configparser.ConfigParser()
config.read('setup.ini')

module = __import__(config.get('setup', 'setuplib'),
                    globals(),
                    locals(),
                    ['setup'], 0)
setup = getattr(module, 'setup')

readme = open("README.md", "r")


setup(name='nrepshell',
      version=config.get('setup', 'release'),
      description='Shape optimisation of thin shells with neural '
                  'parametric representations',
      license='Apache v2',
      packages=['nrepshell',
                'nrepshell.bench',
                'nrepshell.cli',
                'nrepshell.config',
                'nrepshell.geometry',
                'nrepshell.lattice',
                'nrepshell.nrep',
                'nrepshell.optimizer',
                'nrepshell.shell'],
      install_requires=['numpy>=1.17',
                        'scipy>=1.3'],
      extras_require={'cholmod': ['scikit-sparse'],
                      'test': ['pytest']},
      entry_points={'console_scripts': ['nrepshell = nrepshell.cli:run']},
      classifiers=['License :: OSI Approved :: Apache Software License',
                   'Programming Language :: Python',
                   'Programming Language :: Python :: 3',
                   'Topic :: Scientific/Engineering',
                   'Topic :: Scientific/Engineering :: Mathematics',
                   'Intended Audience :: Science/Research',
                   'Development Status :: 4 - Beta'],
      long_description=readme.read())
