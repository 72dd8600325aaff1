import io
from setuptools import setup, find_packages


with io.open('README.md', encoding='utf_8') as fp:
    readme = fp.read()

setup(name='dpq2p1',
      version='0.1.0',
      description='Dual-parametric Q2-P1 mixed finite elements for '
                  'cavitation in incompressible elasticity',
      long_description=readme,
      long_description_content_type='text/markdown; charset=UTF-8',
      packages=find_packages(exclude=['benchmarks', 'experiments']),
      package_data={'dpq2p1.datasets': ['*.csv']},
      install_requires=["numpy", "scipy", "scikit-learn", "pandas",
                        "matplotlib", "seaborn", "joblib",
                        'tomli; python_version < "3.11"'],
      entry_points={'console_scripts': ['dpq2p1=dpq2p1.cli:main']},
      )
