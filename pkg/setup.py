from setuptools import setup, find_packages

setup(
    name='vlc-shaper',
    version='0.1',
    packages=find_packages(exclude=['tests', 'tests.*']),
    python_requires='>=3.10',
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'jsonschema',
        'colorama'
    ],
    entry_points={
        'console_scripts': [
            'vlc-shaper=packages.experiment.src.cli:main',
        ],
    },
)
