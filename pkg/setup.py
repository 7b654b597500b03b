from setuptools import setup, find_packages

setup(
    name="moeda",
    version="1.0.0",
    description="MOEDA - Multi-objective drive-strength remapping of gate-level netlists",
    packages=find_packages(exclude=["tests", "examples*"]),
    python_requires=">=3.10",
    install_requires=[
        'numpy>=1.24.0',
        'pandas>=2.0.0',
        'scipy>=1.11.0',
        'requests>=2.31.0',
        'networkx>=3.1',
        'pymoo>=0.6.0',
    ],
    extras_require={
        'dev': ['pytest>=7.4'],
    },
    entry_points={
        'console_scripts': ['moeda=moeda.cli:main'],
    },
)
