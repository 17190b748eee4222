from setuptools import setup

setup(
    name="eon-classifier",
    version="0.1.0",
    packages=["src", "src.numerics", "src.network", "src.synthetic", "src.experiments"],
    python_requires=">=3.10",
    entry_points={"console_scripts": ["eon=src.cli:main"]},
)
