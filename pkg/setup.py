"""
Minimal setup.py for the scholarly harvester.

This makes the pipeline modules and the 'adapters' and 'validators' packages
importable from anywhere and installs the `harvest` command.

Usage:
    pip install -e .            # core
    pip install -e .[pdf,test]  # real PDF text extraction and the test suite
"""

from setuptools import setup, find_packages

setup(
    name="scholarly-harvester",
    version="0.1.0",
    description="Search-driven acquisition of research papers: title search and homepage crawling",
    py_modules=[
        "crawler",
        "doc_model",
        "docstore",
        "fixture_generator",
        "forest",
        "homepage_features",
        "ltr_models",
        "pipeline_cli",
        "pipeline_config",
        "search_crawl_run",
        "search_gateway",
    ],
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "requests>=2.31.0",
        "numpy>=1.24",
        "beautifulsoup4>=4.12",
        "tomli>=2.0; python_version<'3.11'",
    ],
    extras_require={
        "pdf": ["pdfplumber>=0.10"],
        "test": ["pytest>=7.4"],
    },
    entry_points={
        "console_scripts": ["harvest=pipeline_cli:main"],
    },
    python_requires=">=3.8",
)
