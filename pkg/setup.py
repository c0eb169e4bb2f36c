"""
Setup configuration for the parallel repetition simulator.
"""
from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="qparrep",
    version="1.0.0",
    author="qparrep developers",
    description="Exact desk-scale simulator of post-quantum threshold parallel repetition",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src") + ["config"],
    package_dir={"": "src", "config": "config"},
    py_modules=["run_experiments"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "qparrep=run_experiments:main",
        ],
    },
)
