import os
import sys
from setuptools import setup, find_packages

# Tambahkan path root ke sys.path untuk pembacaan file
project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

# Define requirements
requirements = [
    "numpy>=1.21.0",
    "scipy>=1.7.0",
    "pandas>=1.3.0",
    "statsmodels>=0.13.0",
]

setup(
    name="hjortic",
    version="0.1.0",
    description="Focused model selection, likelihood monitoring and confidence distributions for annual series",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests*", "examples*", "venv*", "env*"]),
    py_modules=["main", "hjortic_lib"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Software Development :: Libraries :: Python Modules"
    ],
    python_requires=">=3.8",
    install_requires=requirements,
    extras_require={
        "dev": ["pytest>=7.0", "pytest-cov>=3.0"],
    },
    entry_points={
        "console_scripts": [
            "hjortic=main:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
    keywords="time-series autoregressive model-selection fic aic bic confidence-distribution copula",
)
