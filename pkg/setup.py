from setuptools import setup, find_packages

setup(
    name="labor-market-sim",
    version="0.1.0",
    description="Probabilistic labor market simulator with Beveridge and Philips curve tooling",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24,<3.0",
        "scipy>=1.10,<2.0",
        "pandas>=2.0,<3.0",
        "tqdm>=4.60,<5.0",
        "joblib>=1.3,<2.0",
        "python-dotenv>=1.0.0,<2.0.0",
    ],
    extras_require={
        "test": [
            "pytest>=7.0",
            "hypothesis>=6.0",
        ],
    },
    python_requires=">=3.11",
    entry_points={
        "console_scripts": [
            "labor-market-sim=labor_market_sim.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
