from setuptools import setup, find_packages

setup(
    name="ito-fourier",
    version="0.2.0",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "sympy>=1.10",
    ],
    extras_require={
        'test': [
            "pytest>=7.0",
            "hypothesis>=6.0",
        ],
    },
    entry_points={
        'console_scripts': [
            'ito-fourier=ito_fourier.cli:main',
        ],
    },
    description="Multiple Fourier series expansions of iterated Ito stochastic integrals",
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    keywords="stochastic integrals, Legendre polynomials, Milstein scheme, Monte Carlo",
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
    ],
    python_requires=">=3.8",
)
