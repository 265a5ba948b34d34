"""Discrete-symbol pseudodifferential operators on the torus T^n.

Modules
-------
fourier    periodic functions on a grid, spectral derivatives, sup norms
dsl        closed-form symbol expressions
symbols    discrete symbols, order and analyticity classifiers
quantize   truncated operator matrices, extraction, norms
orbit      the translation orbit y -> T_y A T_-y
lbeta      L^beta, symbol recovery, derivative bound chain, mu constant
catalog    shipped symbol families
commands   the experiments behind the ``torusop`` command line
"""
__version__ = "0.1.0"
