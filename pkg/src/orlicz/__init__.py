"""Variational toolkit for the Phi-Laplacian Dirichlet problem in Orlicz-Sobolev spaces."""

__version__ = "0.1.0"
