"""Radial basis function networks with Poisson-process priors over centers."""

from .network import Hyperparams, NetworkState, forward, log_likelihood, grad_log_posterior

__all__ = [
    "Hyperparams",
    "NetworkState",
    "forward",
    "log_likelihood",
    "grad_log_posterior",
]

__version__ = "0.1.0"
