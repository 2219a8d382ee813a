"""Builtin deterministic test functions on equidistant grids of [0, 1]."""
import numpy as np

from .likelihood import Dataset


def equidistant(n):
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return np.arange(n) / (n - 1)


def linear(x):
    return np.asarray(x, dtype=float) - 0.5


def sine(x):
    return np.sin(2.0 * np.pi * np.asarray(x, dtype=float))


MODELS = {"linear": linear, "sin": sine}


def builtin_dataset(name, n):
    x = equidistant(n)
    return Dataset(x, MODELS[name](x))
