"""Seeded random generators.

Philox is counter-based, so streams for distinct seeds are independent and
a given seed reproduces bit-identically regardless of how much any other
stream consumed. Everything stochastic in the package goes through here.
"""

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))
