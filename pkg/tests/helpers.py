"""State generators shared by the test modules."""

import numpy as np

from passivegauss.core import from_blocks, random_state, squeezed, validate


def random_single_mode(rng, max_squeeze=1.0, max_thermal=1.5):
    """Rotated squeezed thermal single-mode state (always valid)."""
    return squeezed(rng.uniform(0, max_squeeze), rng.uniform(0, np.pi), rng.uniform(1, max_thermal))


def random_symmetric_simon(rng):
    """A = B = a 1, C = diag(c, d) with c d <= 0, by rejection sampling."""
    while True:
        a = rng.uniform(1, 3)
        c = rng.uniform(0, a)
        d = -rng.uniform(0, a)
        g = from_blocks(a * np.eye(2), a * np.eye(2), np.diag([c, d]))
        if validate(g).ok:
            return g


def criterion_states(rng, count):
    """Random valid states with n cycling through 2, 3, 4, on both sides of the criterion."""
    return [
        random_state(2 + i % 3, rng, max_squeeze=rng.uniform(0, 0.6), max_thermal=rng.uniform(1, 3))
        for i in range(count)
    ]
