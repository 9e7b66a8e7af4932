"""A tunable four-state benchmark family with a known closed-form optimum.

One parameter h in [0, sqrt(2) - 1] skews both the priors and the state
purities away from the symmetric tetrahedron at h = 0.  The expected
guessing probability is transcribed verbatim as a two-branch closed
form; it shares no code with the solver and serves purely as an
expected-value generator for sweeps and regression tests.
"""

from __future__ import annotations

import math

import numpy as np

from .bloch import Ensemble

H_MAX = math.sqrt(2.0) - 1.0


def skewed_tetrahedron_ensemble(h: float) -> Ensemble:
    """Four qubit states whose priors and purities are skewed by h."""
    if not 0.0 <= h <= H_MAX + 1e-12:
        raise ValueError(f"h={h} outside [0, sqrt(2)-1]")
    weights = [(1.0 + h) / 4.0, 0.25, 0.25, (1.0 - h) / 4.0]
    blochs = [
        0.5 * np.array([1.0, 0.0, -1.0]),
        ((1.0 + h) / 2.0) * np.array([-1.0, 0.0, -1.0]),
        ((1.0 - h) / 2.0) * np.array([0.0, 1.0, 1.0]),
        0.5 * np.array([0.0, -1.0, 1.0]),
    ]
    return Ensemble.from_lists(weights, blochs)


def closed_form_value(h: float, four_outcomes: bool) -> float:
    """Published closed-form guessing probability for the family.

    ``four_outcomes`` selects the all-outcome branch (small h); the
    other branch applies once the optimal measurement drops to three
    outcomes.
    """
    if four_outcomes:
        num = (
            1.0 - 4 * h**2 + 2 * h**3 + 12 * h**4 + 4 * h**5
            - h**6 + 2 * h**7 + 2 * h**8
        )
        den = 4 * h * (
            2 - h - 10 * h**2 - 2 * h**3 + 2 * h**4 - h**5 - 2 * h**6
        ) + 4 * (1 - h**2) * math.sqrt(2 - 10 * h**2 + 5 * h**4 - h**8)
    else:
        num = 9 + 18 * h + h**2 - 8 * h**3 + 13 * h**4 + 6 * h**5 + h**6
        den = 8 * h * (7 + 10 * h - 6 * h**2 - 2 * h**3 - h**4) + 8 * (
            1 + h
        ) * math.sqrt((1 + 2 * h) * (9 - h**4) * (5 - 2 * h + h**2))
    return 0.25 + h / 4.0 + num / den
