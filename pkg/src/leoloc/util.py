"""Small shared numerics helpers."""

from __future__ import annotations

import numpy as np


def wrap_phase(x):
    """Wrap angle(s) to the half-open interval (-pi, pi].

    Implemented as the negated wrap of -x so the closed end lands on +pi
    (np.mod alone would put it on -pi).
    """
    wrapped = -(np.mod(-np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def wrap_two_pi(x):
    """Wrap angle(s) to [0, 2pi)."""
    wrapped = np.mod(np.asarray(x, dtype=float), 2.0 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def circular_mean(x) -> float:
    """Mean direction of angles in radians, in (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    return float(np.angle(np.exp(1j * x).mean()))
