"""Failure categories raised by the localization chain.

Every degenerate input gets its own exception type so that callers (and the
CLI) can report a machine-readable category instead of a bare stack trace.
"""

from __future__ import annotations


class LeolocError(Exception):
    """Base class for all failures raised by this package."""

    #: short machine-readable category, stable across releases
    category = "error"


class ConfigError(LeolocError):
    """A scenario or config file failed validation.

    The message carries the offending field path, e.g. ``orbit.heights_km``.
    """

    category = "config"

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NoPassFound(LeolocError):
    """The orbit never rises above the elevation mask at this station."""

    category = "no-pass"


class InsufficientSamples(LeolocError):
    """Too few (or too poorly spread) valid samples for the requested fit."""

    category = "insufficient-samples"


class NoBeaconDetected(LeolocError):
    """Front end found no persistent tone above the detection threshold."""

    category = "no-beacon"


class InvalidElevation(LeolocError):
    """Phase pair lies outside the feasible cone (arccos argument > 1)."""

    category = "invalid-elevation"


class NoSurvivingCandidate(LeolocError):
    """All ambiguity candidates were rejected by the physical filters."""

    category = "no-candidate"


class FlatObjective(LeolocError):
    """Height search cannot discriminate: residual is flat across the grid."""

    category = "flat-objective"


class InsufficientOverlap(LeolocError):
    """Calibration truth and observables share too few common samples."""

    category = "insufficient-overlap"


class FileFormatError(LeolocError):
    """A pass/truth/result/capture file does not parse as its format."""

    category = "file-format"
