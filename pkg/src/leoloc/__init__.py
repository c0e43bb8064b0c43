"""Passive 3D localization of LEO transmitters with a sparse L-array.

Three antennas in an L, spaced several wavelengths apart, give precise but
ambiguous angles; a Newtonian constraint turns angle tracks into slant
range; the Doppler-rate profile picks the true grating lobe. The package
covers the whole chain: geometry, orbit synthesis, the IQ front end,
ambiguity enumeration, height search, lobe selection, and a Monte Carlo
harness with file formats and a CLI around it.
"""

from .aoa import (AoATrack, ArrayGeometry, aoa_from_phase, candidate_tracks,
                  enumerate_candidates, forward_phase)
from .dsar import (CandidateScore, DopplerFit, candidate_doppler,
                   culmination_time, fit_doppler, select_candidate)
from .errors import (ConfigError, FileFormatError, FlatObjective,
                     InsufficientOverlap, InsufficientSamples,
                     InvalidElevation, LeolocError, NoBeaconDetected,
                     NoPassFound, NoSurvivingCandidate)
from .geodesy import (EARTH, EarthModel, EcefVector, GeodeticPosition,
                      azel_to_enu_unit, ecef_to_eci, eci_to_ecef, enu_basis,
                      enu_to_azel, geodetic_to_ecef, slant_range_from_height)
from .io import (load_scenario, parse_scenario, read_iq_file, read_pass_file,
                 read_result_file, read_truth_file, write_iq_file,
                 write_pass_file, write_result_file, write_truth_file)
from .montecarlo import (EvaluationReport, GeneratedPass, PassRecord,
                         Scenario, evaluate, generate_passes)
from .orbitsim import (OrbitSpec, PassTruth, orbit_above_station,
                       observe_pass, propagate_circular, true_doppler)
from .pipeline import (CalibrationOffsets, GroundStation, LocalizationResult,
                       LocalizeConfig, LocalizeDiagnostics, angle_error_3d,
                       apply_calibration, calibrate, localize,
                       synthesize_observables)
from .ranging import (DEFAULT_HEIGHT_GRID, HeightGrid, RangeEstimate,
                      estimate_height, fitted_los, gravimetric_residual,
                      mean_speed, track_to_ecef)
from .signalproc import (IqCapture, NoiseSpec, PassObservables, Spectrogram,
                         detect_and_track, stft, synthesize_capture)

__version__ = "0.1.0"

__all__ = [
    "AoATrack", "ArrayGeometry", "aoa_from_phase", "candidate_tracks", "enumerate_candidates", "forward_phase",
    "CandidateScore", "DopplerFit", "candidate_doppler", "culmination_time",
    "fit_doppler", "select_candidate",
    "ConfigError", "FileFormatError", "FlatObjective", "InsufficientOverlap",
    "InsufficientSamples", "InvalidElevation", "LeolocError",
    "NoBeaconDetected", "NoPassFound", "NoSurvivingCandidate",
    "EARTH", "EarthModel", "EcefVector", "GeodeticPosition",
    "azel_to_enu_unit", "ecef_to_eci", "eci_to_ecef", "enu_basis",
    "enu_to_azel", "geodetic_to_ecef", "slant_range_from_height",
    "load_scenario", "parse_scenario", "read_iq_file", "read_pass_file",
    "read_result_file", "read_truth_file", "write_iq_file", "write_pass_file",
    "write_result_file", "write_truth_file",
    "EvaluationReport", "GeneratedPass", "PassRecord", "Scenario", "evaluate",
    "generate_passes",
    "OrbitSpec", "PassTruth", "orbit_above_station", "observe_pass",
    "propagate_circular", "true_doppler",
    "CalibrationOffsets", "GroundStation", "LocalizationResult",
    "LocalizeConfig", "LocalizeDiagnostics", "angle_error_3d",
    "apply_calibration", "calibrate", "localize", "synthesize_observables",
    "DEFAULT_HEIGHT_GRID", "HeightGrid", "RangeEstimate", "estimate_height",
    "fitted_los", "gravimetric_residual", "mean_speed", "track_to_ecef",
    "IqCapture", "NoiseSpec", "PassObservables", "Spectrogram",
    "detect_and_track", "stft", "synthesize_capture",
    "__version__",
]
