"""Detector package: Monte Carlo and exact error rates of the energy detector."""

from .energy_detector import (
    DetectorConfig,
    DetectorMoments,
    DetectorResult,
    detector_ber_exact,
    detector_ber_formula,
    detector_ber_mc,
    detector_moments,
)

__all__ = [
    "DetectorConfig",
    "DetectorMoments",
    "DetectorResult",
    "detector_ber_exact",
    "detector_ber_formula",
    "detector_ber_mc",
    "detector_moments",
]
