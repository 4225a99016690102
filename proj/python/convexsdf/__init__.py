"""Convex shape priors on signed distance functions."""

from ._core import (
    approx_hull,
    convexity_violation,
    exact_hull,
    hull_error,
    oracle_hull,
    psd_project,
    segment,
    signed_distance,
    synth,
)

__all__ = [
    "approx_hull",
    "convexity_violation",
    "exact_hull",
    "hull_error",
    "oracle_hull",
    "psd_project",
    "segment",
    "signed_distance",
    "synth",
]
