"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-9
    psd: float = 1e-9
    trace: float = 1e-9
    reconstruction: float = 1e-8
    completeness: float = 1e-9
    unit_norm: float = 1e-9
    # outcome probabilities below -prob_clip are an error, above are clipped to 0
    prob_clip: float = 1e-12
    zero_probability: float = 1e-12
    joint_zero: float = 1e-15
    xi_step: float = 1e-8
    xi_psd: float = 1e-9
    xi_max_iter: int = 60
    degenerate_gap: float = 1e-10
    sweep: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()
