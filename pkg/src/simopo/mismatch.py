"""Spatial mode mismatch: expansion coefficients, propagation-plane phases,
target-mode variances and reference single-mode models.

A mismatched target mode (displaced, tilted, or resized HG00) is expanded in
the target-frame HG basis; propagation from the OPO to the target plane
(image plane via a 4f relay, Fourier plane via a single lens) contributes a
per-order phase factor.  The resulting complex coefficients are realified
into a length-2K vector whose quadratic form with the covariance matrix is
the measured quadrature variance.  Mismatch is applied along x only; the
y direction is equivalent by symmetry of the source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BasisMismatchError, DegenerateOpticsError
from .modes import ModeBasis, ModeIndex

__all__ = [
    "KINDS",
    "PLANES",
    "MismatchSpec",
    "CouplingVector",
    "default_lo_phase",
    "mismatch_coefficients",
    "plane_factor",
    "abcd_mode_transform",
    "coupling_vector",
    "target_variance",
    "reference_variances",
    "enhancement_factor",
    "to_decibels",
]

KINDS = ("displacement", "tilt", "size")
PLANES = ("image", "fourier")


def default_lo_phase(kind: str, plane: str) -> float:
    """Local-oscillator phase that keeps the coupling vector real.

    Zero in the image plane; pi/2 for tilt and size mismatch in the Fourier
    plane (the extra quarter-wave shift that aligns the coupled noise with
    the squeezed quadratures).
    """
    if plane == "fourier" and kind in ("tilt", "size"):
        return math.pi / 2.0
    return 0.0


@dataclass(frozen=True)
class MismatchSpec:
    """One mismatch scenario: kind, dimensionless strength, target plane.

    ``parameter`` is d/w_t for displacement, pi w_t sin(phi)/lambda0 for
    tilt, and w/w_t for size.  ``lo_phase`` of None selects the
    per-plane/kind default of :func:`default_lo_phase`.
    """

    kind: str
    parameter: float
    plane: str = "image"
    lo_phase: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of {PLANES}, got {self.plane!r}")
        if self.kind == "size":
            if self.parameter <= 0:
                raise ValueError("size ratio must be positive")
        elif self.parameter < 0:
            raise ValueError("mismatch parameter must be non-negative")

    def resolved_lo_phase(self) -> float:
        if self.lo_phase is None:
            return default_lo_phase(self.kind, self.plane)
        return self.lo_phase


def mismatch_coefficients(spec: MismatchSpec, basis: ModeBasis) -> np.ndarray:
    """Expansion coefficients of the mismatched mode over the target HG basis.

    Displacement and tilt populate only the n = 0 row (mismatch along x);
    size difference populates even (m, n) pairs.  The coefficients are
    complex for tilt (the i^m ladder) and real otherwise; their squared
    magnitudes sum to 1 in the untruncated limit.
    """
    p = spec.parameter
    out = np.zeros(len(basis), dtype=complex)
    if spec.kind in ("displacement", "tilt"):
        envelope = math.exp(-(p**2) / 2.0)
        for i, (m, n) in enumerate(basis):
            if n != 0:
                continue
            value = envelope * p**m / math.sqrt(math.factorial(m))
            if spec.kind == "tilt":
                value = value * 1j**m
            out[i] = value
    else:
        log_ratio = math.log(p)
        half_tanh = math.tanh(log_ratio) / 2.0
        sech = 1.0 / math.cosh(log_ratio)
        for i, (m, n) in enumerate(basis):
            if m % 2 or n % 2:
                continue
            out[i] = (
                math.sqrt(math.factorial(m) * math.factorial(n))
                * half_tanh ** ((m + n) // 2)
                * sech
                / (math.factorial(m // 2) * math.factorial(n // 2))
            )
    return out


def plane_factor(mode, plane: str) -> complex:
    """Per-mode phase entering the coupling coefficients.

    (-1)^(m+n+1) for the image plane, (-i)^(m+n+1) for the Fourier plane.
    """
    order = ModeIndex(*mode).order
    if plane == "image":
        return complex((-1.0) ** (order + 1))
    if plane == "fourier":
        return (-1j) ** (order + 1)
    raise ValueError(f"plane must be one of {PLANES}, got {plane!r}")


def abcd_mode_transform(
    mode, a: float, b: float, c: float, d: float, waist_in: float, wavenumber: float
):
    """Huygens-Fresnel propagation of one HG mode through an ABCD system.

    Returns (amplitude_factor, q_out, waist_out): the per-mode complex
    amplitude factor (w1 / (A w + 2iB/(k w)))^(m+n+1) of unit modulus, the
    output complex beam parameter, and the output spot size
    w1 = sqrt(A^2 w^2 + (2B/(k w))^2).

    Raises
    ------
    DegenerateOpticsError
        If A w + 2iB/(k w) vanishes (the transform collapses the beam).
    """
    if abs(a * d - b * c - 1.0) > 1e-9:
        raise ValueError("ABCD matrix must have unit determinant")
    order = ModeIndex(*mode).order
    denom = a * waist_in + 2j * b / (wavenumber * waist_in)
    if denom == 0:
        raise DegenerateOpticsError("ABCD transform degenerate: A w + 2iB/(k w) = 0")
    waist_out = math.sqrt((a * waist_in) ** 2 + (2.0 * b / (wavenumber * waist_in)) ** 2)
    factor = (waist_out / denom) ** (order + 1)
    q_in = 1j * wavenumber * waist_in**2 / 2.0
    q_out = (-a * q_in + b) / (-c * q_in + d)
    return factor, q_out, waist_out


@dataclass(frozen=True)
class CouplingVector:
    """Realified coupling of a mismatched target mode to the source basis.

    ``coefficients`` are the complex per-mode couplings (mismatch expansion
    times plane factor times LO phase); ``vector`` holds their real parts in
    the X slots and imaginary parts in the P slots.  ``weight`` is the
    captured fraction sum |coefficient|^2 <= 1; the truncation remainder
    couples to vacuum.
    """

    coefficients: np.ndarray
    basis: ModeBasis

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.coefficients.real, self.coefficients.imag])

    @property
    def weight(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def coupling_vector(spec: MismatchSpec, basis: ModeBasis) -> CouplingVector:
    """Coupling vector of a mismatch scenario over ``basis``."""
    factors = np.array([plane_factor(mode, spec.plane) for mode in basis])
    phase = np.exp(1j * spec.resolved_lo_phase())
    coefficients = mismatch_coefficients(spec, basis) * factors * phase
    return CouplingVector(coefficients=coefficients, basis=basis)


def target_variance(v: np.ndarray, coupling: CouplingVector) -> float:
    """Quadrature variance measured in the mismatched target mode: r^T V r.

    The weight missing from the truncated expansion (1 - sum |beta|^2)
    enters as vacuum.
    """
    r = coupling.vector
    if v.shape != (r.size, r.size):
        raise BasisMismatchError(
            f"covariance of shape {v.shape} does not match coupling of length {r.size}"
        )
    return float(r @ v @ r) + (1.0 - coupling.weight)


def reference_variances(beta00_sq: float, s00: float) -> tuple[float, float]:
    """Reference models at overlap beta00^2: single-mode source and infinite squeezing.

    Returns (single_mode, infinite_squeezing) variances: the weighted mean
    beta00^2 s00 + (1 - beta00^2), and its s00 -> 0 limit.
    """
    if not 0.0 <= beta00_sq <= 1.0:
        raise ValueError(f"overlap fraction must be in [0, 1], got {beta00_sq}")
    if s00 < 0:
        raise ValueError(f"variance must be non-negative, got {s00}")
    single = beta00_sq * s00 + (1.0 - beta00_sq)
    infinite = 1.0 - beta00_sq
    return single, infinite


def enhancement_factor(var_multimode: float, var_single: float) -> float:
    """Advantage of the multimode source in dB: -10 log10(var_multi / var_single)."""
    if var_multimode <= 0 or var_single <= 0:
        raise ValueError("variances must be positive")
    return -10.0 * math.log10(var_multimode / var_single)


def to_decibels(variance: float) -> float:
    """Squeezing level in dB relative to vacuum: -10 log10(variance).

    A variance of exactly zero (the idealized infinite-squeezing reference at
    perfect overlap) maps to +inf.
    """
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    if variance == 0:
        return math.inf
    return -10.0 * math.log10(variance)
