"""Self-imaging OPO: cavity geometry, frequency-domain covariance, loss.

All rates are normalized by the total cavity decay rate, so the round-trip
time never appears: the sideband frequency, gains and detunings entering
these functions are the dimensionless (tilde) quantities.  Quadrature
vectors and covariance matrices are ordered [X_00, X_01, ..., P_00, P_01,
...] following the basis ordering, with vacuum variance 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ThresholdError
from .modes import ModeBasis
from .pdc import GainMatrix

__all__ = [
    "CavityGeometry",
    "OpoConfig",
    "SqueezingResult",
    "gouy_phase",
    "cavity_waist",
    "analytic_squeezing",
    "system_matrix",
    "covariance",
    "apply_loss",
    "symplectic_eigenvalues",
    "mode_block",
    "block_squeezing",
]

# Spectral-norm guard below the exact threshold of 1; configurations beyond it
# are refused rather than silently amplified.
_THRESHOLD_GUARD = 0.999

_HERMITICITY_TOLERANCE = 1e-9


def gouy_phase(dl1_over_radius: float, dl2_over_radius: float) -> Optional[float]:
    """Round-trip Gouy phase of the detuned self-imaging cavity, or None if unstable.

    Uses the f = R lens/mirror configuration:
    theta = arccos(1 + 2 y (x + y - x y)) with x = dl1/R, y = dl2/R.  When the
    arccos argument leaves [-1, 1] the cavity is unstable and None is
    returned (the hatched regions of the detuning map).
    """
    x = dl1_over_radius
    y = dl2_over_radius
    argument = 1.0 + 2.0 * y * (x + y - x * y)
    if argument < -1.0 or argument > 1.0:
        return None
    return math.acos(argument)


def cavity_waist(radius: float, wavelength: float) -> float:
    """Cavity waist sqrt(R lambda0 / 2 pi) of the self-imaging geometry."""
    if radius <= 0 or wavelength <= 0:
        raise ValueError("radius and wavelength must be positive")
    return math.sqrt(radius * wavelength / (2.0 * math.pi))


@dataclass(frozen=True)
class CavityGeometry:
    """Physical self-imaging cavity: mirror curvature, detunings, wavelength."""

    radius: float
    dl1: float
    dl2: float
    wavelength: float

    def __post_init__(self):
        if self.radius <= 0 or self.wavelength <= 0:
            raise ValueError("radius and wavelength must be positive")

    @property
    def gouy(self) -> Optional[float]:
        return gouy_phase(self.dl1 / self.radius, self.dl2 / self.radius)

    @property
    def stable(self) -> bool:
        return self.gouy is not None

    @property
    def waist(self) -> float:
        return cavity_waist(self.radius, self.wavelength)


@dataclass(frozen=True)
class SqueezingResult:
    """Rotated-quadrature variances and squeezing angle of one mode."""

    sx: float
    sp: float
    theta: float


def analytic_squeezing(g: float, delta: float, omega: float, eta: float) -> SqueezingResult:
    """Single-mode squeezing of a detuned OPO at one sideband frequency.

    Parameters are the normalized gain, detuning, sideband frequency and the
    escape efficiency.  Returns the variances of the rotated quadratures
    (sx <= 1 <= sp) and the rotation angle theta in (-pi/2, pi/2].

    Raises
    ------
    ThresholdError
        When 2|g| reaches the stabilizing square root (at/above threshold).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"escape efficiency must be in [0, 1], got {eta}")
    central = omega**2 - delta**2 + g**2 + 1.0
    root = math.sqrt(central**2 + 4.0 * delta**2)
    if 2.0 * abs(g) >= root:
        raise ThresholdError(
            f"configuration at/above threshold: 2|g|={2 * abs(g):.6g} >= {root:.6g}"
        )
    sx = 1.0 - eta * 4.0 * abs(g) / (2.0 * abs(g) + root)
    sp = 1.0 - eta * 4.0 * abs(g) / (2.0 * abs(g) - root)
    sign = -1.0 if g < 0 else 1.0
    denominator = central + sign * root
    if denominator == 0.0:
        theta = math.pi / 2.0 if delta else 0.0
    else:
        theta = math.atan(2.0 * delta / denominator)
    return SqueezingResult(sx=sx, sp=sp, theta=theta)


@dataclass(frozen=True)
class OpoConfig:
    """Below-threshold OPO in normalized units.

    ``t_input`` and ``t_loss`` are the output-coupler and intracavity-loss
    transmittances; ``gouy`` is the round-trip Gouy phase in radians.  The
    per-mode detunings 2 theta_G (m+n) / (T_i + T_l) and the escape
    efficiency T_i / (T_i + T_l) are derived.
    """

    t_input: float
    gain: GainMatrix
    t_loss: float = 0.0
    gouy: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.t_input <= 1.0:
            raise ValueError(f"input transmittance must be in (0, 1], got {self.t_input}")
        if not 0.0 <= self.t_loss < 1.0:
            raise ValueError(f"loss transmittance must be in [0, 1), got {self.t_loss}")
        if not 0.0 <= self.gain.scale < 1.0:
            raise ThresholdError(f"normalized gain {self.gain.scale} must be in [0, 1)")

    @property
    def basis(self) -> ModeBasis:
        return self.gain.basis

    @property
    def eta(self) -> float:
        return self.t_input / (self.t_input + self.t_loss)

    def delta_tilde(self) -> np.ndarray:
        """Per-mode normalized detunings, aligned with the basis ordering."""
        return 2.0 * self.gouy * self.basis.orders / (self.t_input + self.t_loss)


def system_matrix(config: OpoConfig, omega: float) -> np.ndarray:
    """Frequency-domain system matrix in units of the total decay rate.

    Block form [[(1 - i w) I + G, D], [-D, (1 - i w) I - G]] over the
    [X | P] ordering, with D the diagonal matrix of per-mode detunings.
    """
    size = len(config.basis)
    gain = config.gain.entries
    detuning = np.diag(config.delta_tilde())
    diag = (1.0 - 1j * omega) * np.eye(size)
    upper = np.concatenate([diag + gain, detuning], axis=1)
    lower = np.concatenate([-detuning, diag - gain], axis=1)
    return np.concatenate([upper, lower], axis=0).astype(complex)


def _covariance_from_inverse(inv_plus: np.ndarray, eta: float) -> np.ndarray:
    """Assemble V from M^-1(omega); M^-1(-omega) is its conjugate."""
    inv_minus = inv_plus.conj()
    size = inv_plus.shape[0]
    identity = np.eye(size)
    loss_term = 4.0 * eta * (1.0 - eta) * inv_plus @ inv_minus.T
    output_term = (2.0 * eta * inv_plus - identity) @ (2.0 * eta * inv_minus - identity).T
    return loss_term + output_term


def _realify(v: np.ndarray) -> np.ndarray:
    """Reduce the spectral covariance to its measurable real symmetric part.

    The exact V(omega) is Hermitian; any non-Hermitian residue is numerical
    error and is asserted small.  Its imaginary part (antisymmetric, nonzero
    only for mode-coupling gain at omega != 0) encodes inter-mode X-P
    cross-spectra that cancel in every quadratic form with a real coupling
    vector, so the real part carries all measurable variances.
    """
    scale = max(1.0, float(np.max(np.abs(v))))
    residue = float(np.max(np.abs(v - v.conj().T)))
    if residue > _HERMITICITY_TOLERANCE * scale:
        raise ArithmeticError(
            f"covariance non-Hermitian residue {residue:.3e} exceeds {_HERMITICITY_TOLERANCE * scale:.1e}"
        )
    hermitian = (v + v.conj().T) / 2.0
    return np.ascontiguousarray(hermitian.real)


def _block_covariance(config: OpoConfig, omega: float) -> np.ndarray:
    """Fast path for diagonal gain: per-mode 2x2 systems, vectorized."""
    g = np.diag(config.gain.entries)
    d = config.delta_tilde()
    a = 1.0 - 1j * omega
    det = a**2 - g**2 + d**2
    if np.min(np.abs(det)) < 1e-12:
        raise ThresholdError("system matrix is numerically singular")
    # inverse blocks of [[a+g, d], [-d, a-g]]
    i_xx = (a - g) / det
    i_xp = -d / det
    i_px = d / det
    i_pp = (a + g) / det
    eta = config.eta
    size = len(config.basis)
    v = np.zeros((2 * size, 2 * size), dtype=complex)

    def outer2(axx, axp, apx, app, bxx, bxp, bpx, bpp):
        # A @ B.T for per-mode 2x2 blocks
        return (
            axx * bxx + axp * bxp,
            axx * bpx + axp * bpp,
            apx * bxx + app * bxp,
            apx * bpx + app * bpp,
        )

    j_xx, j_xp, j_px, j_pp = i_xx.conj(), i_xp.conj(), i_px.conj(), i_pp.conj()
    loss_xx, loss_xp, loss_px, loss_pp = outer2(i_xx, i_xp, i_px, i_pp, j_xx, j_xp, j_px, j_pp)
    o_xx, o_xp, o_px, o_pp = (
        2 * eta * i_xx - 1.0,
        2 * eta * i_xp,
        2 * eta * i_px,
        2 * eta * i_pp - 1.0,
    )
    p_xx, p_xp, p_px, p_pp = (
        2 * eta * j_xx - 1.0,
        2 * eta * j_xp,
        2 * eta * j_px,
        2 * eta * j_pp - 1.0,
    )
    out_xx, out_xp, out_px, out_pp = outer2(o_xx, o_xp, o_px, o_pp, p_xx, p_xp, p_px, p_pp)
    coeff = 4.0 * eta * (1.0 - eta)
    idx = np.arange(size)
    v[idx, idx] = coeff * loss_xx + out_xx
    v[idx, idx + size] = coeff * loss_xp + out_xp
    v[idx + size, idx] = coeff * loss_px + out_px
    v[idx + size, idx + size] = coeff * loss_pp + out_pp
    return v


def covariance(config: OpoConfig, omega: float, block_diagonal: Optional[bool] = None) -> np.ndarray:
    """Output quadrature covariance matrix V(omega) of the OPO.

    Computes V = 4 eta (1-eta) M^-1(w) M^-1(-w)^T
    + (2 eta M^-1(w) - I)(2 eta M^-1(-w) - I)^T, Hermitian-symmetrizes (the
    non-Hermitian numerical residue is asserted below 1e-9) and returns the
    real part, which carries every measurable quadrature variance; for
    diagonal gain the imaginary part vanishes identically.  With a diagonal
    gain matrix the system block-decouples per mode and a vectorized 2x2
    solver is used; pass ``block_diagonal`` to force either path.

    Raises
    ------
    ThresholdError
        If the gain spectral norm reaches the threshold guard (0.999) or the
        system matrix is singular.
    """
    if config.gain.spectral_norm() >= _THRESHOLD_GUARD:
        raise ThresholdError(
            f"gain spectral norm {config.gain.spectral_norm():.4f} >= {_THRESHOLD_GUARD}"
        )
    if block_diagonal is None:
        block_diagonal = config.gain.is_diagonal
    if block_diagonal:
        if not config.gain.is_diagonal:
            raise ValueError("block-diagonal solver requires a diagonal gain matrix")
        return _realify(_block_covariance(config, omega))
    matrix = system_matrix(config, omega)
    try:
        inverse = np.linalg.inv(matrix)
    except np.linalg.LinAlgError as err:
        raise ThresholdError(f"system matrix is singular: {err}") from err
    return _realify(_covariance_from_inverse(inverse, config.eta))


def apply_loss(v: np.ndarray, eta_extra: float) -> np.ndarray:
    """Uniform beamsplitter loss against vacuum: eta V + (1 - eta) I."""
    if not 0.0 <= eta_extra <= 1.0:
        raise ValueError(f"transmission must be in [0, 1], got {eta_extra}")
    return eta_extra * v + (1.0 - eta_extra) * np.eye(v.shape[0])


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a covariance matrix in [X | P] ordering.

    All >= 1 for a physical state, = 1 for a pure one.
    """
    size = v.shape[0] // 2
    omega = np.zeros((2 * size, 2 * size))
    omega[:size, size:] = np.eye(size)
    omega[size:, :size] = -np.eye(size)
    # eigenvalues of i Omega V come in +/- nu pairs on the real axis
    eig = np.linalg.eigvals(1j * omega @ v)
    return np.sort(eig.real)[size:]


def mode_block(v: np.ndarray, basis: ModeBasis, mode) -> np.ndarray:
    """2x2 [X, P] covariance block of one mode."""
    i = basis.index(mode)
    size = len(basis)
    return np.array(
        [[v[i, i], v[i, i + size]], [v[i + size, i], v[i + size, i + size]]]
    )


def block_squeezing(v: np.ndarray, basis: ModeBasis) -> list[SqueezingResult]:
    """Per-mode rotated-quadrature variances extracted from a covariance matrix.

    Eigendecomposes each mode's 2x2 block; the minor axis is the squeezed
    variance and the rotation angle is folded into (-pi/2, pi/2].
    """
    results = []
    for mode in basis:
        block = mode_block(v, basis, mode)
        eigenvalues, vectors = np.linalg.eigh(block)
        minor = int(np.argmin(eigenvalues))
        direction = vectors[:, minor]
        theta = math.atan2(direction[1], direction[0])
        if theta <= -math.pi / 2:
            theta += math.pi
        elif theta > math.pi / 2:
            theta -= math.pi
        results.append(
            SqueezingResult(
                sx=float(eigenvalues[minor]), sp=float(eigenvalues[1 - minor]), theta=theta
            )
        )
    return results
