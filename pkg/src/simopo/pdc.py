"""Parametric down-conversion kernels and parametric gain matrices.

Two kernel models are supported: the Gaussian approximation, which is
diagonal in its own HG basis with eigenvalues mu^(m+n), and the exact
phase-matching (sinc) kernel, which is projected numerically onto the
cavity mode basis.  The Schmidt number of either kernel uses the standard
probability convention K = (sum lambda)^2 / sum lambda^2 with lambda the
squared singular values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_hermite

from .errors import BracketError, QuadratureConvergenceError, ThresholdError
from .modes import ModeBasis, hg_polynomial_part

__all__ = [
    "GaussianKernelParams",
    "SincKernelParams",
    "GainMatrix",
    "mu_from_xi",
    "schmidt_number",
    "gaussian_gain",
    "sinc_kernel",
    "sinc_gain",
    "transformed_gain",
    "gain_schmidt_number",
    "kernel_schmidt_spectrum",
    "kernel_schmidt_number",
    "fit_alpha",
    "fit_pump_waist",
]


def mu_from_xi(xi: float) -> float:
    """Kernel eigenvalue ratio mu = (1 - sqrt(xi)) / (1 + sqrt(xi)).

    The focusing parameter must satisfy 0 < xi <= 1, which keeps mu in [0, 1).
    """
    if xi <= 0:
        raise ValueError(f"focusing parameter must be positive, got {xi}")
    if xi > 1:
        raise ValueError(f"focusing parameter must be <= 1, got {xi}")
    root = math.sqrt(xi)
    return (1.0 - root) / (1.0 + root)


def schmidt_number(xi: float) -> float:
    """Schmidt number M = (sqrt(xi) + 1/sqrt(xi))^2 / 4 of the Gaussian kernel.

    Minimum value 1 at xi = 1; grows as xi deviates from 1.
    """
    if xi <= 0:
        raise ValueError(f"focusing parameter must be positive, got {xi}")
    root = math.sqrt(xi)
    return 0.25 * (root + 1.0 / root) ** 2


@dataclass(frozen=True)
class GaussianKernelParams:
    """Parameters of the Gaussian-approximated down-conversion kernel.

    ``wavelength`` (the pump wavelength) is only needed for the physical
    crystal-length bookkeeping; the quantum state depends on (xi, pump_waist)
    alone.
    """

    xi: float
    pump_waist: float
    alpha: float = 1.0
    wavelength: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.xi <= 1:
            raise ValueError(f"focusing parameter must be in (0, 1], got {self.xi}")
        if self.pump_waist <= 0 or self.alpha <= 0:
            raise ValueError("pump waist and alpha must be positive")

    @property
    def mu(self) -> float:
        return mu_from_xi(self.xi)

    @property
    def hamiltonian_waist(self) -> float:
        """Waist of the kernel eigenmodes, sqrt(2) xi^(1/4) pump_waist."""
        return math.sqrt(2.0) * self.xi**0.25 * self.pump_waist

    @property
    def rayleigh_range(self) -> float:
        if self.wavelength is None:
            raise ValueError("wavelength required for the Rayleigh range")
        return math.pi * self.pump_waist**2 / self.wavelength

    @property
    def crystal_length(self) -> float:
        """Crystal length implied by xi = alpha l_c / (2 z_p)."""
        return 2.0 * self.rayleigh_range * self.xi / self.alpha


@dataclass(frozen=True)
class SincKernelParams:
    """Parameters of the exact (sinc phase-matching) kernel."""

    xi: float
    alpha: float
    pump_waist: float

    def __post_init__(self):
        if self.xi <= 0 or self.alpha <= 0 or self.pump_waist <= 0:
            raise ValueError("xi, alpha and pump_waist must all be positive")


@dataclass(frozen=True)
class GainMatrix:
    """Real symmetric parametric gain matrix over a mode basis.

    ``scale`` is the normalized gain target (largest gain over the basis,
    g00 in the diagonal case); entries are in the same normalized units.
    """

    entries: np.ndarray
    scale: float
    basis: ModeBasis

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        size = len(self.basis)
        if entries.shape != (size, size):
            raise ValueError(f"gain matrix shape {entries.shape} does not match basis size {size}")
        if not np.allclose(entries, entries.T, atol=1e-12):
            raise ValueError("gain matrix must be symmetric")
        object.__setattr__(self, "entries", entries)
        diagonal = np.count_nonzero(entries - np.diag(np.diag(entries))) == 0
        object.__setattr__(self, "is_diagonal", bool(diagonal))

    def spectral_norm(self) -> float:
        if self.is_diagonal:
            return float(np.max(np.abs(np.diag(self.entries)))) if len(self.basis) else 0.0
        return float(np.linalg.norm(self.entries, 2))


def gaussian_gain(g00: float, xi: float, basis: ModeBasis) -> GainMatrix:
    """Diagonal gain matrix of the Gaussian kernel: entry g00 mu^(m+n) per mode.

    Raises
    ------
    ThresholdError
        If g00 >= 1 (at or above the oscillation threshold).
    """
    if g00 < 0:
        raise ValueError(f"gain must be non-negative, got {g00}")
    if g00 >= 1:
        raise ThresholdError(f"normalized gain {g00} is at or above threshold (needs g00 < 1)")
    mu = mu_from_xi(xi)
    diag = g00 * mu ** basis.orders.astype(float)
    return GainMatrix(entries=np.diag(diag), scale=g00, basis=basis)


def _sinc(u):
    """sin(u)/u with the small-argument Taylor branch for |u| < 1e-4."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        if abs(u) < 1e-4:
            return 1.0 - float(u) ** 2 / 6.0 + float(u) ** 4 / 120.0
        return math.sin(float(u)) / float(u)
    out = np.sin(u)
    small = np.abs(u) < 1e-4
    np.divide(out, u, out=out, where=~small)
    if small.any():
        us = u[small]
        sq = us * us
        out[small] = 1.0 - sq / 6.0 + sq * sq / 120.0
    return out


def sinc_kernel(q_signal, q_idler, params: SincKernelParams):
    """Exact down-conversion kernel in transverse momentum space.

    ``q_signal`` and ``q_idler`` are 2-vectors (or arrays of shape (..., 2))
    of transverse wave-vector components.
    """
    qs = np.asarray(q_signal, dtype=float)
    qi = np.asarray(q_idler, dtype=float)
    sum_sq = np.sum((qs + qi) ** 2, axis=-1)
    diff_sq = np.sum((qs - qi) ** 2, axis=-1)
    quarter = params.pump_waist**2 / 4.0
    value = np.exp(-quarter * sum_sq) * _sinc(quarter * (params.xi / params.alpha) * diff_sq)
    return value if np.ndim(value) else float(value)


def _kernel_basis_projection(
    params: SincKernelParams,
    cavity_waist: float,
    basis: ModeBasis,
    nodes: int,
    profile: Callable = _sinc,
    chunk_bytes: int = 1 << 28,
) -> np.ndarray:
    """Project the momentum-space kernel onto pairs of cavity modes.

    Returns the raw (unnormalized) symmetric matrix of
    g-independent projections, with the Fourier phases i^(m+n) i^(m'+n')
    applied; entries with odd m+m' or odd n+n' are exactly zero by parity.
    The integral runs over both 2D momenta on a tensor-product Gauss-Hermite
    grid whose per-axis substitution absorbs each mode's own Gaussian
    (Fourier-domain HG modes have waist 2/w in q-space).
    """
    q_waist = 2.0 / cavity_waist
    x, wq = roots_hermite(nodes)
    q = q_waist * x

    poly = {m: hg_polynomial_part(m, q_waist, q) for m in range(basis.cutoff + 1)}
    weights_2d = np.outer(wq, wq).ravel()
    psi = np.stack(
        [np.outer(poly[m], poly[n]).ravel() * weights_2d for (m, n) in basis], axis=1
    )

    quarter = params.pump_waist**2 / 4.0
    ratio = params.xi / params.alpha
    # the pump Gaussian factorizes per axis; only the phase-matching profile
    # needs the full 4D evaluation
    gauss_axis = np.exp(-quarter * (q[:, None] + q[None, :]) ** 2)
    diff_axis = ratio * quarter * (q[:, None] - q[None, :]) ** 2

    n_pts = nodes * nodes
    raw = np.zeros((len(basis), len(basis)))
    rows_per_chunk = max(1, chunk_bytes // (8 * nodes**3))
    for start in range(0, nodes, rows_per_chunk):
        stop = min(start + rows_per_chunk, nodes)
        block = diff_axis[start:stop, None, :, None] + diff_axis[None, :, None, :]
        kern = profile(block)
        kern *= gauss_axis[start:stop, None, :, None]
        kern *= gauss_axis[None, :, None, :]
        rows = kern.reshape((stop - start) * nodes, n_pts)
        raw += psi[start * nodes : stop * nodes].T @ (rows @ psi)
    raw *= q_waist**4

    orders = basis.orders
    m_idx = np.array([mode.m for mode in basis])
    n_idx = np.array([mode.n for mode in basis])
    allowed = ((m_idx[:, None] + m_idx[None, :]) % 2 == 0) & (
        (n_idx[:, None] + n_idx[None, :]) % 2 == 0
    )
    phase = np.where(allowed, (-1.0) ** (((orders[:, None] + orders[None, :]) // 2) % 2), 0.0)
    raw = phase * raw
    return (raw + raw.T) / 2.0


def _normalize_gain(raw: np.ndarray, g_scale: float, normalization: str) -> np.ndarray:
    if normalization == "eigenvalue":
        top = np.max(np.abs(np.linalg.eigvalsh(raw)))
    elif normalization == "entry00":
        top = abs(raw[0, 0])
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if top == 0:
        return raw * 0.0
    return raw * (g_scale / top)


def sinc_gain(
    params: SincKernelParams,
    cavity_waist: float,
    basis: ModeBasis,
    g_scale: float,
    normalization: str = "eigenvalue",
    nodes: Optional[int] = None,
    tol: float = 1e-6,
    max_refinements: int = 3,
    profile: Callable = _sinc,
) -> GainMatrix:
    """Gain matrix of the exact kernel in the cavity mode basis.

    The kernel is projected onto mode pairs by Gauss-Hermite quadrature in
    momentum space; the node count is refined until entries (normalized to
    the dominant one) move by less than ``tol``.  The result is rescaled so
    the dominant eigenvalue magnitude equals ``g_scale`` (set
    ``normalization="entry00"`` to pin the fundamental-pair entry instead).

    Raises
    ------
    QuadratureConvergenceError
        If the refinement loop does not converge.
    ThresholdError
        If g_scale >= 1.
    """
    if g_scale < 0:
        raise ValueError(f"gain must be non-negative, got {g_scale}")
    if g_scale >= 1:
        raise ThresholdError(f"normalized gain {g_scale} is at or above threshold")
    if nodes is None:
        nodes = max(48, 2 * basis.cutoff + 16)

    raw = _kernel_basis_projection(params, cavity_waist, basis, nodes, profile)
    previous = raw / np.max(np.abs(raw))
    for _ in range(max_refinements):
        nodes = (3 * nodes) // 2
        raw = _kernel_basis_projection(params, cavity_waist, basis, nodes, profile)
        current = raw / np.max(np.abs(raw))
        if np.max(np.abs(current - previous)) < tol:
            return GainMatrix(
                entries=_normalize_gain(raw, g_scale, normalization),
                scale=g_scale,
                basis=basis,
            )
        previous = current
    raise QuadratureConvergenceError(
        f"kernel projection did not converge below {tol} after {max_refinements} refinements"
    )


def transformed_gain(
    gain: GainMatrix,
    change,
    g_scale: Optional[float] = None,
    normalization: str = "eigenvalue",
) -> GainMatrix:
    """Gain matrix congruence-transformed by a basis-change matrix U G U^T.

    The truncated transform shrinks the spectrum slightly, so the result is
    rescaled back to ``g_scale`` (default: the input's scale) with the same
    normalization convention as :func:`sinc_gain`.
    """
    if change.basis != gain.basis:
        raise ValueError("gain and basis-change matrices use different bases")
    raw = change.transform_gain(gain.entries)
    raw = (raw + raw.T) / 2.0
    target = gain.scale if g_scale is None else g_scale
    return GainMatrix(
        entries=_normalize_gain(raw, target, normalization), scale=target, basis=gain.basis
    )


def gain_schmidt_number(gain: GainMatrix) -> float:
    """Schmidt number of the gain spectrum: (sum e^2)^2 / sum e^4 over eigenvalues e."""
    if gain.is_diagonal:
        eig = np.diag(gain.entries)
    else:
        eig = np.linalg.eigvalsh(gain.entries)
    lam = eig**2
    total = lam.sum()
    if total == 0:
        raise ValueError("zero gain matrix has no Schmidt number")
    return float(total**2 / np.sum(lam**2))


def kernel_schmidt_spectrum(
    difference_scale: float,
    profile: Callable = _sinc,
    radius: float = 25.0,
    radial_nodes: int = 256,
    angular_nodes: int = 512,
    keep_leading_mode: bool = False,
):
    """Squared singular values of the kernel exp(-|a+b|^2) profile(c |a-b|^2).

    Works in the pump-scaled coordinates t = (pump_waist/2) q, in which the
    kernel depends only on ``difference_scale`` c = xi/alpha.  The kernel
    commutes with simultaneous rotations, so it block-diagonalizes into
    angular-momentum sectors: the angular Fourier coefficients (computed by
    FFT over a uniform angle grid) leave one radial eigenproblem per sector,
    each discretized on a Gauss-Legendre grid in [0, radius].

    Returns the concatenated squared eigenvalues (sectors l > 0 doubled); if
    ``keep_leading_mode`` also returns (r_nodes, r_weights, u0) with u0 the
    leading radial Schmidt mode, normalized so that int |u0|^2 r dr = 1.
    """
    legendre_x, legendre_w = np.polynomial.legendre.leggauss(radial_nodes)
    r = 0.5 * radius * (legendre_x + 1.0)
    w = 0.5 * radius * legendre_w
    theta = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    cos_t = np.cos(theta)

    n_sectors = angular_nodes // 2 + 1
    fourier = np.empty((radial_nodes, radial_nodes, n_sectors))
    chunk = max(1, (1 << 27) // (8 * radial_nodes * angular_nodes))
    for start in range(0, radial_nodes, chunk):
        stop = min(start + chunk, radial_nodes)
        rs = r[start:stop, None, None]
        ri = r[None, :, None]
        base = rs**2 + ri**2
        cross = 2.0 * rs * ri * cos_t[None, None, :]
        kern = np.exp(-(base + cross)) * profile(difference_scale * (base - cross))
        fourier[start:stop] = np.fft.rfft(kern, axis=2).real
    fourier *= 2.0 * np.pi / angular_nodes

    sqrt_measure = np.sqrt(w * r)
    lam_parts = []
    total_fro = 0.0
    best = (0.0, None)
    for sector in range(n_sectors):
        sym = sqrt_measure[:, None] * fourier[:, :, sector] * sqrt_measure[None, :]
        fro = float(np.sum(sym * sym))
        mult = 1 if sector == 0 else 2
        if sector > 2 and fro * mult < 1e-14 * max(total_fro, 1e-300):
            break
        total_fro += fro * mult
        if sector == 0 and keep_leading_mode:
            eig, vec = np.linalg.eigh(sym)
            top = int(np.argmax(eig**2))
            if abs(eig[top]) > best[0]:
                best = (abs(eig[top]), vec[:, top])
            lam_parts.append(eig**2)
        else:
            eig = np.linalg.eigvalsh(sym)
            lam_parts.append(np.repeat(eig**2, mult))
    lam = np.concatenate(lam_parts)
    if keep_leading_mode:
        u0 = best[1] / sqrt_measure
        return lam, (r, w, u0)
    return lam


def kernel_schmidt_number(
    difference_scale: float,
    profile: Callable = _sinc,
    rtol: float = 5e-3,
    radius: float = 25.0,
    radial_nodes: int = 256,
    angular_nodes: int = 512,
    max_refinements: int = 3,
) -> float:
    """Converged Schmidt number of the continuous kernel.

    Grid (radius, node counts) is enlarged until the Schmidt number moves by
    less than ``rtol`` relatively.
    """

    def value(radius_, n_r, n_t):
        lam = kernel_schmidt_spectrum(difference_scale, profile, radius_, n_r, n_t)
        return float(lam.sum() ** 2 / np.sum(lam**2))

    previous = value(radius, radial_nodes, angular_nodes)
    for _ in range(max_refinements):
        radius *= 1.4
        radial_nodes = (3 * radial_nodes) // 2
        angular_nodes = (3 * angular_nodes) // 2
        current = value(radius, radial_nodes, angular_nodes)
        if abs(current - previous) < rtol * abs(previous):
            return current
        previous = current
    raise QuadratureConvergenceError(
        f"kernel Schmidt number did not converge to {rtol} relative tolerance"
    )


def _truncated_kernel_schmidt(
    xi: float, alpha: float, cutoff: int, nodes: int, profile: Callable
) -> float:
    """Schmidt number of the kernel projected onto the truncated HG basis.

    The basis waist is the kernel's natural eigenmode waist
    sqrt(2) xi^(1/4) w_p, so the result depends only on xi/alpha and the
    cutoff.
    """
    basis = ModeBasis(cutoff)
    params = SincKernelParams(xi=xi, alpha=alpha, pump_waist=1.0)
    natural_waist = math.sqrt(2.0) * xi**0.25
    raw = _kernel_basis_projection(params, natural_waist, basis, nodes, profile)
    lam = np.linalg.eigvalsh(raw) ** 2
    return float(lam.sum() ** 2 / np.sum(lam**2))


def fit_alpha(
    xi: float,
    cutoff: int = 20,
    rtol: float = 1e-3,
    bracket: tuple[float, float] = (0.1, 1.0),
    nodes: Optional[int] = None,
    profile: Callable = _sinc,
) -> float:
    """Sinc-approximation coefficient matching the Gaussian kernel's Schmidt number.

    Finds alpha such that the numerically decomposed exact kernel has the
    same Schmidt number as the Gaussian approximation.  Both kernels are
    decomposed over the same truncated HG basis (total order <= ``cutoff``,
    the basis the OPO model actually uses), which makes the comparison
    apples-to-apples and reproduces the substitution exactly when
    ``profile`` is itself a Gaussian.

    Raises
    ------
    BracketError
        If the target Schmidt number is not bracketed on ``bracket``.
    """
    if not 0 < xi < 1:
        raise ValueError(f"focusing parameter must be in (0, 1), got {xi}")
    if nodes is None:
        nodes = max(48, 2 * cutoff + 16)
    target = gain_schmidt_number(gaussian_gain(0.5, xi, ModeBasis(cutoff)))

    def objective(alpha):
        return _truncated_kernel_schmidt(xi, alpha, cutoff, nodes, profile) - target

    lo, hi = bracket
    f_lo, f_hi = objective(lo), objective(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise BracketError(
            f"no sign change for the Schmidt-number match on [{lo}, {hi}] "
            f"(f({lo})={f_lo:.3g}, f({hi})={f_hi:.3g})"
        )
    return float(brentq(objective, lo, hi, rtol=rtol))


def _golden_max(func: Callable[[float], float], lo: float, hi: float, rtol: float) -> float:
    """Golden-section maximizer of a unimodal function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = func(c), func(d)
    while (b - a) > rtol * max(abs(a), abs(b), 1e-12):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = func(d)
    return 0.5 * (a + b)


def fit_pump_waist(
    params: SincKernelParams,
    cavity_waist: float,
    search: tuple[float, float] = (0.1, 10.0),
    rtol: float = 1e-3,
    profile: Callable = _sinc,
) -> float:
    """Pump waist maximizing the first Schmidt mode's overlap with cavity HG00.

    The leading Schmidt mode of the kernel is computed once in pump-scaled
    coordinates; scanning the pump waist only rescales the cavity HG00
    against it, so a golden-section search over pump_waist/cavity_waist on
    ``search`` finds the maximizing ratio to ``rtol``.
    """
    scale = params.xi / params.alpha
    _, (r, w, u0) = kernel_schmidt_spectrum(scale, profile, keep_leading_mode=True)
    measure = np.sqrt(2.0 * np.pi) * w * r * u0

    def overlap_sq(ratio):
        gaussian = math.sqrt(2.0 / math.pi) / ratio * np.exp(-(r**2) / ratio**2)
        return float(np.dot(measure, gaussian)) ** 2

    best = _golden_max(overlap_sq, search[0], search[1], rtol)
    return best * cavity_waist
