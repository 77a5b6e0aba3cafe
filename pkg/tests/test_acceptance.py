"""Acceptance suite: one test per exit criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The sinc-kernel pipeline
criterion performs the full fit and projection and takes a few minutes; all
other criteria finish in seconds.
"""

import functools
import math
import time

import numpy as np
import pytest

from simopo.mismatch import (
    MismatchSpec,
    coupling_vector,
    enhancement_factor,
    target_variance,
    to_decibels,
)
from simopo.modes import ModeBasis
from simopo.opo import (
    OpoConfig,
    analytic_squeezing,
    apply_loss,
    covariance,
    gouy_phase,
    mode_block,
    symplectic_eigenvalues,
)
from simopo.pdc import (
    SincKernelParams,
    fit_alpha,
    fit_pump_waist,
    gain_schmidt_number,
    gaussian_gain,
    schmidt_number,
    sinc_gain,
)
from simopo.scenarios import run as run_scenario

XI = 1 / 81
HALF_SHIFT = math.sqrt(math.log(2))
HALF_RATIO = 1 + math.sqrt(2)

ORACLE_GRID = [
    (g00, frac, omega)
    for g00 in (0.1, 0.5, 0.9)
    for frac in (0.0, 0.002, 0.006)
    for omega in (0.0, math.pi / 25, 1.0)
]


def criterion(name):
    """Print one PASS/FAIL line per acceptance criterion."""

    def decorate(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                detail = func(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE {name}: FAIL")
                raise
            print(f"\nACCEPTANCE {name}: PASS{f' ({detail})' if detail else ''}")

        return wrapper

    return decorate


def opo_config(g00=0.5, gouy_frac=0.0, t_loss=0.0, cutoff=20, xi=XI, gain=None):
    if gain is None:
        gain = gaussian_gain(g00, xi, ModeBasis(cutoff))
    return OpoConfig(t_input=0.1, t_loss=t_loss, gouy=2 * math.pi * gouy_frac, gain=gain)


def rotate(block, theta):
    r = np.array([[math.cos(theta), math.sin(theta)], [-math.sin(theta), math.cos(theta)]])
    return r @ block @ r.T


def single_mode_reference(v, coupling):
    beta00_sq = abs(coupling.coefficients[0]) ** 2
    return beta00_sq * v[0, 0] + (1.0 - beta00_sq)


@criterion("HG00 squeezing 9.54 dB")
def test_fundamental_squeezing_level():
    start = time.perf_counter()
    v = covariance(opo_config(), 0.0)
    level = to_decibels(v[0, 0])
    elapsed = time.perf_counter() - start
    assert level == pytest.approx(9.542, abs=1e-3)
    assert abs(level - 9.5) <= 0.1  # paper's quoted value
    assert elapsed < 1.0
    return f"{level:.3f} dB in {elapsed:.3f} s"


@criterion("analytic-matrix oracle to 1e-9")
def test_covariance_matches_analytic_oracle():
    start = time.perf_counter()
    worst = 0.0
    for g00, frac, omega in ORACLE_GRID:
        config = opo_config(g00=g00, gouy_frac=frac)
        v = covariance(config, omega, block_diagonal=False)
        delta = config.delta_tilde()
        for i, mode in enumerate(config.basis):
            expected = analytic_squeezing(config.gain.entries[i, i], delta[i], omega, config.eta)
            block = rotate(mode_block(v, config.basis, mode), expected.theta)
            worst = max(
                worst,
                abs(block[0, 0] - expected.sx),
                abs(block[1, 1] - expected.sp),
                abs(block[0, 1]),
            )
    elapsed = time.perf_counter() - start
    assert worst < 1e-9
    assert elapsed < 10.0
    return f"max deviation {worst:.2e} over {len(ORACLE_GRID)} configs in {elapsed:.1f} s"


@criterion("purity and physicality")
def test_purity_and_symplectic_spectrum():
    worst_purity = 0.0
    for g00, frac, omega in ORACLE_GRID:
        config = opo_config(g00=g00, gouy_frac=frac)
        delta = config.delta_tilde()
        for i in range(len(config.basis)):
            res = analytic_squeezing(config.gain.entries[i, i], delta[i], omega, 1.0)
            worst_purity = max(worst_purity, abs(res.sx * res.sp - 1.0))
    assert worst_purity < 1e-12

    worst_nu = math.inf
    for g00, frac, omega in ORACLE_GRID[:: 3]:
        for t_loss in (0.0, 0.02):
            v = covariance(opo_config(g00=g00, gouy_frac=frac, t_loss=t_loss, cutoff=10), omega)
            worst_nu = min(worst_nu, float(np.min(symplectic_eigenvalues(v))))
    assert worst_nu >= 1.0 - 1e-9
    return f"purity residue {worst_purity:.1e}, min symplectic eigenvalue {worst_nu:.12f}"


@criterion("Schmidt numbers")
def test_schmidt_numbers():
    exact = schmidt_number(XI)
    assert exact == pytest.approx(20.7531, rel=1e-4)
    assert abs(exact - 20.7) / 20.7 < 0.005  # paper's quoted 20.7

    truncated = [
        gain_schmidt_number(gaussian_gain(0.5, XI, ModeBasis(cutoff)))
        for cutoff in (5, 10, 15, 20)
    ]
    assert all(b > a for a, b in zip(truncated, truncated[1:]))
    assert truncated[-1] == pytest.approx(exact, rel=0.05)

    # the formula gives 2.78 at xi = 1/9; the paper's quoted 8.3 is not
    # reproduced by the formula and is intentionally not asserted
    value_ninth = schmidt_number(1 / 9)
    assert value_ninth == pytest.approx(25 / 9, rel=1e-12)
    assert abs(value_ninth - 8.3) > 5
    return f"M(1/81)={exact:.4f}, truncated(20)={truncated[-1]:.4f}, M(1/9)={value_ninth:.3f}"


@criterion("mismatch coefficient completeness and 50% points")
def test_mismatch_coefficients():
    basis = ModeBasis(20)
    for kind, parameters in [
        ("displacement", (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
        ("tilt", (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
        ("size", (0.5, 1.5, 2.0, HALF_RATIO, 2.5)),
    ]:
        for parameter in parameters:
            coupling = coupling_vector(MismatchSpec(kind, parameter), basis)
            assert coupling.weight >= 0.999, (kind, parameter, coupling.weight)

    disp = coupling_vector(MismatchSpec("displacement", HALF_SHIFT), basis)
    tilt = coupling_vector(MismatchSpec("tilt", HALF_SHIFT, plane="fourier"), basis)
    size = coupling_vector(MismatchSpec("size", HALF_RATIO), basis)
    for coupling in (disp, tilt, size):
        assert abs(abs(coupling.coefficients[0]) ** 2 - 0.5) < 1e-3
    return "weights >= 0.999 in figure ranges; 50% points at 0.8326 / 2.4142"


@criterion("Fig. 4 qualitative reproduction")
def test_mismatch_robustness_fig4():
    basis = ModeBasis(20)
    omega = math.pi / 25
    v0 = covariance(opo_config(), omega)

    # (i) multimode beats the equally squeezed single-mode source at any p > 0
    for parameter in np.linspace(0.05, 3.0, 30):
        coupling = coupling_vector(MismatchSpec("displacement", float(parameter)), basis)
        assert target_variance(v0, coupling) < single_mode_reference(v0, coupling)

    # (ii) and crosses the infinitely squeezed reference at finite mismatch
    combos = [
        ("displacement", "image", np.linspace(0.2, 3.0, 29)),
        ("tilt", "fourier", np.linspace(0.2, 3.0, 29)),
        ("size", "image", np.linspace(1.05, 2.5, 30)),
        ("size", "fourier", np.linspace(1.05, 2.5, 30)),
    ]
    for kind, plane, sweep in combos:
        crossed = False
        for parameter in sweep:
            coupling = coupling_vector(MismatchSpec(kind, float(parameter), plane=plane), basis)
            infinite = 1.0 - abs(coupling.coefficients[0]) ** 2
            if infinite > 0 and target_variance(v0, coupling) < infinite:
                crossed = True
                break
        assert crossed, (kind, plane)

    # (iii) at theta_G/2pi = 0.006 the advantage is lost for some displacement
    v6 = covariance(opo_config(gouy_frac=0.006), omega)
    lost = False
    for parameter in np.linspace(0.1, 3.0, 30):
        coupling = coupling_vector(MismatchSpec("displacement", float(parameter)), basis)
        if target_variance(v6, coupling) > single_mode_reference(v6, coupling):
            lost = True
            break
    assert lost
    return "dominance, infinite-squeezing crossover, and 0.006 loss of advantage"


@criterion("loss sweep ordering and monotonicity")
def test_loss_sweep_fig5():
    basis = ModeBasis(20)
    omega = math.pi / 25
    v0 = covariance(opo_config(), omega)
    etas = (1.0, 0.95, 0.9)
    for kind, plane, sweep in [
        ("displacement", "image", np.linspace(0.0, 3.0, 16)),
        ("size", "image", np.linspace(0.5, 2.5, 16)),
    ]:
        for parameter in sweep:
            coupling = coupling_vector(MismatchSpec(kind, float(parameter), plane=plane), basis)
            beta00_sq = abs(coupling.coefficients[0]) ** 2
            triples = []
            for eta in etas:
                lossy = apply_loss(v0, eta)
                multi = target_variance(lossy, coupling)
                single = beta00_sq * lossy[0, 0] + (1.0 - beta00_sq)
                infinite = 1.0 - beta00_sq * eta
                triples.append((multi, single, infinite))
            # each model degrades monotonically with loss
            for which in range(3):
                values = [t[which] for t in triples]
                assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
            # the pairwise ordering of the three models survives the loss
            reference_order = [np.sign(triples[0][a] - triples[0][b]) for a, b in
                               ((0, 1), (0, 2), (1, 2))]
            for triple in triples[1:]:
                order = [np.sign(triple[a] - triple[b]) for a, b in ((0, 1), (0, 2), (1, 2))]
                for ref, now in zip(reference_order, order):
                    if ref != 0:
                        assert now == ref
    return "three sources keep their ranking under eta in {1, 0.95, 0.9}"


@criterion("sinc-kernel pipeline (Fig. 6)")
def test_sinc_kernel_pipeline():
    start = time.perf_counter()
    basis = ModeBasis(20)

    alpha = fit_alpha(XI)
    assert abs(alpha - 0.46) <= 0.02, alpha

    # Gaussian-substituted kernel must reproduce the closed-form gain
    pump_matched = 1.0 / (math.sqrt(2.0) * XI**0.25)
    surrogate = sinc_gain(
        SincKernelParams(xi=XI, alpha=alpha, pump_waist=pump_matched),
        1.0,
        basis,
        0.5,
        profile=lambda u: np.exp(-alpha * np.asarray(u, dtype=float)),
    )
    reference = gaussian_gain(0.5, XI, basis)
    assert np.max(np.abs(surrogate.entries - reference.entries)) < 1e-6

    params = SincKernelParams(xi=XI, alpha=alpha, pump_waist=1.0)
    pump = fit_pump_waist(params, 1.0)
    params = SincKernelParams(xi=XI, alpha=alpha, pump_waist=pump)
    gain = sinc_gain(params, 1.0, basis, 0.5)
    i00, i04, i22 = basis.index((0, 0)), basis.index((0, 4)), basis.index((2, 2))
    assert gain.entries[i00, i04] < 0.0
    assert gain.entries[i00, i22] < 0.0

    omega = math.pi / 25
    for kind, parameter, fractions in [
        ("displacement", HALF_SHIFT, (0.0, 0.002)),
        ("size", HALF_RATIO, (0.0, 0.001)),
    ]:
        coupling = coupling_vector(MismatchSpec(kind, parameter), basis)
        for frac in fractions:
            v = covariance(opo_config(gouy_frac=frac, gain=gain), omega)
            multi = target_variance(v, coupling)
            single = single_mode_reference(v, coupling)
            assert multi < single, (kind, frac, multi, single)

    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    return (
        f"alpha={alpha:.3f}, pump waist={pump:.3f} w_c, "
        f"G'(00,04)={gain.entries[i00, i04]:.2e}, G'(00,22)={gain.entries[i00, i22]:.2e}, "
        f"{elapsed:.0f} s"
    )


@criterion("Gouy-phase map (Fig. 8)")
def test_gouy_map_fig8(tmp_path):
    assert gouy_phase(0.0, 0.0) == 0.0

    steps = 41
    sweep = (-0.05, 0.05, steps)
    disp = run_scenario("gouy-map", tmp_path / "disp.csv", sweep=sweep)
    size = run_scenario("gouy-map", tmp_path / "size.csv", sweep=sweep, kind="size")
    columns = disp.columns
    status_col = columns.index("status")
    factor_col = columns.index("enhancement_db")

    values = np.linspace(*sweep)

    def positive_grid(result):
        grid = np.zeros((steps, steps), dtype=bool)
        for k, row in enumerate(result.rows):
            i, j = divmod(k, steps)
            # the stability flag must match the arccos-argument sign condition
            argument = 1 + 2 * values[j] * (values[i] + values[j] - values[i] * values[j])
            assert (row[status_col] == "unstable") == (argument > 1 or argument < -1)
            if row[status_col] == "ok":
                grid[i, j] = row[factor_col] > 0.0
        return grid

    disp_positive = positive_grid(disp)
    size_positive = positive_grid(size)

    # the size-mismatch advantage region sits strictly inside the displacement one
    assert np.all(disp_positive[size_positive])
    assert np.any(disp_positive & ~size_positive)

    # contiguous advantage region around the origin
    center = steps // 2
    assert disp_positive[center, center]
    component = np.zeros_like(disp_positive)
    stack = [(center, center)]
    component[center, center] = True
    while stack:
        a, b = stack.pop()
        for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            x, y = a + da, b + db
            if 0 <= x < steps and 0 <= y < steps and disp_positive[x, y] and not component[x, y]:
                component[x, y] = True
                stack.append((x, y))
    assert component.sum() >= 0.9 * disp_positive.sum()
    assert component.sum() >= 100
    return (
        f"positive cells: displacement {int(disp_positive.sum())}, "
        f"size {int(size_positive.sum())} (strictly contained)"
    )


@criterion("non-monotonic sideband minimum")
def test_sideband_minimum():
    # order-2 mode at theta_G/2pi = 0.006: delta = 1.508, g = 0.32
    config = opo_config(gouy_frac=0.006, cutoff=4)
    index = config.basis.index((0, 2))
    delta = config.delta_tilde()[index]
    g = config.gain.entries[index, index]
    assert delta**2 > g**2 + 1.0
    expected = math.sqrt(delta**2 - g**2 - 1.0)

    omegas = np.linspace(0.0, 3.0, 601)
    analytic = [analytic_squeezing(g, delta, float(w), 1.0).sx for w in omegas]
    best_analytic = omegas[int(np.argmin(analytic))]
    step = omegas[1] - omegas[0]
    assert abs(best_analytic - expected) <= step

    # same minimum through the covariance pipeline (rotated minor variance)
    from simopo.opo import block_squeezing

    coarse = np.linspace(max(0.0, expected - 0.3), expected + 0.3, 121)
    matrix_sx = [
        block_squeezing(covariance(config, float(w)), config.basis)[index].sx for w in coarse
    ]
    best_matrix = coarse[int(np.argmin(matrix_sx))]
    assert abs(best_matrix - expected) <= coarse[1] - coarse[0]
    return f"minimum at omega={best_analytic:.4f} (formula {expected:.4f})"
