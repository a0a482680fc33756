"""Finite-volume scheme: fluxes, Poisson, stepping, steady-state driver."""

from dataclasses import replace

import numpy as np
import pytest

from oracles import dense_poisson, dense_step, stencil_flux
from spinet.device import DeviceProfile, Region, preset_three_layer, sample_on_grid
from spinet.fvm import (
    Grid1D,
    Scheme,
    SimState,
    StepFailure,
    discrete_flux,
    entropy_trajectory_run,
    initial_state,
    perturbed_state,
    solve_poisson,
    steady_state,
    step,
)


def uniform_profile(p=0.0, omega=(0.0, 0.0, 1.0), bias=0.0):
    mag = omega if p > 0.0 else (0.0, 0.0, 0.0)
    prof = DeviceProfile(
        "uniform", 1.2, [Region(0.0, 1.0, 1.0e23, mag, p)], bias_V=bias
    )
    prof.validate()
    return prof


def random_state(m, seed, profile, grid):
    st = perturbed_state(m, amplitude=0.2, seed=seed)
    sample = sample_on_grid(profile, m)
    V = solve_poisson(st.n0, sample.doping, grid, profile.lambda_D, (0.0, profile.bias_scaled))
    return SimState(st.n0, st.nv, st.W0, st.T, V)


# -- grid ------------------------------------------------------------------------


def test_grid_geometry():
    g = Grid1D.make(8)
    assert g.dx * g.m == 1.0
    assert g.centers[0] == pytest.approx(g.dx / 2.0)
    assert g.centers[-1] == pytest.approx(1.0 - g.dx / 2.0)


# -- Poisson ----------------------------------------------------------------------


def test_poisson_charge_neutral_is_linear():
    grid = Grid1D.make(40)
    C = np.full(40, 0.7)
    V = solve_poisson(C, C, grid, 1.2e-4, (0.0, -3.0))
    np.testing.assert_allclose(V, -3.0 * grid.centers, atol=1e-9)
    V0 = solve_poisson(C, C, grid, 1.2e-4, (0.0, 0.0))
    np.testing.assert_allclose(V0, 0.0, atol=1e-12)


def test_poisson_point_charge_matches_dense():
    grid = Grid1D.make(25)
    C = np.ones(25)
    n0 = C.copy()
    n0[10] += 5.0
    V = solve_poisson(n0, C, grid, 1.2e-4, (0.0, 2.0))
    Vd = dense_poisson(n0, C, grid.dx, 1.2e-4, (0.0, 2.0))
    np.testing.assert_allclose(V, Vd, atol=1e-9)


def test_poisson_linearity():
    grid = Grid1D.make(30)
    rng = np.random.default_rng(3)
    C = np.zeros(30)
    r1, r2 = rng.normal(size=30), rng.normal(size=30)
    a, b = 1.7, -0.4
    Vsum = solve_poisson(a * r1 + b * r2, C, grid, 2e-4, (0.0, 0.0))
    V1 = solve_poisson(r1, C, grid, 2e-4, (0.0, 0.0))
    V2 = solve_poisson(r2, C, grid, 2e-4, (0.0, 0.0))
    np.testing.assert_allclose(Vsum, a * V1 + b * V2, atol=1e-8)


def test_poisson_rejects_bad_lambda():
    grid = Grid1D.make(5)
    with pytest.raises(ValueError):
        solve_poisson(np.ones(5), np.ones(5), grid, 0.0, (0.0, 0.0))


# -- single-face flux --------------------------------------------------------------


def test_flux_constant_fields_vanish():
    u = np.full(6, 2.0)
    T = np.ones(6)
    V = np.full(6, 0.3)
    for f in range(7):
        assert discrete_flux(u, T, V, f, 1.0 / 6.0, (2.0, 2.0), (1.0, 1.0), (0.3, 0.3)) == 0.0


def test_flux_linear_profile_pure_diffusion():
    m = 10
    dx = 1.0 / m
    x = (np.arange(m) + 0.5) * dx
    u = 2.0 + 3.0 * x  # slope 3
    T = np.ones(m)
    V = np.zeros(m)
    for f in range(1, m):
        got = discrete_flux(u, T, V, f, dx, (2.0, 5.0), (1.0, 1.0))
        assert got == pytest.approx(-3.0, rel=1e-12)


def test_flux_matches_stencil_oracle():
    rng = np.random.default_rng(7)
    m = 9
    u = rng.uniform(0.5, 2.0, m)
    T = rng.uniform(0.5, 2.0, m)
    V = rng.normal(size=m)
    bcs = dict(u_bc=(1.0, 0.8), T_bc=(1.0, 1.2), V_bc=(0.0, -2.0))
    for f in range(m + 1):
        assert discrete_flux(u, T, V, f, 1.0 / m, **bcs) == pytest.approx(
            stencil_flux(u, T, V, f, 1.0 / m, **bcs), abs=1e-13
        )


# -- initial and perturbed states ---------------------------------------------------


def test_initial_state_contract():
    prof = preset_three_layer()
    grid = Grid1D.make(36)
    sample = sample_on_grid(prof, 36)
    st = initial_state(grid, sample, prof)
    np.testing.assert_allclose(st.n0, sample.doping)
    np.testing.assert_allclose(st.T, 1.0)
    np.testing.assert_allclose(st.W0, 1.5 * sample.doping)
    np.testing.assert_allclose(st.nv, 0.0)
    assert st.V[0] != 0.0 or st.V[-1] != 0.0  # Poisson solved, not zeros


def test_perturbed_state_bounds_and_determinism():
    a = perturbed_state(50, amplitude=0.3, seed=4)
    b = perturbed_state(50, amplitude=0.3, seed=4)
    np.testing.assert_array_equal(a.n0, b.n0)
    np.testing.assert_array_equal(a.nv, b.nv)
    assert np.all(a.n0 > 0.7 - 1e-12) and np.all(a.n0 < 1.3 + 1e-12)
    assert np.max(np.linalg.norm(a.nv, axis=1)) <= 0.8 * np.min(a.n0) + 1e-12
    np.testing.assert_allclose(a.W0, 1.5 * a.n0 * a.T)
    with pytest.raises(ValueError):
        perturbed_state(10, amplitude=0.6)


# -- one step against the dense assembly oracle -------------------------------------


@pytest.mark.parametrize("mode", ["energy_transport", "drift_diffusion"])
@pytest.mark.parametrize("polarized", [True, False])
@pytest.mark.parametrize("drift", [True, False])
@pytest.mark.parametrize("zero_flux", [False, True])
def test_step_matches_dense_oracle(mode, polarized, drift, zero_flux):
    m = 24
    prof = preset_three_layer()
    grid = Grid1D.make(m)
    sample = sample_on_grid(prof, m)
    sc = Scheme(
        grid, sample, prof, dt=5e-4, mode=mode,
        polarized=polarized, drift=drift, zero_flux=zero_flux,
    )
    st = random_state(m, seed=hash((mode, polarized, drift, zero_flux)) % 97, profile=prof, grid=grid)
    if mode == "drift_diffusion":
        st = SimState(st.n0, st.nv, 1.5 * st.n0, np.ones(m), st.V)
    out = step(st, sc)
    n0, nv, W0, T, V = dense_step(
        st, sample, dt=5e-4, D0=sc.D0, gamma=sc.gamma, tau_sf=sc.tau_sf,
        lambda_sq=prof.lambda_D, bias_scaled=prof.bias_scaled,
        mode=mode, polarized=polarized, drift=drift, zero_flux=zero_flux,
    )
    np.testing.assert_allclose(out.n0, n0, atol=1e-11)
    np.testing.assert_allclose(out.nv, nv, atol=1e-11)
    np.testing.assert_allclose(out.W0, W0, atol=1e-11)
    np.testing.assert_allclose(out.T, T, atol=1e-11)
    np.testing.assert_allclose(out.V, V, atol=1e-11)
    assert out.step_index == st.step_index + 1


# -- structural step properties ------------------------------------------------------


def test_uniform_equilibrium_is_fixed_point():
    # neutral device, zero bias: every solve must return the input state
    prof = uniform_profile()
    m = 20
    grid = Grid1D.make(m)
    sample = sample_on_grid(prof, m)
    sc = Scheme(grid, sample, prof, dt=1e-3, tau_sf=1e30)
    st = initial_state(grid, sample, prof)
    out = step(st, sc)
    np.testing.assert_allclose(out.n0, st.n0, atol=1e-13)
    np.testing.assert_allclose(out.W0, st.W0, atol=1e-13)
    np.testing.assert_allclose(out.T, st.T, atol=1e-13)
    np.testing.assert_allclose(out.V, st.V, atol=1e-13)
    np.testing.assert_allclose(out.nv, 0.0, atol=1e-15)


def test_p_zero_equals_unpolarized_machinery():
    # polarization identically zero: the polarized code path must reproduce
    # the plain unpolarized scheme exactly on every field
    prof = preset_three_layer().with_polarization(0.0)
    m = 30
    grid = Grid1D.make(m)
    sample = sample_on_grid(prof, m)
    sc_pol = Scheme(grid, sample, prof, dt=5e-4, polarized=True)
    sc_unp = Scheme(grid, sample, prof, dt=5e-4, polarized=False)
    a = random_state(m, seed=5, profile=prof, grid=grid)
    b = SimState(a.n0.copy(), a.nv.copy(), a.W0.copy(), a.T.copy(), a.V.copy())
    for _ in range(5):
        a = step(a, sc_pol)
        b = step(b, sc_unp)
    np.testing.assert_allclose(a.n0, b.n0, atol=1e-12)
    np.testing.assert_allclose(a.nv, b.nv, atol=1e-12)
    np.testing.assert_allclose(a.W0, b.W0, atol=1e-12)
    np.testing.assert_allclose(a.V, b.V, atol=1e-12)


def test_conservation_zero_flux():
    # no boundary fluxes, no spin relaxation: total charge and spin invariant
    prof = uniform_profile()
    m = 40
    grid = Grid1D.make(m)
    sample = sample_on_grid(prof, m)
    sc = Scheme(grid, sample, prof, dt=5e-4, drift=False, zero_flux=True, tau_sf=1e30)
    st = perturbed_state(m, amplitude=0.25, seed=9)
    mass0 = np.sum(st.n0) * grid.dx
    spin0 = np.sum(st.nv, axis=0) * grid.dx
    for _ in range(20):
        st = step(st, sc)
        assert abs(np.sum(st.n0) * grid.dx - mass0) <= 1e-12
        np.testing.assert_allclose(np.sum(st.nv, axis=0) * grid.dx, spin0, atol=1e-12)


def test_scheme_rejects_degenerate_polarization():
    prof = uniform_profile(p=1.0 - 1e-13)
    grid = Grid1D.make(10)
    sample = sample_on_grid(prof, 10)
    with pytest.raises(ValueError):
        Scheme(grid, sample, prof, dt=1e-3)


def test_scheme_validates_options():
    prof = preset_three_layer()
    grid = Grid1D.make(12)
    sample = sample_on_grid(prof, 12)
    with pytest.raises(ValueError):
        Scheme(grid, sample, prof, dt=0.0)
    with pytest.raises(ValueError):
        Scheme(grid, sample, prof, dt=1e-3, mode="hydrodynamic")


# -- steady-state driver ---------------------------------------------------------------


def test_steady_state_trivial_equilibrium():
    prof = uniform_profile()
    st, rep = steady_state(prof, m=16, dt=1e-3, threshold=1e-8)
    assert rep.converged
    assert rep.steps <= 3
    assert rep.final_residual <= 1e-8
    np.testing.assert_allclose(st.n0, 1.0, atol=1e-10)
    np.testing.assert_allclose(st.T, 1.0, atol=1e-10)
    assert rep.mode == "energy_transport"
    assert len(rep.residual_history) == rep.steps


def test_steady_state_drift_diffusion_pins_temperature():
    st, rep = steady_state(
        preset_three_layer(), m=48, dt=5e-4, threshold=1e-4, mode="drift_diffusion"
    )
    assert rep.converged
    np.testing.assert_allclose(st.T, 1.0)
    np.testing.assert_allclose(st.W0, 1.5 * st.n0)


def test_steady_state_threshold_validation():
    with pytest.raises(ValueError):
        steady_state(preset_three_layer(), m=16, threshold=1e-3)
    with pytest.raises(ValueError):
        steady_state(preset_three_layer(), m=16, threshold=1e-13)


def test_steady_state_p_zero_has_no_spin():
    prof = preset_three_layer().with_polarization(0.0)
    st, rep = steady_state(prof, m=48, dt=5e-4, threshold=1e-4)
    assert rep.converged
    np.testing.assert_allclose(st.nv, 0.0, atol=1e-15)


# -- entropy trajectory plumbing --------------------------------------------------------


def test_entropy_run_uniform_state_constant():
    prof = uniform_profile()
    st0 = SimState(np.ones(24), np.zeros((24, 3)), 1.5 * np.ones(24), np.ones(24), np.zeros(24))
    report, final, mass = entropy_trajectory_run(prof, st0, steps=10, m=24, tau_sf=1.0, D0=1.0)
    assert report.monotone_nonincreasing
    np.testing.assert_allclose(report.H, report.H[0], atol=1e-12)
    np.testing.assert_allclose(mass, mass[0], atol=1e-13)
    np.testing.assert_allclose(final.n0, 1.0, atol=1e-12)


def test_grid_refinement_errors_decrease():
    # consecutive dyadic refinements must disagree less and less; the
    # drift-diffusion steady state converges fast enough to afford three runs
    res = {}
    for m in (111, 222, 444):
        st, rep = steady_state(
            preset_three_layer(), m=m, dt=5e-4, threshold=1e-8, mode="drift_diffusion"
        )
        assert rep.converged
        res[m] = st

    def coarsen(f):
        return 0.5 * (f[0::2] + f[1::2])

    for extract in (lambda s: s.n0, lambda s: s.V, lambda s: s.nv[:, 2]):
        e_coarse = np.max(np.abs(extract(res[111]) - coarsen(extract(res[222]))))
        e_fine = np.max(np.abs(extract(res[222]) - coarsen(extract(res[444]))))
        assert e_fine < e_coarse


def test_entropy_run_perturbed_state_decays():
    prof = uniform_profile()
    st0 = perturbed_state(32, amplitude=0.2, seed=12)
    report, final, mass = entropy_trajectory_run(prof, st0, steps=60, m=32, tau_sf=1.0, D0=1.0)
    assert report.monotone_nonincreasing
    assert report.max_violation == 0.0
    assert report.H[-1] < report.H[0]
    assert np.all(report.production >= 0.0)
    assert np.max(np.abs(mass - mass[0])) <= 1e-12
