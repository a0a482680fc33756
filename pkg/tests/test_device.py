"""Device profiles, presets, config round trips, and grid sampling."""

import numpy as np
import pytest

from oracles import lookup_sample
from spinet.device import (
    DeviceProfile,
    PRESETS,
    Region,
    preset_five_layer,
    preset_three_layer,
    sample_on_grid,
    scaled_spin_flip_time,
)


def mixed_face_count(sample):
    """Interior faces whose two adjacent cells carry different magnetization."""
    diff = np.linalg.norm(sample.omega_cell[1:] - sample.omega_cell[:-1], axis=1)
    return int(np.count_nonzero(diff > 1e-12))


# -- presets -------------------------------------------------------------------


def test_three_layer_geometry():
    prof = preset_three_layer()
    assert prof.length_um == 1.2
    assert [r.x_from for r in prof.regions] == [0.0, 1.0 / 6.0, 5.0 / 6.0]
    assert [r.x_to for r in prof.regions] == [1.0 / 6.0, 5.0 / 6.0, 1.0]
    assert prof.regions[1].polarization == 0.0
    assert prof.regions[1].magnetization == (0.0, 0.0, 0.0)
    for r in (prof.regions[0], prof.regions[2]):
        assert r.magnetization == (0.0, 0.0, 1.0)
        assert r.polarization == 0.66
        assert r.doping_m3 == 1.0e23
    assert prof.regions[1].doping_m3 == 4.0e20
    assert prof.lambda_D == 1.2e-4
    assert prof.D0 == 6.9e-4
    assert prof.gamma == 4.0
    assert prof.bias_V == -1.0


def test_five_layer_geometry():
    prof = preset_five_layer()
    assert len(prof.regions) == 5
    spacer = prof.regions[2]
    assert spacer.x_from == pytest.approx(10.0 / 21.0)
    assert spacer.x_to == pytest.approx(11.0 / 21.0)
    assert spacer.magnetization == (0.0, 0.0, 0.0)
    m1 = np.array(prof.regions[1].magnetization)
    m2 = np.array(prof.regions[3].magnetization)
    assert float(m1 @ m2) == 0.0  # orthogonal magnetic layers
    assert prof.regions[0].doping_m3 == 1.0e23
    assert prof.regions[0].polarization == 0.0  # contacts nonmagnetic


def test_presets_registry():
    assert set(PRESETS) == {"three-layer", "five-layer"}
    assert PRESETS["three-layer"]().name == "three-layer"


def test_five_layer_doping_matches_three_layer():
    # same diode geometry: at p = 0 both presets describe the same device
    a = sample_on_grid(preset_three_layer(), 126)
    b = sample_on_grid(preset_five_layer(), 126)
    np.testing.assert_allclose(a.doping, b.doping, atol=1e-15)


# -- profile mechanics -----------------------------------------------------------


def test_bias_scaling():
    prof = preset_three_layer()
    assert prof.bias_scaled == pytest.approx(-1.0 / 0.026)
    assert prof.doping_max == 1.0e23


def test_scaled_spin_flip_time_default():
    tau = scaled_spin_flip_time()
    assert tau == pytest.approx(1e-12 / (6.9e-4 * (1.2e-6) ** 2 / 1e-3), rel=1e-12)
    assert 0.9 < tau < 1.1
    assert preset_three_layer().tau_sf_scaled == tau


def test_with_polarization_touches_only_magnetic_layers():
    prof = preset_three_layer().with_polarization(0.33)
    assert prof.regions[0].polarization == 0.33
    assert prof.regions[2].polarization == 0.33
    assert prof.regions[1].polarization == 0.0
    # original untouched
    assert preset_three_layer().regions[0].polarization == 0.66


def test_validate_rejects_bad_profiles():
    good = preset_three_layer()
    bad_tiling = DeviceProfile(
        "x", 1.0, [Region(0.0, 0.5, 1e23, (0, 0, 0), 0.0), Region(0.6, 1.0, 1e23, (0, 0, 0), 0.0)]
    )
    with pytest.raises(ValueError):
        bad_tiling.validate()
    bad_mag = DeviceProfile("x", 1.0, [Region(0.0, 1.0, 1e23, (0, 0, 2.0), 0.5)])
    with pytest.raises(ValueError):
        bad_mag.validate()
    bad_p = DeviceProfile("x", 1.0, [Region(0.0, 1.0, 1e23, (0, 0, 1.0), 1.0)])
    with pytest.raises(ValueError):
        bad_p.validate()
    bad_lambda = DeviceProfile("x", 1.0, good.regions, lambda_D=0.0)
    with pytest.raises(ValueError):
        bad_lambda.validate()


def test_config_round_trip():
    for make in (preset_three_layer, preset_five_layer):
        prof = make()
        back = DeviceProfile.from_config(prof.to_config())
        assert back.name == prof.name
        assert back.lambda_D == prof.lambda_D
        assert back.tau_sf_scaled == prof.tau_sf_scaled
        assert back.bias_V == prof.bias_V
        assert len(back.regions) == len(prof.regions)
        for ra, rb in zip(prof.regions, back.regions):
            assert ra == rb


# -- grid sampling ---------------------------------------------------------------


def test_sampling_matches_lookup_oracle():
    for make in (preset_three_layer, preset_five_layer):
        prof = make()
        for m in (24, 100, 334):
            s = sample_on_grid(prof, m)
            doping, omega, p = lookup_sample(prof, m)
            np.testing.assert_allclose(s.doping, doping, atol=1e-13)
            np.testing.assert_allclose(s.omega_cell, omega, atol=1e-13)
            np.testing.assert_allclose(s.p_cell, p, atol=1e-13)


def test_uniform_profile_faces_equal_cells():
    prof = DeviceProfile("u", 1.0, [Region(0.0, 1.0, 1e23, (0.0, 0.0, 1.0), 0.4)])
    s = sample_on_grid(prof, 10)
    np.testing.assert_allclose(s.p_face, 0.4)
    np.testing.assert_allclose(s.omega_face, np.tile([0.0, 0.0, 1.0], (11, 1)))
    np.testing.assert_allclose(s.doping, 1.0)


def test_junction_face_average():
    # m divisible by 6: the p = 0.66 / p = 0 junction sits exactly on a face
    s = sample_on_grid(preset_three_layer(), 24)
    face = 4  # x = 1/6
    assert s.p_face[face] == pytest.approx(0.33)
    assert s.eta_face[face] == pytest.approx(np.sqrt(1.0 - 0.33**2))
    np.testing.assert_allclose(s.omega_face[face], [0.0, 0.0, 0.5])


def test_mixed_faces_aligned_vs_unaligned():
    # junctions on faces (m = 336): one mixed face per junction.  On the
    # reference grid m = 334 each junction falls inside a cell, giving a
    # length-weighted junction cell flanked by two mixed faces.
    aligned = sample_on_grid(preset_three_layer(), 336)
    assert mixed_face_count(aligned) == 2
    unaligned = sample_on_grid(preset_three_layer(), 334)
    assert mixed_face_count(unaligned) == 4
    # oracle agrees on the unaligned geometry
    _, omega, _ = lookup_sample(preset_three_layer(), 334)
    diff = np.linalg.norm(omega[1:] - omega[:-1], axis=1)
    assert int(np.count_nonzero(diff > 1e-12)) == 4


def test_junction_cell_weights():
    # m = 334: the left junction 1/6 = 55.67/334 splits cell 55 at 2/3
    s = sample_on_grid(preset_three_layer(), 334)
    assert s.p_cell[55] == pytest.approx(0.66 * 2.0 / 3.0)
    np.testing.assert_allclose(s.omega_cell[55], [0.0, 0.0, 2.0 / 3.0])
    assert s.doping[55] == pytest.approx((2.0 / 3.0) + (1.0 / 3.0) * 4.0e20 / 1.0e23)


def test_eta_bounds_and_neutral_faces():
    for m in (24, 334):
        s = sample_on_grid(preset_three_layer(), m)
        assert np.all(s.eta_face > 0.0) and np.all(s.eta_face <= 1.0)
        mid = m // 2  # deep in the nonmagnetic channel
        assert s.eta_face[mid] == 1.0


def test_sample_rejects_tiny_grids():
    with pytest.raises(ValueError):
        sample_on_grid(preset_three_layer(), 2)
