import numpy as np
import pytest

from wwbkit.geometry import ArrayGeometry, steering_matrix, steering_vector, uca, ula, v_shaped


class TestConstructors:
    def test_ula_positions(self):
        g = ula(5, 0.5)
        np.testing.assert_allclose(g.dx, [0.0, 0.5, 1.0, 1.5, 2.0])
        np.testing.assert_array_equal(g.dy, 0.0)
        assert g.is_linear and g.n_params == 1

    def test_uca_chord_spacing(self):
        g = uca(16, 0.5)
        pos = g.sensors
        chords = np.linalg.norm(pos - np.roll(pos, 1, axis=0), axis=1)
        np.testing.assert_allclose(chords, 0.5, rtol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(pos, axis=1), 0.5 / (2 * np.sin(np.pi / 16)))

    def test_uca_coordinate_multisets_identical(self):
        g = uca(16)
        np.testing.assert_array_equal(np.sort(g.dx), np.sort(g.dy))

    def test_v_shaped_layout(self):
        g = v_shaped(6, 60.0)
        assert g.n_sensors == 13
        np.testing.assert_array_equal(g.sensors[0], [0.0, 0.0])
        np.testing.assert_allclose(g.sensors[1:7, 1], 0.0)
        ang = np.arctan2(g.sensors[7:, 1], g.sensors[7:, 0])
        np.testing.assert_allclose(np.rad2deg(ang), 60.0)

    @pytest.mark.parametrize("bad", [0.0, 180.0, -5.0])
    def test_v_shaped_rejects_angle(self, bad):
        with pytest.raises(ValueError):
            v_shaped(3, bad)

    def test_geometry_is_read_only(self):
        g = ula(3)
        with pytest.raises(ValueError):
            g.sensors[0, 0] = 1.0

    def test_equality_and_hash(self):
        assert ula(4) == ula(4)
        assert hash(ula(4)) == hash(ula(4))
        assert ula(4) != ula(5)

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            ArrayGeometry(np.zeros((3, 3)))


class TestSteering:
    def test_unit_modulus_and_norm(self, rng):
        g = ArrayGeometry(rng.uniform(-2, 2, (7, 2)))
        a = steering_vector(g, rng.uniform(-1, 1, 2))
        np.testing.assert_allclose(np.abs(a), 1.0)
        np.testing.assert_allclose(np.vdot(a, a).real, 7.0)

    def test_phase_convention(self):
        g = ula(3, 0.5)
        a = steering_vector(g, [0.5])
        np.testing.assert_allclose(a, np.exp(1j * np.pi * 0.5 * np.arange(3)))

    def test_half_wavelength_grating_ambiguity(self):
        g = ula(6, 0.5)
        np.testing.assert_allclose(steering_vector(g, [0.9]), steering_vector(g, [-1.1]), atol=1e-12)

    def test_planar_needs_two_parameters(self):
        with pytest.raises(ValueError):
            steering_vector(uca(4), [0.1])

    def test_matrix_stacks_sources(self, rng):
        g = uca(5)
        th = rng.uniform(-1, 1, 4)
        a = steering_matrix(g, th, 2)
        assert a.shape == (5, 2)
        np.testing.assert_allclose(a[:, 1], steering_vector(g, th[2:]))
