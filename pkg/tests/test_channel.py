import math

import numpy as np
import pytest

from emfbeam.channel import (PowerSample, near_field_channel, received_power,
                             ris_channel, ris_phases, ris_self_configure,
                             scatter_channel, total_channel)
from emfbeam.scenario import ScenarioConfig, build_scenario

from conftest import small_config
from oracles import (nearfield_loop, received_power_loop, ris_channel_loop,
                     scatter_channel_loop)


def scenario_with(scatter_dirs=None, **overrides):
    sc = build_scenario(small_config(**overrides))
    if scatter_dirs is not None:
        object.__setattr__(sc, "scatter_dirs", np.asarray(scatter_dirs, float))
    return sc


def test_scatter_single_element_sums_gains():
    sc = build_scenario(small_config(M=1, N=5, K=0))
    s = scatter_channel(sc)
    assert s[0] == pytest.approx(sc.scatter_gains.sum(), abs=1e-14)


def test_scatter_broadside_is_constant():
    # scatterer straight up the y axis: zero phase at every element
    sc = scenario_with(scatter_dirs=[[0.0, 1.0]], N=1, K=0, M=6)
    s = scatter_channel(sc)
    assert np.allclose(s, sc.scatter_gains[0], atol=1e-14)


def test_scatter_matches_loop_oracle():
    sc = scenario_with(scatter_dirs=[[np.sin(np.pi / 6), np.cos(np.pi / 6)],
                                     [-np.sin(np.pi / 6), np.cos(np.pi / 6)]],
                       M=2, N=2, K=0)
    assert np.allclose(scatter_channel(sc), scatter_channel_loop(sc), atol=1e-12)


def test_ris_phases_first_element_and_origin():
    sc = build_scenario(small_config(K=2, P=4, seed=8))
    ph = ris_phases(sc)
    assert ph.psi.shape == (2, 4)
    assert ph.phi.shape == (2, sc.config.M, 4)
    # first RIS element sits at the RIS origin: psi vanishes, phi reduces to
    # the BS-side term
    assert np.allclose(ph.psi[:, 0], 0.0, atol=1e-15)
    for k, ris in enumerate(sc.ris_list):
        expect = 2 * np.pi * (sc.bs_elements @ ris.bs_dir)
        assert np.allclose(ph.phi[k, :, 0], expect, atol=1e-12)


def test_ris_phases_orthogonal_ue_direction():
    sc = build_scenario(small_config(K=1, P=5, seed=2))
    ris = sc.ris_list[0]
    # UE direction perpendicular to the RIS axis kills every psi
    perp = np.array([-ris.orientation[1], ris.orientation[0]])
    object.__setattr__(ris, "ue_dir", perp)
    ph = ris_phases(sc)
    assert np.allclose(ph.psi, 0.0, atol=1e-12)


def test_ris_phase_at_45_degrees():
    sc = build_scenario(small_config(K=1, P=2, seed=2))
    ris = sc.ris_list[0]
    diag = (ris.orientation + np.array([-ris.orientation[1], ris.orientation[0]]))
    object.__setattr__(ris, "ue_dir", diag / np.linalg.norm(diag))
    ph = ris_phases(sc)
    assert ph.psi[0, 1] == pytest.approx(2 * np.pi * 0.5 * math.cos(math.pi / 4),
                                         abs=1e-12)
    assert ph.psi[0, 1] == pytest.approx(2.2214414690791831, abs=1e-12)


def test_ris_phases_empty_when_no_ris():
    ph = ris_phases(build_scenario(small_config(K=0)))
    assert ph.phi.shape[0] == 0 and ph.psi.shape[0] == 0


def test_self_configure_compensates_exactly():
    rng = np.random.default_rng(5)
    psi = rng.uniform(-20, 20, size=(3, 7))
    w = np.exp(-1j * psi)
    assert np.abs(w * np.exp(1j * psi) - 1).max() < 1e-12

    sc = build_scenario(small_config(K=3, P=7))
    ph = ris_phases(sc)
    w = ris_self_configure(ph)
    assert np.abs(np.abs(w) - 1).max() < 1e-12
    assert np.abs(w * np.exp(1j * ph.psi) - 1).max() < 1e-12
    assert np.allclose(ris_self_configure(RisLike(psi=np.zeros((1, 2)))), 1.0)
    assert np.allclose(ris_self_configure(RisLike(psi=np.full((1, 2), np.pi))),
                       -1.0)


class RisLike:
    def __init__(self, psi):
        self.psi = psi


def test_ris_channel_no_ris_is_null():
    sc = build_scenario(small_config(K=0))
    h = ris_channel(sc, np.zeros((0, sc.config.P)))
    assert np.array_equal(h, np.zeros(sc.config.M, dtype=complex))


def test_ris_channel_selfconfigured_broadside_modulus():
    sc = build_scenario(small_config(K=1, P=8, seed=6))
    h = ris_channel(sc, ris_self_configure(ris_phases(sc)))
    # compensation + broadside orientation: each element carries |gain|
    assert np.allclose(np.abs(h), abs(sc.ris_list[0].gain), atol=1e-12)


def test_ris_channel_matches_loop_oracle_for_arbitrary_weights():
    sc = build_scenario(small_config(M=3, K=2, P=4, seed=13))
    rng = np.random.default_rng(0)
    w = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(2, 4)))
    assert np.allclose(ris_channel(sc, w), ris_channel_loop(sc, w), atol=1e-12)


def test_ris_channel_rejects_wrong_shape():
    sc = build_scenario(small_config(K=2, P=4))
    with pytest.raises(ValueError):
        ris_channel(sc, np.ones((2, 3)))


def test_total_channel():
    s = np.array([1 + 1j, 2.0])
    h = np.array([0.5, -1j])
    assert np.array_equal(total_channel(s, h), s + h)
    assert np.array_equal(total_channel(s, np.zeros(2)), s)
    assert np.array_equal(total_channel(np.zeros(2), h), h)
    with pytest.raises(ValueError):
        total_channel(s, np.ones(3))


def test_compensation_identity_property():
    # with self-configured weights every triple-sum term reduces to the
    # BS-side phase alone
    sc = build_scenario(small_config(K=3, P=5, seed=21))
    ph = ris_phases(sc)
    w = ris_self_configure(ph)
    h = ris_channel(sc, w)
    direct = np.zeros(sc.config.M, dtype=complex)
    for k, ris in enumerate(sc.ris_list):
        direct += ris.gain / sc.config.P * np.exp(1j * ph.phi[k]).sum(axis=1)
    assert np.abs(h - direct).max() < 1e-12


def test_near_field_single_element_distance_10():
    sc = build_scenario(small_config(M=1, K=0))
    q = near_field_channel(sc, (0.0, 10.0))
    assert abs(q[0]) == pytest.approx(1 / (40 * np.pi), rel=1e-12)
    assert math.remainder(np.angle(q[0]), 2 * np.pi) == pytest.approx(0.0, abs=1e-9)


def test_near_field_amplitude_at_circle_radius():
    sc = build_scenario(small_config(M=1, K=0))
    q = near_field_channel(sc, (0.0, 650.0))
    assert abs(q[0]) == pytest.approx(1 / (4 * np.pi * 650), rel=1e-12)
    assert abs(q[0]) == pytest.approx(1.2243e-4, rel=1e-4)


def test_near_field_matches_distance_oracle():
    sc = build_scenario(small_config(M=6, K=0))
    point = (3.0, 40.0)
    assert np.allclose(near_field_channel(sc, point),
                       nearfield_loop(sc.bs_elements, point), atol=1e-12)


def test_near_field_rejects_element_position():
    sc = build_scenario(small_config(M=4, K=0))
    with pytest.raises(ValueError):
        near_field_channel(sc, (0.5, 0.0))


def test_received_power_basis_vector():
    row = np.array([2.0 + 1j, 3.0, 0.5j])
    e1 = np.array([1.0, 0.0, 0.0])
    ps = received_power(row, e1, 1.0)
    assert isinstance(ps, PowerSample)
    assert ps.value == pytest.approx(abs(row[0]) ** 2, rel=1e-12)


def test_received_power_zero_chi():
    row = np.array([1.0, 2.0])
    assert received_power(row, np.array([0.6, 0.8]), 0.0).value == 0.0


def test_received_power_matched_filter_equals_norm():
    rng = np.random.default_rng(7)
    g = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    b = g.conj() / np.linalg.norm(g)
    assert received_power(g, b, 1.0).value == pytest.approx(
        np.linalg.norm(g) ** 2, rel=1e-12)


def test_received_power_linearity_in_chi():
    rng = np.random.default_rng(3)
    row = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    b /= np.linalg.norm(b)
    for c in (0.25, 0.5, 3.0):
        assert received_power(row, b, c).value == pytest.approx(
            c * received_power(row, b, 1.0).value, rel=1e-12)


def test_received_power_errors():
    with pytest.raises(ValueError):
        received_power(np.ones(3), np.ones(4), 1.0)
    with pytest.raises(ValueError):
        received_power(np.ones(3), np.ones(3), -0.5)


def test_scatter_scale_covariance():
    sc = build_scenario(small_config(N=4, K=0, seed=17))
    s1 = scatter_channel(sc)
    object.__setattr__(sc, "scatter_gains", 2.0 * sc.scatter_gains)
    assert np.allclose(scatter_channel(sc), 2.0 * s1, atol=1e-12)


def test_brute_force_equivalence_small_dims():
    for seed in range(10):
        cfg = ScenarioConfig(M=3, N=2, K=2, P=3, R=100.0, circle_samples=64,
                             square_half_width=120.0, grid_step=30.0, seed=seed)
        sc = build_scenario(cfg)
        w = ris_self_configure(ris_phases(sc))
        s = scatter_channel(sc)
        h = ris_channel(sc, w)
        assert np.abs(s - np.array(scatter_channel_loop(sc))).max() < 1e-12
        assert np.abs(h - np.array(ris_channel_loop(sc, w))).max() < 1e-12
        q = near_field_channel(sc, (7.0, 33.0))
        assert np.abs(q - np.array(nearfield_loop(sc.bs_elements, (7.0, 33.0)))).max() < 1e-12
        b = (s + h).conj() / np.linalg.norm(s + h)
        assert received_power(s + h, b, 0.7).value == pytest.approx(
            received_power_loop(s + h, b, 0.7), rel=1e-12)
