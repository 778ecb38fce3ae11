import numpy as np
import pytest

from rodd import model


def _two_node_topology(d, alpha=4.0, unit_snr=100.0, fading="none"):
    return model.Topology(
        positions=np.array([[0.0, 0.0], [d, 0.0]]),
        alpha=alpha, unit_snr=unit_snr, fading_model=fading,
        neighbor_threshold=1.0, area_side=10.0 + d,
    )


def test_poisson_count_and_determinism():
    a = model.generate_poisson_network(10.0, 2.0, seed=7)
    b = model.generate_poisson_network(10.0, 2.0, seed=7)
    assert a.num_nodes == b.num_nodes
    assert np.array_equal(a.positions, b.positions)
    assert np.all((a.positions >= 0) & (a.positions <= 10.0))


def test_different_seed_different_network():
    a = model.generate_poisson_network(10.0, 2.0, seed=1)
    b = model.generate_poisson_network(10.0, 2.0, seed=2)
    assert not np.array_equal(a.positions, b.positions)


def test_zero_density_is_an_empty_network():
    with pytest.raises(model.EmptyNetworkError):
        model.generate_poisson_network(1.0, 0.0, seed=3)


def test_bad_area_rejected():
    with pytest.raises(ValueError):
        model.generate_poisson_network(0.0, 1.0, seed=3)


def test_unit_distance_gain_is_unit_snr():
    gains = model.link_gains(_two_node_topology(1.0))
    assert gains.gamma[0, 1] == pytest.approx(100.0)
    assert gains.gamma[1, 0] == pytest.approx(100.0)


def test_power_law_gain():
    # gamma * d**-alpha = 100 / 2**4
    gains = model.link_gains(_two_node_topology(2.0, alpha=4.0, unit_snr=100.0))
    assert gains.gamma[0, 1] == pytest.approx(6.25)


def test_rayleigh_is_seeded_and_non_reciprocal():
    topo = _two_node_topology(1.0, fading="rayleigh")
    a = model.link_gains(topo, seed=11)
    b = model.link_gains(topo, seed=11)
    c = model.link_gains(topo, seed=12)
    assert np.array_equal(a.gamma, b.gamma)
    assert not np.array_equal(a.gamma, c.gamma)
    assert a.gamma[0, 1] != a.gamma[1, 0]


def test_rayleigh_mean_matches_path_loss():
    # E|h|^2 = 1, so the fading-averaged gain is unit_snr * d**-alpha
    topo = model.Topology(
        positions=np.array([[0.0, 0.0], [2.0, 0.0]]), alpha=4.0, unit_snr=100.0,
        fading_model="rayleigh", neighbor_threshold=1.0, area_side=10.0)
    draws = np.array([model.link_gains(topo, seed=s).gamma[0, 1]
                      for s in range(4000)])
    # Exponential(mean 6.25): std error = 6.25 / sqrt(4000)
    assert abs(draws.mean() - 6.25) <= 3 * 6.25 / np.sqrt(4000)


def test_coincident_nodes_rejected():
    topo = model.Topology(
        positions=np.zeros((2, 2)), alpha=4.0, unit_snr=1.0,
        fading_model="none", neighbor_threshold=1.0, area_side=1.0)
    with pytest.raises(model.CoincidentNodesError):
        model.link_gains(topo)


def test_path_loss_monotone_in_distance():
    gains = [model.link_gains(_two_node_topology(d)).gamma[0, 1]
             for d in (0.5, 1.0, 2.0, 5.0)]
    assert all(a > b for a, b in zip(gains, gains[1:]))


def test_neighbors_is_threshold_superlevel_set():
    g = model.LinkGains(gamma=np.array([
        [0.0, 5.0, 0.5, 2.0],
        [5.0, 0.0, 9.0, 0.1],
        [0.5, 9.0, 0.0, 3.0],
        [2.0, 0.1, 3.0, 0.0],
    ]))
    assert model.neighbors(g, 0, 2.0) == {1, 3}
    assert model.neighbors(g, 0, 100.0) == set()
    assert model.neighbors(g, 0, 0.0) == {1, 2, 3}


def test_neighbor_relation_may_be_non_reciprocal():
    g = model.LinkGains(gamma=np.array([[0.0, 3.0], [0.5, 0.0]]))
    assert 1 in model.neighbors(g, 0, 1.0)
    assert 0 not in model.neighbors(g, 1, 1.0)


def test_neighbors_never_contain_owner():
    g = model.LinkGains(gamma=np.ones((4, 4)))
    for k in range(4):
        assert k not in model.neighbors(g, k, 0.0)


def test_torus_wraps_distances():
    topo = model.Topology(
        positions=np.array([[0.1, 0.0], [9.9, 0.0]]), alpha=4.0, unit_snr=1.0,
        fading_model="none", neighbor_threshold=1.0, area_side=10.0, torus=True)
    assert topo.distances()[0, 1] == pytest.approx(0.2)
    topo.torus = False
    assert topo.distances()[0, 1] == pytest.approx(9.8)


def test_text_round_trip():
    topo = model.generate_poisson_network(5.0, 1.0, seed=4, alpha=3.0,
                                          unit_snr=50.0, neighbor_threshold=2.0)
    back = model.Topology.from_text(topo.to_text())
    assert back.num_nodes == topo.num_nodes
    assert np.array_equal(back.positions, topo.positions)
    assert back.alpha == topo.alpha
    assert back.neighbor_threshold == topo.neighbor_threshold
    assert back.fading_model == topo.fading_model


def test_per_node_unit_snr_override():
    topo = model.Topology(
        positions=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        alpha=4.0, unit_snr=np.array([10.0, 20.0, 40.0]),
        fading_model="none", neighbor_threshold=1.0, area_side=5.0)
    gains = model.link_gains(topo)
    # the transmitter's own power sets the gain; distance 1 everywhere here
    assert gains.gamma[0, 1] == pytest.approx(20.0)
    assert gains.gamma[0, 2] == pytest.approx(40.0)
    assert gains.gamma[1, 0] == pytest.approx(10.0)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        _two_node_topology(1.0, alpha=1.0)
    with pytest.raises(ValueError):
        _two_node_topology(1.0, unit_snr=0.0)
    with pytest.raises(ValueError):
        _two_node_topology(1.0, fading="rician")
