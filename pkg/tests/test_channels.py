import numpy as np
import pytest

from rodd import channels, model, signatures


def _mask(bits, owner=0, q=0.5):
    return signatures.DuplexMask(bits=np.array(bits, dtype=np.uint8),
                                 owner=owner, q=q)


def test_or_channel_worked_example():
    receiver = _mask([1, 0, 1, 0], owner=1)
    peer = _mask([0, 1, 1, 0], owner=2)
    obs = channels.or_channel(receiver, [(peer, [0, 1, 1, 0])])
    assert list(obs.erased) == [True, False, True, False]
    assert obs.values[1] == 1 and obs.values[3] == 0


def test_or_channel_no_peers_reads_silence():
    obs = channels.or_channel(_mask([0, 1, 0]), [])
    assert list(obs.values) == [0, 0, 0]
    assert list(obs.erased) == [False, True, False]


def test_or_channel_four_node_snapshot():
    # 4 nodes over 50 slots: node 1's view is the element-wise OR of the
    # other three masked streams, blanked at its own on-slots.
    m = 50
    masks = [signatures.derive_mask(nia, 0.4, m) for nia in range(1, 5)]
    rng = np.random.default_rng(0)
    bits = [rng.integers(0, 2, m).astype(np.uint8) for _ in range(4)]
    obs = channels.or_channel(masks[0], list(zip(masks[1:], bits[1:])))
    for slot in range(m):
        if masks[0].bits[slot]:
            assert obs.erased[slot]
        else:
            expect = 0
            for j in (1, 2, 3):
                expect |= masks[j].bits[slot] & bits[j][slot]
            assert obs.values[slot] == expect


def test_or_channel_length_mismatch():
    with pytest.raises(ValueError):
        channels.or_channel(_mask([1, 0]), [(_mask([1, 0, 1]), [1, 1, 1])])


def test_or_output_monotone_in_peers():
    receiver = signatures.derive_mask(0, 0.3, 200)
    peers = [(signatures.derive_mask(j, 0.3, 200), np.ones(200, dtype=np.uint8))
             for j in range(1, 5)]
    prev = channels.or_channel(receiver, peers[:1])
    for count in (2, 3, 4):
        cur = channels.or_channel(receiver, peers[:count])
        keep = ~cur.erased
        assert np.all(cur.values[keep] >= prev.values[keep])
        prev = cur


def _unit_gains(k):
    g = np.ones((k, k))
    np.fill_diagonal(g, 0.0)
    return model.LinkGains(gamma=g)


def test_gaussian_single_peer_no_noise():
    m = 8
    rmask = _mask([1, 0, 0, 1, 0, 0, 0, 0], owner=0)
    pmask = _mask([0, 1, 1, 0, 1, 0, 1, 0], owner=1)
    sym = np.array([0.0, 1.0, -1.5, 0.0, 0.5, 0.0, 2.0, 0.0])
    frames = [channels.TransmitFrame(symbols=np.zeros(m), mask=rmask),
              channels.TransmitFrame(symbols=sym, mask=pmask)]
    obs = channels.gaussian_mac(0, _unit_gains(2), frames, noise_var=0.0)
    off = ~obs.erased
    assert np.allclose(obs.values[off], (pmask.bits * sym)[off])
    assert np.array_equal(obs.erased, rmask.bits.astype(bool))


def test_gaussian_superposition_is_linear():
    m = 6
    rmask = _mask([0] * m, owner=0)
    f0 = channels.TransmitFrame(symbols=np.zeros(m), mask=rmask)
    p1 = channels.TransmitFrame(symbols=np.full(m, 1.0), mask=_mask([1] * m, owner=1))
    p2 = channels.TransmitFrame(symbols=np.full(m, -0.5), mask=_mask([1] * m, owner=2))
    gains = model.LinkGains(gamma=np.array([[0.0, 4.0, 9.0],
                                            [4.0, 0.0, 1.0],
                                            [9.0, 1.0, 0.0]]))
    both = channels.gaussian_mac(0, gains, [f0, p1, p2], noise_var=0.0)
    # sqrt(4)*1 + sqrt(9)*(-0.5) = 0.5 in every slot
    assert np.allclose(both.values, 0.5)


def test_gaussian_noise_variance():
    m = 100_000
    rmask = signatures.DuplexMask(bits=np.zeros(m, dtype=np.uint8), owner=0, q=0.5)
    f0 = channels.TransmitFrame(symbols=np.zeros(m), mask=rmask)
    obs = channels.gaussian_mac(0, _unit_gains(2), [f0, None], noise_var=2.0, seed=5)
    # sample variance of N(0, 2): std error ~ var * sqrt(2/m)
    assert abs(obs.values.var() - 2.0) <= 3 * 2.0 * np.sqrt(2.0 / m)


def test_gaussian_deterministic_given_seed():
    m = 64
    rmask = signatures.derive_mask(0, 0.5, m)
    f0 = channels.TransmitFrame(symbols=np.zeros(m), mask=rmask)
    a = channels.gaussian_mac(0, _unit_gains(2), [f0, None], noise_var=1.0, seed=3)
    b = channels.gaussian_mac(0, _unit_gains(2), [f0, None], noise_var=1.0, seed=3)
    assert np.array_equal(a.values, b.values)


def test_gaussian_neighbor_filter():
    m = 4
    rmask = _mask([0] * m, owner=0)
    f0 = channels.TransmitFrame(symbols=np.zeros(m), mask=rmask)
    peer = channels.TransmitFrame(symbols=np.ones(m), mask=_mask([1] * m, owner=1))
    gains = model.LinkGains(gamma=np.array([[0.0, 0.25], [0.25, 0.0]]))
    heard = channels.gaussian_mac(0, gains, [f0, peer], noise_var=0.0)
    filtered = channels.gaussian_mac(0, gains, [f0, peer], noise_var=0.0,
                                     neighbor_threshold=1.0)
    assert np.allclose(heard.values, 0.5)
    assert np.allclose(filtered.values, 0.0)


def test_erased_slots_are_exactly_the_on_slots():
    m = 500
    rmask = signatures.derive_mask(9, 0.35, m)
    obs = channels.or_channel(rmask, [])
    assert np.array_equal(np.flatnonzero(obs.erased), rmask.on_slots())


def test_power_constraint_enforced():
    mask = _mask([1, 1, 1, 1])
    channels.TransmitFrame(symbols=np.ones(4), mask=mask)  # power = M, allowed
    with pytest.raises(ValueError):
        channels.TransmitFrame(symbols=np.full(4, 1.1), mask=mask)


def test_masked_slots_do_not_count_against_power():
    # only on-slots spend power
    frame = channels.TransmitFrame(symbols=np.array([100.0, 1.0]),
                                   mask=_mask([0, 1]))
    assert frame.length == 2


def test_dump_format():
    obs = channels.or_channel(_mask([1, 0]), [(_mask([0, 1], owner=1), [0, 1])])
    assert channels.dump_observation(obs) == "0 E\n1 1\n"
