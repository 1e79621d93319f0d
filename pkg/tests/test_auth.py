import pytest
from hypothesis import given, strategies as st

from mpcforge.algebra import PRG, DomainParams
from mpcforge.auth import (authenticate, deal_mac_key, mac_check_batch, mac_check_field, mac_check_ring,
                           mac_domain)
from mpcforge.errors import Abort, DomainMismatch
from mpcforge.sharing import Scheme, Share, reconstruct, share_additive, share_rep3

from conftest import within_3sigma


def _auth(x, params, n, prg, alpha=None):
    keys = deal_mac_key(params, n, prg, alpha)
    dom = mac_domain(params)
    xs = share_additive(dom(x), n, prg)
    return keys, authenticate(xs, keys, prg)


def _shift(shares, delta):
    """Add delta to party 0's share (an adversarial additive error)."""
    first = shares[0]
    moved = Share(first.scheme, 0, ((first.payload[0] + delta) % first.params.modulus,), first.params)
    return [moved] + list(shares[1:])


def test_authenticate_examples():
    F13 = DomainParams.field(13)
    keys, auth = _auth(4, F13, 3, PRG(0), alpha=3)
    assert reconstruct([a.mac_share for a in auth]).value == 12
    keys, auth = _auth(0, F13, 3, PRG(1))
    assert reconstruct([a.mac_share for a in auth]).value == 0
    R = DomainParams.ring(4, s=4)
    keys, auth = _auth(9, R, 2, PRG(2), alpha=5)
    assert reconstruct([a.mac_share for a in auth]).value == 45 % 256
    assert keys[0].domain.modulus == 256


def test_authenticate_rejects_wrong_inputs():
    F13 = DomainParams.field(13)
    keys = deal_mac_key(F13, 3, PRG(0))
    with pytest.raises(DomainMismatch):
        authenticate(share_rep3(F13(1), PRG(0)), keys, PRG(0))
    with pytest.raises(DomainMismatch):
        authenticate(share_additive(DomainParams.field(11)(1), 3, PRG(0)), keys, PRG(0))
    with pytest.raises(DomainMismatch):
        mac_domain(DomainParams.binary())


def test_ring_alpha_range():
    R = DomainParams.ring(8, s=4)
    for seed in range(200):
        alpha = reconstruct([k.alpha_share for k in deal_mac_key(R, 3, PRG(seed))]).value
        assert alpha < 16


def test_field_honest_and_single_forgery():
    F5 = DomainParams.field(5)
    accepted = 0
    for alpha in range(5):
        keys, auth = _auth(2, F5, 3, PRG(alpha), alpha=alpha)
        macs = [a.mac_share for a in auth]
        assert mac_check_field([(2, macs, keys)])
        try:
            mac_check_field([(3, macs, keys)])  # delta=1, epsilon=0
            accepted += 1
        except Abort:
            pass
    assert accepted == 1


def test_field_random_forgery_rate_z11():
    F11 = DomainParams.field(11)
    prg = PRG("mc11")
    trials, hits = 10_000, 0
    for _ in range(trials):
        keys, auth = _auth(prg.randbelow(11), F11, 2, prg)
        x = reconstruct([a.value_share for a in auth]).value
        delta, eps = prg.nonzero_below(11), prg.randbelow(11)
        try:
            mac_check_field([((x + delta) % 11, _shift([a.mac_share for a in auth], eps), keys)])
            hits += 1
        except Abort:
            pass
    assert within_3sigma(hits, trials, 1 / 11)


@pytest.mark.parametrize("delta,v", [(1, 0), (3, 0), (2, 1), (6, 1), (4, 2), (12, 2), (8, 3), (24, 3)])
def test_ring_accepting_keys_exhaustive(delta, v):
    k, s = 4, 4
    R = DomainParams.ring(k, s=s)
    guess = 77
    accepted = 0
    for alpha in range(1 << (k + s)):
        keys, auth = _auth(5, R, 2, PRG(alpha), alpha=alpha)
        macs = [a.mac_share for a in auth]
        assert mac_check_ring([(5, macs)], keys, k, s)
        forged = _shift(macs, guess * delta)
        try:
            mac_check_ring([((5 + delta) % 256, forged)], keys, k, s)
            accepted += 1
        except Abort:
            pass
    assert accepted == 1 << v


def test_ring_check_domain():
    R = DomainParams.ring(4, s=4)
    keys, auth = _auth(1, R, 2, PRG(0))
    with pytest.raises(DomainMismatch):
        mac_check_ring([(1, [a.mac_share for a in auth])], keys, 4, 5)
    with pytest.raises(DomainMismatch):
        mac_check_field([(1, [a.mac_share for a in auth], keys)])


def test_batch_check():
    R = DomainParams.ring(4, s=4)
    prg = PRG("batch")
    assert mac_check_batch([], deal_mac_key(R, 2, prg), prg)
    keys = deal_mac_key(R, 2, prg, alpha=9)
    dom = keys[0].domain
    batch = []
    for x in range(100):
        auth = authenticate(share_additive(dom(x), 2, prg), keys, prg)
        batch.append((x, [a.mac_share for a in auth]))
    assert mac_check_batch(batch, keys, prg)


def test_batch_detects_single_tamper():
    R = DomainParams.ring(4, s=4)
    prg = PRG("batch-mc")
    trials, caught = 1000, 0
    for _ in range(trials):
        keys = deal_mac_key(R, 2, prg)
        dom = keys[0].domain
        batch = []
        for x in range(100):
            auth = authenticate(share_additive(dom(x), 2, prg), keys, prg)
            batch.append((x, [a.mac_share for a in auth]))
        x, macs = batch[37]
        batch[37] = ((x + 1) % 256, macs)
        try:
            mac_check_batch(batch, keys, prg)
        except Abort:
            caught += 1
    sigma = (1 / 16 * 15 / 16 / trials) ** 0.5
    assert caught / trials >= 1 - 2 ** -4 - 3 * sigma


@given(st.sampled_from([DomainParams.field(31), DomainParams.field(2 ** 61 - 1), DomainParams.ring(8, s=8),
                        DomainParams.ring(64, s=40)]),
       st.integers(min_value=0), st.integers(2, 5), st.integers(0, 2 ** 32))
def test_honest_runs_never_abort(params, x, n, seed):
    prg = PRG(seed)
    keys, auth = _auth(x % params.modulus, params, n, prg)
    x = reconstruct([a.value_share for a in auth]).value
    macs = [a.mac_share for a in auth]
    alpha = reconstruct([k.alpha_share for k in keys]).value
    assert reconstruct(macs).value == alpha * x % keys[0].domain.modulus
    if params.kind.value == "field":
        assert mac_check_field([(x, macs, keys)])
    else:
        assert mac_check_ring([(x, macs)], keys, params.k, params.s)
    assert mac_check_batch([(x, macs)], keys, prg)


def test_completeness_many_trials():
    F = DomainParams.field(2 ** 61 - 1)
    prg = PRG("complete")
    keys = deal_mac_key(F, 3, prg)
    opened = []
    for _ in range(10_000):
        auth = authenticate(share_additive(F(prg.randbelow(F.modulus)), 3, prg), keys, prg)
        opened.append((reconstruct([a.value_share for a in auth]).value, [a.mac_share for a in auth], keys))
    assert mac_check_field(opened)
    assert opened[0][1][0].scheme is Scheme.ADDITIVE
