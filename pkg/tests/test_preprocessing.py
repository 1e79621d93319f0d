import itertools
import math

import pytest

from mpcforge.algebra import M61, PRG, DomainParams
from mpcforge.conversion import DaBit, dabit_convert
from mpcforge.engine import ProtocolConfig, Runtime
from mpcforge.errors import Abort, DomainMismatch, ParamError
from mpcforge.preprocessing import (BeaverTriple, batch_poly_blocks, batch_poly_check, batch_poly_values, bucket_cut_and_choose,
                                    bucket_sharings, dealer_edabits, dealer_triples, exhaustive_permutations,
                                    furukawa_triple_gen, gen_dabits, gen_edabits, gen_triples_dealer,
                                    gen_triples_ot, load_triples, ot_multiply, pairwise_sacrifice,
                                    pairwise_values, postprocess_check, ring_check_values, ring_triple_check,
                                    sacrifice_check, sacrifice_values, save_triples)
from mpcforge.sharing import reconstruct

from conftest import within_3sigma


def _arith(family="Semi", **kw):
    return Runtime(ProtocolConfig(family, **kw)).arith


def _triple(proto, a, b, c):
    return BeaverTriple(proto.deal_ints(a), proto.deal_ints(b), proto.deal_ints(c))


def _open_triple(t):
    p = t.a.proto
    return [p.dom.to_ints(v, t.lanes) for v in p.open_many([t.a, t.b, t.c])]


def _corrupt(proto, n, modulus, seed, err=1):
    prg = PRG(seed)
    a, b = prg.randbelow_many(modulus, n), prg.randbelow_many(modulus, n)
    return _triple(proto, a, b, [(x * y + err) % modulus for x, y in zip(a, b)])


# -- dealer and OT triples

def test_dealer_triples_plaintext_check():
    F = DomainParams.field(31)
    ts = gen_triples_dealer(3, 10_000, F, PRG(1))
    for t in ts:
        assert reconstruct(list(t.c)).value == reconstruct(list(t.a)).value * reconstruct(list(t.b)).value % 31
    assert gen_triples_dealer(3, 0, F, PRG(1)) == []
    assert gen_triples_dealer(3, 5, F, PRG(7)) == gen_triples_dealer(3, 5, F, PRG(7))


def test_triple_pool_file_round_trip(tmp_path):
    R = DomainParams.ring(64)
    ts = gen_triples_dealer(3, 20, R, PRG(2))
    path = tmp_path / "pool.bin"
    save_triples(path, ts, authenticated=False)
    meta, back = load_triples(path)
    assert back == ts and meta["count"] == 20 and meta["authenticated"] is False
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(ParamError):
        load_triples(path)
    with pytest.raises(ParamError):
        save_triples(path, [])


def test_ot_triples_exhaustive_two_parties():
    proto = _arith("Semi2k", bits=4, n_parties=2)
    xs, ys = zip(*itertools.product(range(16), repeat=2))
    a, b = proto.input(0, xs), proto.input(1, ys)
    c = ot_multiply(proto, a, b)
    assert proto.reveal(c) == [x * y % 16 for x, y in zip(xs, ys)]


def test_ot_triples_three_parties_mersenne():
    proto = _arith("Semi", prime=M61)
    t = gen_triples_ot(proto, 100)
    a, b, c = _open_triple(t)
    assert all(x * y % M61 == z for x, y, z in zip(a, b, c))
    zero = ot_multiply(proto, proto.zeros(3), proto.random(3))
    assert proto.reveal(zero) == [0, 0, 0]


def test_ot_needs_additive_shares():
    with pytest.raises(DomainMismatch):
        rt = Runtime(ProtocolConfig("Rep3Ring", bits=8))
        ot_multiply(rt.arith, rt.input(0, [1]), rt.input(0, [1]))


# -- sacrifice

def test_sacrifice_honest_and_empty():
    proto = _arith(prime=11)
    for seed in range(50):
        t, aux = dealer_triples(proto, 20), dealer_triples(proto, 20)
        assert sacrifice_check(t, aux)
    assert sacrifice_check(None, None)


def test_sacrifice_rejection_rate_z11():
    proto = _arith(prime=11)
    N = 10_000
    w = sacrifice_values(_corrupt(proto, N, 11, "sac"), dealer_triples(proto, N), groups=N)
    rejected = sum(1 for v in w if v)
    sigma = math.sqrt((10 / 11) * (1 / 11) / N)
    assert rejected / N >= 10 / 11 - 3 * sigma
    assert within_3sigma(rejected, N, 10 / 11)
    assert proto.s.counters.aux_consumed >= N


def test_sacrifice_aborts_on_corruption():
    proto = _arith(prime=M61)
    with pytest.raises(Abort):
        sacrifice_check(_corrupt(proto, 4, M61, "x"), dealer_triples(proto, 4))
    with pytest.raises(ParamError):
        sacrifice_values(dealer_triples(proto, 4), dealer_triples(proto, 2))
    with pytest.raises(DomainMismatch):
        p2 = _arith("Semi2k", bits=8)
        sacrifice_check(dealer_triples(p2, 2), dealer_triples(p2, 2))


def test_pairwise_sacrifice_rate_z11():
    proto = _arith(prime=11)
    N = 10_000
    w = pairwise_values(_corrupt(proto, N, 11, "pw"), dealer_triples(proto, N))
    assert within_3sigma(sum(1 for v in w if v), N, 10 / 11)
    assert pairwise_sacrifice(dealer_triples(proto, 10), dealer_triples(proto, 10))


# -- batch polynomial check

def test_batch_poly_honest():
    proto = _arith(prime=31)
    for N in (1, 2, 5):
        assert batch_poly_check(dealer_triples(proto, N))
    with pytest.raises(ParamError):
        batch_poly_values(dealer_triples(proto, 16))


def test_batch_poly_enumerate_points():
    proto = _arith(prime=31)
    N = 2
    a, b = [3, 7], [5, 11]
    bad = _triple(proto, a, b, [15, (77 + 1) % 31])
    accepted = 0
    for z in range(31):
        f, g, h = batch_poly_values(bad, z)
        accepted += f * g % 31 == h
    assert accepted <= 2 * N - 2


def test_batch_poly_blocks_large_batch():
    proto = _arith(prime=M61)
    assert batch_poly_check(dealer_triples(proto, 100))  # three blocks of 32 and a tail of 4
    bad = _corrupt(proto, 100, M61, "blk")
    with pytest.raises(Abort):
        batch_poly_check(bad)
    good = dealer_triples(proto, 100)
    a, b, c = good.astuple()
    # corrupt only triple 40 (second block)
    one = _triple(proto, [0] * 100, [0] * 100, [int(i == 40) for i in range(100)])
    with pytest.raises(Abort):
        batch_poly_check(BeaverTriple(a, b, proto.add(c, one.c)))


def test_batch_poly_blocks_enumerate_points():
    proto = _arith(prime=31)
    a, b = [3, 7, 1, 2, 9], [5, 11, 4, 6, 8]
    c = [x * y % 31 for x, y in zip(a, b)]
    c[3] = (c[3] + 1) % 31  # second block of two
    bad = _triple(proto, a, b, c)
    accepted = [0, 0, 0]
    for z in range(31):
        for k, (f, g, h) in enumerate(batch_poly_blocks(bad, block=2, z=z)):
            accepted[k] += f * g % 31 == h
    assert accepted[0] == 31 and accepted[2] == 31
    assert accepted[1] <= 2 * 2 - 2


def test_batch_poly_degenerate_single():
    proto = _arith(prime=31)
    with pytest.raises(Abort):
        batch_poly_check(_triple(proto, [4], [5], [21]))
    assert batch_poly_check(_triple(proto, [4], [5], [20]))


# -- ring check

def test_ring_check_honest():
    proto = _arith("Semi2k", bits=8)
    assert ring_triple_check(dealer_triples(proto, 64))
    assert ring_triple_check(BeaverTriple(proto.zeros(0), proto.zeros(0), proto.zeros(0)))


def test_ring_check_extended_ring_rejects():
    # k=4 carried in Z_2^8 (lambda=4); c <- c+1
    proto = _arith("Semi2k", bits=8)
    N = 10_000
    t = _corrupt(proto, N, 256, "ring")
    a, c = _aux(proto, t, 256)
    w = ring_check_values(t, a, c)
    assert sum(1 for v in w if v) / N >= 1 - 2 ** -4


def test_ring_check_without_slack_half_rejects():
    # lambda=0: an error of 2^(k-1) survives every even coin
    proto = _arith("Semi2k", bits=4)
    N = 10_000
    t = _corrupt(proto, N, 16, "ring0", err=8)
    a, c = _aux(proto, t, 16)
    w = ring_check_values(t, a, c)
    assert within_3sigma(sum(1 for v in w if v), N, 1 / 2)


def _aux(proto, t, modulus):
    y = proto.dom.to_ints(proto.open(t.b), t.lanes)
    prg = PRG("aux")
    a = prg.randbelow_many(modulus, t.lanes)
    return proto.deal_ints(a), proto.deal_ints([u * v % modulus for u, v in zip(a, y)])


# -- postprocessing

def test_postprocess_honest_sort_and_empty():
    from mpcforge.kernels import execute, make_inputs, plain_kernel
    cfg = ProtocolConfig("MalRepRing", bits=8)
    rt = Runtime(cfg)
    data = make_inputs(cfg, "sort", 64, seed=3)
    assert execute(rt, "sort", 64, data) == plain_kernel(cfg, "sort", 64, data)
    assert postprocess_check([], None)


@pytest.mark.parametrize("family", ["MalRepRing", "MalShamir"])
def test_postprocess_corrupted_product(family):
    rt = Runtime(ProtocolConfig(family, **({"bits": 8} if family == "MalRepRing" else {"prime": 31})))
    ar = rt.arith
    x, y = rt.input(0, [2, 3, 4]), rt.input(1, [5, 6, 7])
    z = ar.mul(x, y)
    proto, lx, ly, lz = rt.s.mult_log[-1]
    rt.s.mult_log[-1] = (proto, lx, ly, ar.add_public(lz, ar.pub([0, 1, 0])))
    with pytest.raises(Abort):
        postprocess_check(rt.s.mult_log, rt.s)
    assert rt.reveal(z) == [10, 18, 28]


# -- bucket cut-and-choose

def test_bucket_sharing_count():
    assert bucket_sharings(4, 2, 1, 2) == 20
    for N, B, C, L in [(4, 2, 1, 2), (6, 3, 2, 3), (8, 4, 3, 1)]:
        rt = Runtime(ProtocolConfig("FurukawaBin"))
        requested = []

        def gen(proto, count):
            requested.append(count)
            return dealer_triples(proto, count)

        out = bucket_cut_and_choose(N, B, C, L, rt.binary, gen)
        assert out.lanes == N
        assert 2 * requested[0] == bucket_sharings(N, B, C, L)
        a, b, c = _open_triple(out)
        assert all(x & y == z for x, y, z in zip(a, b, c))


def test_bucket_param_errors():
    p = Runtime(ProtocolConfig("FurukawaBin")).binary
    with pytest.raises(ParamError):
        bucket_cut_and_choose(5, 2, 1, 2, p)
    with pytest.raises(ParamError):
        bucket_cut_and_choose(2, 2, 1, 1, p, perms=[[1, 0, 2], [0, 1, 2]])
    with pytest.raises(ParamError):
        bucket_cut_and_choose(4, 2, 1, 2, p, perms=[[3, 1, 2, 0, 4, 5]])


def _bucket_outcomes(bad):
    """Run N=2, B=2, C=1, L=1 under every permutation with the generated triples in ``bad`` corrupted."""
    outcomes = []
    for perms in exhaustive_permutations(2, 2, 1, 1):
        rt = Runtime(ProtocolConfig("FurukawaBin"))
        p = rt.binary

        def gen(proto, count):
            a, b = [1] * count, [1] * count
            return _triple(proto, a, b, [0 if i in bad else 1 for i in range(count)])

        try:
            out = bucket_cut_and_choose(2, 2, 1, 1, p, gen, perms)
            _, _, c = _open_triple(out)
            outcomes.append("corrupt" if 0 in c else "clean")
        except Abort:
            outcomes.append("abort")
    return outcomes


def test_bucket_single_corruption_always_caught():
    for j in range(5):
        res = _bucket_outcomes({j})
        assert len(res) == 6 and res.count("abort") == 6


def test_bucket_matched_pair_survives_combinatorially():
    # target 0 and checker element 0 share the same error; they pass only when paired:
    # the checker lands at survivor slot 1 in 2 of the 3! permutations
    res = _bucket_outcomes({0, 2})
    assert res.count("corrupt") == 2 and res.count("abort") == 4


def test_furukawa_triples():
    p = Runtime(ProtocolConfig("FurukawaBin")).binary
    t = furukawa_triple_gen(64, p)
    a, b, c = _open_triple(t)
    assert len(c) == 64 and all(x & y == z for x, y, z in zip(a, b, c))
    assert furukawa_triple_gen(0, p).lanes == 0
    with pytest.raises(ParamError):
        furukawa_triple_gen(4, _arith("Semi2k", bits=8))


def test_binary_sacrifice_every_error_pattern():
    xs, ys = zip(*itertools.product((0, 1), repeat=2))
    for ex, ey, ez in itertools.product((0, 1), repeat=3):
        p = Runtime(ProtocolConfig("FurukawaBin")).binary
        tx = [x ^ ex for x in xs]
        ty = [y ^ ey for y in ys]
        tz = [(x & y) ^ ez for x, y in zip(xs, ys)]
        target = _triple(p, tx, ty, tz)
        broken = any((x & y) != z for x, y, z in zip(tx, ty, tz))
        if broken:
            with pytest.raises(Abort):
                pairwise_sacrifice(target, dealer_triples(p, 4))
        else:
            assert pairwise_sacrifice(target, dealer_triples(p, 4))


# -- daBits and edaBits

@pytest.mark.parametrize("family,kw", [("Semi", dict(prime=31)), ("Spdz2k", dict(bits=8)),
                                       ("MalShamir", dict(prime=31))])
def test_dabits_consistent_and_unbiased(family, kw):
    rt = Runtime(ProtocolConfig(family, **kw))
    count = 10_000 if family == "Semi" else 256
    d = gen_dabits(count, rt.arith, rt.binary)
    ar = rt.arith.reveal(d.arith)
    bi = rt.reveal_bits([d.binary])
    assert ar == bi and set(ar) <= {0, 1}
    if family == "Semi":
        assert within_3sigma(sum(ar), count, 0.5)
    assert gen_dabits(0, rt.arith, rt.binary).arith.lanes == 0


def test_edabits_exhaustive_z64():
    rt = Runtime(ProtocolConfig("Semi2k", bits=6))
    e = gen_edabits(1024, 6, rt.arith, rt.binary)
    r = rt.arith.reveal(e.arith)
    bits = rt.reveal_bits(e.bits)
    assert [v % 64 for v in bits] == r
    assert set(r) == set(range(64))
    assert all(b == 0 for v, b in zip(r, bits) if v == 0)
    with pytest.raises(ParamError):
        gen_edabits(1, 7, rt.arith, rt.binary)


def test_field_edabits_bounded():
    rt = Runtime(ProtocolConfig("SpdzField", prime=M61))
    e = gen_edabits(64, 32, rt.arith, rt.binary)
    assert rt.arith.reveal(e.arith) == rt.reveal_bits(e.bits)
    small = Runtime(ProtocolConfig("Semi", prime=31))
    with pytest.raises(ParamError):
        gen_edabits(4, 5, small.arith, small.binary)


def test_one_bit_edabit_is_a_dabit():
    rt = Runtime(ProtocolConfig("Semi", prime=31))
    e = dealer_edabits(100, 1, rt.arith, rt.binary)
    assert len(e.bits) == 1 and set(rt.arith.reveal(e.arith)) <= {0, 1}
    d = DaBit(e.arith, e.bits[0])
    bits = [0, 1] * 50
    b = rt.input_bits(0, bits, 1)
    assert rt.arith.reveal(dabit_convert(b, [d], "B2A")) == bits
