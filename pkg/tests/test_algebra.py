import itertools

import pytest
from hypothesis import given, strategies as st

from mpcforge.algebra import (M61, M127, DomainElement, DomainParams, Kind, Polynomial, PRG,
                              bit_decompose_plain, element_arith, interpolate_ints, is_prime,
                              lagrange_at, poly_eval, poly_interpolate, prg_sample, recompose)
from mpcforge.errors import DomainMismatch, DuplicatePoint, NotInvertible, Overflow, ParamError

from conftest import chi2_uniform_ok

SMALL_PRIMES = [p for p in range(2, 32) if all(p % d for d in range(2, p))]


def test_primality_oracle():
    assert [p for p in range(60) if is_prime(p)] == [p for p in range(2, 60) if all(p % d for d in range(2, p))]
    assert is_prime(M61) and is_prime(M127)
    assert not is_prime((1 << 61) + 1)


def test_params_validation():
    with pytest.raises(ParamError):
        DomainParams.field(15)
    with pytest.raises(ParamError):
        DomainParams.ring(1)
    with pytest.raises(ParamError):
        DomainParams.ring(129)
    with pytest.raises(ParamError):
        DomainParams.ring(8, s=65)
    assert DomainParams.binary().modulus == 2
    r = DomainParams.ring(4, s=4)
    assert r.extend().modulus == 256 and r.extend().base() == r
    assert str(r) == "Z_2^4" and str(r.extend()) == "Z_2^8" and str(DomainParams.field(31)) == "Z_31"
    assert DomainParams.field(M61).byte_width == 8


def test_element_examples():
    F7 = DomainParams.field(7)
    assert element_arith("add", F7(3), F7(5)).value == 1
    assert element_arith("inv", F7(3)).value == 5
    with pytest.raises(NotInvertible):
        element_arith("inv", DomainParams.ring(4)(4))
    with pytest.raises(NotInvertible):
        F7(0).inv()
    with pytest.raises(DomainMismatch):
        F7(1) + DomainParams.field(11)(1)
    with pytest.raises(Overflow):
        DomainElement(7, F7)


def test_inverse_matches_brute_force():
    for p in SMALL_PRIMES:
        F = DomainParams.field(p)
        for a in range(1, p):
            brute = next(x for x in range(p) if a * x % p == 1)
            assert F(a).inv().value == brute


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_field_axioms_exhaustive(p):
    F = DomainParams.field(p)
    els = [F(v) for v in range(p)]
    for a, b, c in itertools.product(els, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    for a in els[1:]:
        assert (a * a.inv()).value == 1
        assert (a + (-a)).value == 0


def test_field_inverses_up_to_31():
    for p in SMALL_PRIMES:
        F = DomainParams.field(p)
        assert all((F(a) * F(a).inv()).value == 1 for a in range(1, p))


@pytest.mark.parametrize("k", range(2, 9))
def test_ring_units_are_the_odd_elements(k):
    R = DomainParams.ring(k)
    units = []
    for a in range(1 << k):
        try:
            inv = R(a).inv()
        except NotInvertible:
            continue
        assert (R(a) * inv).value == 1
        units.append(a)
    assert len(units) == 1 << (k - 1)
    assert all(a % 2 for a in units)


def test_poly_eval_examples():
    F7 = DomainParams.field(7)
    assert poly_eval(Polynomial([F7(2), F7(3)]), F7(4)).value == 0
    assert all(poly_eval(Polynomial([F7(5)]), F7(z)).value == 5 for z in range(7))
    assert all(poly_eval(Polynomial([F7(0)] * 4), F7(z)).value == 0 for z in range(7))
    with pytest.raises(DomainMismatch):
        poly_eval(Polynomial([F7(1)]), DomainParams.field(11)(1))


def test_interpolate_examples():
    F11 = DomainParams.field(11)
    assert poly_interpolate([(F11(1), F11(9))]).values() == [9]
    prg = PRG("interp")
    for _ in range(50):
        f = Polynomial([F11(v) for v in prg.randbelow_many(11, 3)])
        pts = [(F11(z), poly_eval(f, F11(z))) for z in (1, 4, 9)]
        assert poly_interpolate(pts).values() == f.values()
    with pytest.raises(DuplicatePoint):
        poly_interpolate([(F11(1), F11(2)), (F11(1), F11(3))])


def test_product_polynomials_agree_on_shared_points():
    # h = f*g of degree 2N-2 is fixed by 2N-1 points and matches f(z)g(z) everywhere
    p, N = 31, 3
    prg = PRG("fg")
    f = prg.randbelow_many(p, N)
    g = prg.randbelow_many(p, N)
    xs = list(range(1, 2 * N))
    h = interpolate_ints(xs, [poly_eval_int(f, x, p) * poly_eval_int(g, x, p) % p for x in xs], p)
    for z in range(p):
        assert poly_eval_int(h, z, p) == poly_eval_int(f, z, p) * poly_eval_int(g, z, p) % p


def poly_eval_int(coeffs, z, p):
    return sum(c * pow(z, i, p) for i, c in enumerate(coeffs)) % p


@given(st.sampled_from([11, 31, 97, 8191]), st.lists(st.integers(min_value=0), min_size=1, max_size=6))
def test_interpolation_inverts_evaluation(p, raw):
    F = DomainParams.field(p)
    f = Polynomial([F(v % p) for v in raw])
    pts = [(F(z), poly_eval(f, F(z))) for z in range(1, len(raw) + 1)]
    got = poly_interpolate(pts).values()
    assert got + [0] * (len(raw) - len(got)) == f.values()


@given(st.integers(2, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2 * n))))
def test_lagrange_weights_reproduce_values(args):
    n, at = args
    p = 101
    xs = list(range(1, n + 1))
    w = lagrange_at(xs, at, p)
    prg = PRG(f"lag{n}")
    coeffs = prg.randbelow_many(p, n)
    ys = [poly_eval_int(coeffs, x, p) for x in xs]
    assert sum(a * b for a, b in zip(w, ys)) % p == poly_eval_int(coeffs, at, p)


def test_bit_decompose_examples():
    assert bit_decompose_plain(5, 4) == [1, 0, 1, 0]
    assert bit_decompose_plain(0, 6) == [0] * 6
    with pytest.raises(Overflow):
        bit_decompose_plain(16, 4)
    R = DomainParams.ring(8)
    assert all(recompose(bit_decompose_plain(R(x), 8)) == x for x in range(256))


def test_prg_sample_examples():
    F11 = DomainParams.field(11)
    assert prg_sample(b"seed", F11, 20) == prg_sample(b"seed", F11, 20)
    assert prg_sample(b"seed", F11, 20) != prg_sample(b"other", F11, 20)
    vals = [e.value for e in prg_sample(b"chi", F11, 100_000)]
    assert chi2_uniform_ok(vals, 11)
    with pytest.raises(ParamError):
        prg_sample(b"", F11, 1)


def test_prg_streams():
    a, b = PRG(7), PRG(7)
    assert a.random_bytes(32) == b.random_bytes(32)
    assert a.fork("x").randbits(64) == b.fork("x").randbits(64)
    assert a.fork("x").randbits(64) != a.fork("y").randbits(64)
    perm = PRG("s").shuffle(list(range(20)))
    assert sorted(perm) == list(range(20))
    assert all(1 <= PRG(i).nonzero_below(5) < 5 for i in range(50))
    assert chi2_uniform_ok(PRG("r").randbelow_many(16, 32_000), 16)


@given(st.sampled_from([DomainParams.field(31), DomainParams.ring(8), DomainParams.ring(64), DomainParams.field(M61)]),
       st.integers(min_value=0), st.integers(min_value=0))
def test_element_ops_match_integer_oracle(params, x, y):
    m = params.modulus
    a, b = params(x), params(y)
    assert (a + b).value == (x + y) % m
    assert (a - b).value == (x - y) % m
    assert (a * b).value == (x * y) % m
    assert (-a).value == -x % m
    assert params.kind in (Kind.PRIME_FIELD, Kind.RING)
