"""Offline phase: correlated randomness and its validation.

Generators produce Beaver triples, daBits and edaBits; validators check
triples by sacrifice, polynomial batching, the ring check, postprocessing
of an optimistic run, or bucket cut-and-choose. Vector-valued objects hold
``lanes`` independent instances, so a list of N triples is one
``BeaverTriple`` with N lanes.
"""

from __future__ import annotations

import itertools
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .algebra import PRG, DomainElement, DomainParams, Kind, lagrange_at
from .circuits import BitOps, sum_rows
from .conversion import DaBit, EdaBit
from .domains import from_planes, to_planes
from .errors import Abort, DomainMismatch, ParamError
from .protocols import Protocol, SVec
from .sharing import Scheme, Share, share_additive
from .transport import MsgType


@dataclass
class BeaverTriple:
    a: SVec
    b: SVec
    c: SVec

    @property
    def lanes(self) -> int:
        return self.a.lanes

    def take(self, start: int, count: int) -> "BeaverTriple":
        p = self.a.proto
        return BeaverTriple(p.take(self.a, start, count), p.take(self.b, start, count), p.take(self.c, start, count))

    def astuple(self):
        return self.a, self.b, self.c


@dataclass(frozen=True)
class Triple:
    """One dealer triple as per-party additive shares."""

    a: tuple[Share, ...]
    b: tuple[Share, ...]
    c: tuple[Share, ...]
    params: DomainParams


# -- dealer and OT generation

def gen_triples_dealer(n_parties: int, count: int, params: DomainParams, prg: PRG) -> list[Triple]:
    if count < 0:
        raise ParamError("count must be non-negative")
    out = []
    m = params.modulus
    for a, b in zip(prg.randbelow_many(m, count), prg.randbelow_many(m, count)):
        sa = share_additive(DomainElement(a, params), n_parties, prg)
        sb = share_additive(DomainElement(b, params), n_parties, prg)
        sc = share_additive(DomainElement(a * b % m, params), n_parties, prg)
        out.append(Triple(tuple(sa), tuple(sb), tuple(sc), params))
    return out


def dealer_triples(proto: Protocol, lanes: int) -> BeaverTriple:
    return BeaverTriple(*proto.dealer_triples(lanes))


class IdealOT:
    """1-out-of-2 OT functionality.

    The sender's pair travels over the sender->receiver channel, so bytes are
    counted; only the chosen element is handed to the receiver and the choice
    bits never leave the receiver.
    """

    def __init__(self, proto: Protocol):
        self.proto = proto
        self.count = 0

    def transfer(self, sender: int, receiver: int, q0, q1, choice: list[int], lanes: int):
        dom = self.proto.dom
        net = self.proto.net
        net.send(sender, receiver, MsgType.OT, dom.encode(q0, lanes) + dom.encode(q1, lanes))
        data = net.recv_payload(sender, receiver)
        w = dom.nbytes(lanes)
        r0, r1 = dom.decode(data[:w], lanes), dom.decode(data[w:2 * w], lanes)
        self.count += lanes
        return dom.vec([int(b) if ch else int(a) for a, b, ch in zip(r0, r1, choice)])


def ot_multiply(proto: Protocol, a: SVec, b: SVec, ot: IdealOT | None = None) -> SVec:
    """Additive shares of a*b from additive a, b: local a^i b^i plus OT cross terms.

    For each ordered pair (i, j) and each bit l of a^i, the sender j offers
    (s_l, s_l + 2^l b^j); the receiver's sum minus the sender's sum is a^i b^j.
    """
    if proto.scheme not in (Scheme.ADDITIVE, Scheme.XOR):
        raise DomainMismatch("OT multiplication works on additive shares")
    ot = ot or IdealOT(proto)
    dom = proto.dom
    lanes = a.lanes
    n = proto.n
    nbits = dom.modulus.bit_length() - (1 if dom.modulus & (dom.modulus - 1) == 0 else 0)
    acc = [dom.mul(a.parts[i][0], b.parts[i][0]) for i in range(n)]
    for i in range(n):
        abits = [dom.to_ints(a.parts[i][0], lanes)]
        for j in range(n):
            if i == j:
                continue
            prg = proto.s.party_prg[j]
            for l in range(nbits):
                s_l = dom.rand(prg, lanes)
                q1 = dom.add(s_l, dom.scale(b.parts[j][0], 1 << l))
                choice = [(v >> l) & 1 for v in abits[0]]
                got = ot.transfer(j, i, s_l, q1, choice, lanes)
                acc[i] = dom.add(acc[i], got)
                acc[j] = dom.sub(acc[j], s_l)
    proto.net.barrier()
    return SVec(proto, lanes, [(v,) for v in acc])


def gen_triples_ot(proto: Protocol, count: int) -> BeaverTriple:
    if proto.n < 2:
        raise ParamError("OT triples need at least 2 parties")
    a = proto.random(count)
    b = proto.random(count)
    return BeaverTriple(a, b, ot_multiply(proto, a, b))


# -- validation

def _coins(proto: Protocol, lanes: int, nonzero: bool = False):
    prg = proto.s.joint_prg()
    m = proto.dom.modulus
    if proto.dom.binary:
        return proto.dom.ones(lanes) if nonzero else prg.randbits(lanes)
    vals = [prg.nonzero_below(m) for _ in range(lanes)] if nonzero else prg.randbelow_many(m, lanes)
    return proto.dom.vec(vals)


def _is_zero(proto: Protocol, v, lanes: int) -> list[bool]:
    return [x == 0 for x in proto.dom.to_ints(v, lanes)]


def sacrifice_values(targets: BeaverTriple, aux: BeaverTriple, groups: int = 1) -> list[int]:
    """Opened w per group of targets; all zero iff the batch is accepted.

    [alpha x] = [x][alpha]; rho = alpha x + a and sigma = y + b are opened; then
    v_i = (alpha z + phi alpha x) - c + (a sigma + phi a) - (rho y + phi rho),
    v = sum beta_i v_i within a group, and w = r v is opened.
    """
    proto = targets.a.proto
    if aux.lanes < targets.lanes:
        raise ParamError("need one auxiliary triple per target")
    aux = aux.take(0, targets.lanes)
    lanes = targets.lanes
    x, y, z = targets.astuple()
    a, b, c = aux.astuple()
    with proto.offline():
        size = lanes // groups
        alpha = proto.random(groups)
        # one alpha per group, repeated over the group's lanes
        alpha_v = alpha if size == 1 else proto.concat(
            [proto.take(alpha, g, 1) for g in range(groups) for _ in range(size)])
        ax, az = proto.mul_many([(x, alpha_v), (z, alpha_v)])
        rho, sigma = proto.open_many([proto.add(ax, a), proto.add(y, b)])
        phi = _coins(proto, lanes)
        v = proto.sub(proto.add(az, proto.mul_public(ax, phi)), c)
        v = proto.add(v, proto.add(proto.mul_public(a, sigma), proto.mul_public(a, phi)))
        v = proto.sub(v, proto.add_public(proto.mul_public(y, rho), proto.dom.mul(phi, rho)))
        # beta and r nonzero: a corrupted target then passes only when alpha = 0
        beta = _coins(proto, lanes, nonzero=True)
        r = _coins(proto, groups, nonzero=True)
        vg = proto.lane_sum(proto.mul_public(v, beta), groups)
        w = proto.open(proto.mul_public(vg, r))
    proto.s.counters.aux_consumed += lanes
    return proto.dom.to_ints(w, groups)


def sacrifice_check(targets: BeaverTriple | None, auxiliaries: BeaverTriple | None, session=None) -> bool:
    if targets is None or targets.lanes == 0:
        return True
    if not targets.a.proto.dom.is_field:
        raise DomainMismatch("sacrifice is specified over prime fields")
    if any(sacrifice_values(targets, auxiliaries)):
        raise Abort("sacrifice check failed")
    return True


def pairwise_values(targets: BeaverTriple, aux: BeaverTriple, t=None) -> list[int]:
    """Multiplication-free sacrifice of each target against its own auxiliary.

    rho = t x - a, sigma = y - b; t z - c - sigma a - rho b - sigma rho opens to 0.
    Over bits t = 1 and the check is deterministic.
    """
    proto = targets.a.proto
    lanes = targets.lanes
    aux = aux.take(0, lanes)
    x, y, z = targets.astuple()
    a, b, c = aux.astuple()
    with proto.offline():
        if t is None:
            t = proto.dom.ones(lanes) if proto.dom.binary else _coins(proto, lanes)
        rho, sigma = proto.open_many([proto.sub(proto.mul_public(x, t), a), proto.sub(y, b)])
        chk = proto.sub(proto.sub(proto.mul_public(z, t), c), proto.mul_public(a, sigma))
        chk = proto.sub(chk, proto.mul_public(b, rho))
        chk = proto.sub_public(chk, proto.dom.mul(sigma, rho))
        w = proto.open(chk)
    proto.s.counters.aux_consumed += lanes
    return proto.dom.to_ints(w, lanes)


def pairwise_sacrifice(targets: BeaverTriple, aux: BeaverTriple) -> bool:
    if targets.lanes == 0:
        return True
    if any(pairwise_values(targets, aux)):
        raise Abort("triple sacrifice failed")
    return True


def _unchecked_products(proto: Protocol, pairs: list[tuple[SVec, SVec]]) -> list[SVec]:
    """Products for the polynomial check itself, from raw dealer triples.

    A wrong product here makes f*g differ from h, so the check covers it;
    drawing validated triples instead would recurse into another check.
    """
    if not pairs:
        return []
    if not proto.uses_triples:
        return proto.mul_many(pairs)
    x = proto.concat([a for a, _ in pairs])
    y = proto.concat([b for _, b in pairs])
    proto.s.counters.aux_consumed += x.lanes
    z = proto.beaver(x, y, proto.dealer_triples(x.lanes))
    return proto.split(z, [a.lanes for a, _ in pairs])


def _lane_combination(proto: Protocol, x: SVec, weights: Sequence[int]) -> SVec:
    w = proto.dom.vec(weights)
    return proto.lane_sum(proto.mul_public(x, w), 1)


def batch_poly_values(triples: BeaverTriple, z: int | None = None) -> tuple[int, int, int]:
    """Open f(z), g(z), h(z) for the polynomial batch check.

    f(i) = a_i, g(i) = b_i (degree N-1) and h(i) = c_i extended to degree 2N-2
    with N-1 fresh products f(j) g(j), j = N+1..2N-1.
    """
    proto = triples.a.proto
    dom = proto.dom
    if not dom.is_field:
        raise DomainMismatch("the polynomial check needs a prime field")
    p = dom.modulus
    N = triples.lanes
    if p <= 2 * N - 1:
        raise ParamError(f"p={p} too small for N={N}")
    xs = list(range(1, N + 1))
    with proto.offline():
        ext = list(range(N + 1, 2 * N))
        fe = [_lane_combination(proto, triples.a, lagrange_at(xs, j, p)) for j in ext]
        ge = [_lane_combination(proto, triples.b, lagrange_at(xs, j, p)) for j in ext]
        he = _unchecked_products(proto, list(zip(fe, ge)))
        if z is None:
            z = proto.s.joint_prg().randbelow(p)
        hx = xs + ext
        h_vals = proto.concat([triples.c] + he) if he else triples.c
        fz = _lane_combination(proto, triples.a, lagrange_at(xs, z, p))
        gz = _lane_combination(proto, triples.b, lagrange_at(xs, z, p))
        hz = _lane_combination(proto, h_vals, lagrange_at(hx, z, p))
        out = proto.open_many([fz, gz, hz])
    return tuple(int(dom.to_ints(v, 1)[0]) for v in out)


BATCH_POLY_BLOCK = 32


def _weighted(proto: Protocol, cols: Sequence[SVec], weights: Sequence[int]) -> SVec:
    return proto.sum([proto.scale(c, w) for c, w in zip(cols, weights)])


def batch_poly_blocks(triples: BeaverTriple, block: int = BATCH_POLY_BLOCK,
                      z: int | None = None) -> list[tuple[int, int, int]]:
    """(f(z), g(z), h(z)) for every block of ``block`` consecutive triples.

    All full blocks share the points 1..block, so the interpolation weights are
    computed once and applied lane-wise across blocks: one multiplication
    round and one opening for the whole batch. A short tail block is checked
    on its own.
    """
    proto = triples.a.proto
    dom = proto.dom
    if not dom.is_field:
        raise DomainMismatch("the polynomial check needs a prime field")
    p = dom.modulus
    N = triples.lanes
    B = min(block, N)
    nb, tail = divmod(N, B)
    if p <= 2 * B - 1:
        raise ParamError(f"p={p} too small for blocks of {B}")
    out = []
    with proto.offline():
        if z is None:
            z = proto.s.joint_prg().randbelow(p)
        if B > 1:
            # column i holds triple i of every full block
            cols = [[proto.gather(v, [k * B + i for k in range(nb)]) for i in range(B)]
                    for v in (triples.a, triples.b, triples.c)]
            xs = list(range(1, B + 1))
            ext = list(range(B + 1, 2 * B))
            fe = [_weighted(proto, cols[0], lagrange_at(xs, j, p)) for j in ext]
            ge = [_weighted(proto, cols[1], lagrange_at(xs, j, p)) for j in ext]
            he = _unchecked_products(proto, list(zip(fe, ge)))
            wz = lagrange_at(xs, z, p)
            fz, gz = _weighted(proto, cols[0], wz), _weighted(proto, cols[1], wz)
            hz = _weighted(proto, cols[2] + he, lagrange_at(xs + ext, z, p))
            opened = [dom.to_ints(v, nb) for v in proto.open_many([fz, gz, hz])]
            out += list(zip(*opened))
        else:
            out += list(zip(*(dom.to_ints(v, N) for v in proto.open_many(list(triples.astuple())))))
    if tail:
        out.append(batch_poly_values(triples.take(nb * B, tail), z))
    return [tuple(int(v) for v in t) for t in out]


def batch_poly_check(triples: BeaverTriple, session=None, z: int | None = None) -> bool:
    """Blockwise polynomial check; a corrupted block passes with probability at most (2B-2)/p."""
    if triples.lanes == 0:
        return True
    p = triples.a.proto.dom.modulus
    for f, g, h in batch_poly_blocks(triples, z=z):
        if f * g % p != h:
            raise Abort("polynomial batch check failed")
    return True


def ring_check_values(target: BeaverTriple, a: SVec, c: SVec, r=None) -> list[int]:
    """e = r x + a is opened and w = r z + c - e y must open to 0 (aux c = a y)."""
    proto = target.a.proto
    lanes = target.lanes
    x, y, z = target.astuple()
    with proto.offline():
        if r is None:
            r = _coins(proto, lanes)
        e = proto.open(proto.add(proto.mul_public(x, r), a))
        w = proto.open(proto.sub(proto.add(proto.mul_public(z, r), c), proto.mul_public(y, e)))
    proto.s.counters.aux_consumed += lanes
    return proto.dom.to_ints(w, lanes)


def ring_aux(target: BeaverTriple) -> tuple[SVec, SVec]:
    """Auxiliary (a, c = a y) sharing y with the target, via one multiplication."""
    proto = target.a.proto
    with proto.offline():
        a = proto.random(target.lanes)
        c = proto.mul(a, target.b)
    return a, c


def ring_triple_check(target: BeaverTriple, session=None, aux: tuple[SVec, SVec] | None = None) -> bool:
    if target.lanes == 0:
        return True
    a, c = aux if aux is not None else ring_aux(target)
    if any(ring_check_values(target, a, c)):
        raise Abort("ring triple check failed")
    return True


def postprocess_check(multiplication_log, session=None) -> bool:
    """Check every product of an optimistic run, one batched check per protocol."""
    by_proto: dict = {}
    for proto, x, y, z in multiplication_log:
        by_proto.setdefault(id(proto), (proto, []))[1].append((x, y, z))
    for proto, items in by_proto.values():
        x = proto.concat([i[0] for i in items])
        y = proto.concat([i[1] for i in items])
        z = proto.concat([i[2] for i in items])
        target = BeaverTriple(x, y, z)
        if proto.dom.binary:
            aux = furukawa_triple_gen(target.lanes, proto)
            pairwise_sacrifice(target, aux)
        elif proto.dom.is_field:
            with proto.offline():
                a, b = proto.random(target.lanes), proto.random(target.lanes)
                aux = BeaverTriple(a, b, proto.mul(a, b))
            sacrifice_check(target, aux)
        else:
            ring_triple_check(target)
    if session is not None:
        session.mult_log.clear()
    return True


# -- bucket cut-and-choose

def bucket_sharings(N: int, B: int, C: int, L: int) -> int:
    """Random sharings requested: M = 2(N + CL)(B - 1) + 2N (two per triple)."""
    return 2 * (N + C * L) * (B - 1) + 2 * N


def bucket_cut_and_choose(N: int, B: int, C: int, L: int, proto: Protocol, generate=None,
                          perms: list[list[int]] | None = None) -> BeaverTriple:
    """N checked triples from N targets and B - 1 checker arrays of N + CL each.

    Each checker array is split into L sub-arrays of X = N/L + C; every
    sub-array is permuted and its first C triples opened. Target i is then
    sacrificed against the i-th surviving triple of every checker array.
    ``perms`` (one permutation of range(N + CL) per checker array, applied
    per sub-array block) replaces the jointly sampled shuffles.
    """
    if N <= 0 or B < 2 or C < 0 or L < 1 or N % L:
        raise ParamError("need N > 0, B >= 2, C >= 0 and L dividing N")
    X = N // L + C
    width = X * L
    total = bucket_sharings(N, B, C, L) // 2
    generate = generate or _sh_triples
    with proto.offline():
        gen = generate(proto, total)
    targets = gen.take(0, N)
    if perms is None:
        prg = proto.s.joint_prg()
        perms = []
        for _ in range(B - 1):
            perm = []
            for sub in range(L):
                perm += [sub * X + i for i in prg.shuffle(list(range(X)))]
            perms.append(perm)
    if len(perms) != B - 1:
        raise ParamError("need one permutation per checker array")
    opened, kept = [], []
    for j, perm in enumerate(perms):
        if any(perm[i] // X != i // X for i in range(width)):
            raise ParamError("permutation must stay inside each sub-array")
        arr = _permute(gen.take(N + j * width, width), perm)
        opened += [_take_idx(arr, [sub * X + i for i in range(C)]) for sub in range(L)]
        kept.append(_concat_triples(proto, [_take_idx(arr, [sub * X + i for i in range(C, X)])
                                            for sub in range(L)]))
    _open_and_verify(proto, opened)
    for chk in kept:
        pairwise_sacrifice(targets, chk)
    return targets


def _sh_triples(proto: Protocol, count: int) -> BeaverTriple:
    a, b = proto.random(count), proto.random(count)
    return BeaverTriple(a, b, proto.mul(a, b))


def _take_idx(t: BeaverTriple, idx: Sequence[int]) -> BeaverTriple:
    p = t.a.proto
    return BeaverTriple(p.gather(t.a, idx), p.gather(t.b, idx), p.gather(t.c, idx))


def _permute(t: BeaverTriple, perm: Sequence[int]) -> BeaverTriple:
    if sorted(perm) != list(range(t.lanes)):
        raise ParamError("not a permutation of the triple array")
    return _take_idx(t, perm)


def _concat_triples(p: Protocol, ts: Sequence[BeaverTriple]) -> BeaverTriple:
    ts = [t for t in ts if t.lanes]
    return BeaverTriple(p.concat([t.a for t in ts]), p.concat([t.b for t in ts]), p.concat([t.c for t in ts]))


def _open_and_verify(proto: Protocol, ts: Sequence[BeaverTriple]) -> None:
    ts = [t for t in ts if t.lanes]
    if not ts:
        return
    t = _concat_triples(proto, ts)
    a, b, c = proto.open_many([t.a, t.b, t.c])
    if not proto.dom.equal(proto.dom.mul(a, b), c):
        raise Abort("opened triple is malformed")
    proto.s.counters.aux_consumed += t.lanes


def furukawa_triple_gen(count: int, proto: Protocol, B: int = 3, C: int = 3, L: int = 1,
                        generate=None) -> BeaverTriple:
    """Binary AND triples: generated with the semi-honest AND, then bucketed and sacrificed."""
    if proto.n != 3 or not proto.dom.binary:
        raise ParamError("binary triples need a 3-party binary protocol")
    if count == 0:
        z = proto.zeros(0)
        return BeaverTriple(z, z, z)
    return bucket_cut_and_choose(count, B, C, L, proto, generate)


# -- triple sources for online multiplication

def validated_source(validation: str):
    """Triple source that checks dealer triples before handing them out."""

    def source(proto: Protocol, lanes: int):
        with proto.offline():
            target = dealer_triples(proto, lanes)
            if validation == "sacrifice":
                pairwise_sacrifice(target, dealer_triples(proto, lanes))
            elif validation == "batch_poly":
                batch_poly_check(target)
            elif validation == "ring_check":
                a = proto.deal(proto.dom.rand(proto.s.dealer, lanes), lanes)
                # dealer-side c = a*y for the auxiliary that shares y
                y_plain = _dealer_view(target.b)
                c = proto.deal(proto.dom.mul(_dealer_view(a), y_plain), lanes)
                if any(ring_check_values(target, a, c)):
                    raise Abort("ring triple check failed")
            elif validation == "bucket_cnc":
                target = bucket_cut_and_choose(lanes, 3, 3, 1, proto, lambda p, n: dealer_triples(p, n))
        return target.astuple()

    return source


def _dealer_view(x: SVec):
    """Plain value of a dealer-made sharing (the dealer knows what it dealt)."""
    proto = x.proto
    if proto.scheme in (Scheme.ADDITIVE, Scheme.XOR):
        acc = proto.dom.zeros(x.lanes)
        for part in x.parts:
            acc = proto.dom.add(acc, part[0])
        return acc
    raise DomainMismatch("dealer view only for additive sharings")


def ot_source(proto: Protocol, lanes: int):
    with proto.offline():
        return gen_triples_ot(proto, lanes).astuple()


# -- daBits and edaBits

def _spot_check(arith: Protocol, binary: Protocol, arith_vec: SVec, bits: list[SVec], sample: int) -> None:
    """Open the last ``sample`` lanes in both worlds and compare."""
    lanes = arith_vec.lanes
    start = lanes - sample
    a = arith.reveal(arith.take(arith_vec, start, sample))
    planes = binary.open_many([binary.take(b, start, sample) for b in bits])
    vals = from_planes(planes, sample)
    # the binary side may be truncated to fewer bits than the arithmetic sum
    mod = min(arith.out_modulus, 1 << len(bits))
    if any((x - y) % mod for x, y in zip(a, vals)):
        raise Abort("daBit/edaBit spot check failed")


def _input_all(proto: Protocol, vals: list[list[int]]) -> list[SVec]:
    return [proto.input(i, v) for i, v in enumerate(vals)]


def gen_dabits(count: int, arith: Protocol, binary: Protocol, check: bool | None = None,
               sample: int = 8) -> DaBit:
    """Each party inputs a random bit in both worlds; arithmetic XOR via products.

    With ``check`` (default: malicious protocols) extra daBits are generated
    and ``sample`` of them opened and compared.
    """
    check = arith.malicious if check is None else check
    extra = min(sample, max(1, count)) if check else 0
    lanes = count + extra
    if lanes == 0:
        return DaBit(arith.zeros(0), binary.zeros(0))
    s = arith.s
    with arith.offline(), binary.offline():
        bits = [[b for b in s.party_prg[i].fork("dabit").randbelow_many(2, lanes)] for i in range(arith.n)]
        for i in range(arith.n):
            s.party_prg[i] = s.party_prg[i].fork("next")
        ar = _input_all(arith, bits)
        bi = _input_all(binary, bits)
        bo = BitOps(arith)
        acc = ar[0]
        for v in ar[1:]:
            (acc,) = bo.xor_many([(acc, v)])
        bacc = binary.sum(bi)
        if extra:
            _spot_check(arith, binary, acc, [bacc], extra)
    s.counters.dabits += count
    return DaBit(arith.take(acc, 0, count), binary.take(bacc, 0, count))


def gen_random_bits(count: int, arith: Protocol) -> SVec:
    """Arithmetic-only shared random bits (XOR of one input bit per party)."""
    s = arith.s
    with arith.offline():
        bits = [s.party_prg[i].fork("rbit").randbelow_many(2, count) for i in range(arith.n)]
        for i in range(arith.n):
            s.party_prg[i] = s.party_prg[i].fork("next")
        ar = _input_all(arith, bits)
        bo = BitOps(arith)
        acc = ar[0]
        for v in ar[1:]:
            (acc,) = bo.xor_many([(acc, v)])
    return acc


def edabit_width(m: int, n: int, arith: Protocol) -> int:
    """Bits of the sum of n m-bit inputs (capped at k for rings, where the sum wraps)."""
    w = m + math.ceil(math.log2(n))
    if not arith.dom.is_field:
        w = min(w, arith.dom.params.k)
    return w


def gen_edabits(count: int, m: int, arith: Protocol, binary: Protocol, check: bool | None = None,
                sample: int = 8, width: int | None = None) -> EdaBit:
    """Each party inputs a random m-bit value arithmetically and bitwise.

    The arithmetic side sums locally; the binary side adds the n inputs with a
    carry-save tree, so the result has ``edabit_width`` bits and equals the
    arithmetic sum exactly. A smaller ``width`` keeps only the sum mod 2^width,
    which is all a bounded decomposition needs.
    """
    dom = arith.dom
    if m > (dom.params.bits if dom.is_field else dom.params.k):
        raise ParamError("m exceeds the bit length of the modulus")
    n = arith.n
    w = edabit_width(m, n, arith)
    if width is not None:
        w = min(w, width)
    if dom.is_field and n << m >= dom.modulus:
        raise ParamError("sum of party inputs could wrap mod p; use dealer edaBits")
    check = arith.malicious if check is None else check
    extra = min(sample, max(1, count)) if check else 0
    lanes = count + extra
    s = arith.s
    with arith.offline(), binary.offline():
        vals = [s.party_prg[i].fork("edabit").randbelow_many(1 << m, lanes) for i in range(n)]
        for i in range(n):
            s.party_prg[i] = s.party_prg[i].fork("next")
        ar = _input_all(arith, vals)
        r = arith.sum(ar)
        rows = []
        for i in range(n):
            planes = to_planes(vals[i], m)
            flat = []
            for pl in planes:
                flat += binary.dom.to_ints(pl, lanes)
            sv = binary.input(i, flat)
            row = binary.split(sv, [lanes] * m)
            rows.append((row + [binary.zeros(lanes)] * (w - m))[:w])
        bits = sum_rows(BitOps(binary), rows)
        if extra:
            _spot_check(arith, binary, r, bits, extra)
    s.counters.edabits += count
    return EdaBit(arith.take(r, 0, count), [binary.take(b, 0, count) for b in bits])


def dealer_dabits(count: int, arith: Protocol, binary: Protocol) -> DaBit:
    bits = arith.s.dealer.randbelow_many(2, count)
    arith.s.counters.dabits += count
    return DaBit(arith.deal_ints(bits), binary.deal_ints(bits))


def dealer_edabits(count: int, m: int, arith: Protocol, binary: Protocol, bound: int | None = None) -> EdaBit:
    bound = bound or (1 << m)
    vals = arith.s.dealer.randbelow_many(bound, count)
    planes = to_planes(vals, m)
    bits = [binary.deal(pl, count) for pl in planes]
    arith.s.counters.edabits += count
    return EdaBit(arith.deal_ints(vals), bits)


# -- triple pool files

_MAGIC = b"MPCT"


def save_triples(path: str | Path, triples: Sequence[Triple], authenticated: bool = False) -> None:
    """Header (magic, JSON length, JSON params/count/flags) then fixed-width records."""
    if not triples:
        raise ParamError("nothing to save")
    params = triples[0].params
    n = len(triples[0].a)
    header = json.dumps({"kind": params.kind.value, "p": params.modulus_p, "k": params.k, "s": params.s,
                         "extended": params.extended, "parties": n, "count": len(triples),
                         "authenticated": authenticated, "width": params.byte_width, "version": 1}).encode()
    w = params.byte_width
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack(">I", len(header)) + header)
        for t in triples:
            for group in (t.a, t.b, t.c):
                for sh in group:
                    fh.write(int(sh.payload[0]).to_bytes(w, "little"))


def load_triples(path: str | Path) -> tuple[dict, list[Triple]]:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ParamError("not a triple pool file")
    (hlen,) = struct.unpack(">I", data[4:8])
    meta = json.loads(data[8:8 + hlen])
    kind = Kind(meta["kind"])
    params = DomainParams(kind, modulus_p=meta["p"], k=meta["k"], s=meta["s"], extended=meta["extended"])
    w, n = meta["width"], meta["parties"]
    body = data[8 + hlen:]
    rec = 3 * n * w
    if len(body) != rec * meta["count"]:
        raise ParamError("truncated triple pool")
    out = []
    for i in range(meta["count"]):
        limbs = [int.from_bytes(body[i * rec + j * w:i * rec + (j + 1) * w], "little") for j in range(3 * n)]
        groups = [tuple(Share(Scheme.ADDITIVE, p, (limbs[g * n + p],), params) for p in range(n)) for g in range(3)]
        out.append(Triple(*groups, params))
    return meta, out


def exhaustive_permutations(N: int, B: int, C: int, L: int):
    """Every admissible ``perms`` argument of bucket_cut_and_choose (tiny parameters only)."""
    X = N // L + C
    blocks = [[list(sub * X + i for i in p) for p in itertools.permutations(range(X))] for sub in range(L)]
    arrays = [sum(choice, []) for choice in itertools.product(*blocks)]
    for combo in itertools.product(arrays, repeat=B - 1):
        yield [list(a) for a in combo]
