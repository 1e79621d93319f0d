"""Moving secrets between arithmetic and binary sharings.

Local conversion works on the replicated 2-of-3 layout only: each additive
summand is known in the clear to two parties, so it can be re-shared as a
binary value with no communication; only the carries of adding the three
summands cost ANDs. daBit/edaBit conversion opens a masked value instead and
works for any family, including authenticated ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .circuits import BitOps, add_pub_shared, carry_save, ripple_add, sub_pub_shared
from .domains import from_planes, to_planes
from .errors import InsufficientRandomness, ParamError, SchemeMismatch
from .protocols import Rep3Protocol, SVec
from .transport import MsgType


@dataclass
class DaBit:
    """``lanes`` random bits shared in both worlds."""

    arith: SVec
    binary: SVec


@dataclass
class EdaBit:
    """Random r shared arithmetically plus its little-endian bits in binary."""

    arith: SVec
    bits: list[SVec]

    @property
    def m(self) -> int:
        return len(self.bits)


def _require_local(arith, binary) -> None:
    if not isinstance(arith, Rep3Protocol) or arith.dom.binary or arith.authenticated or arith.malicious:
        raise SchemeMismatch("local conversion needs semi-honest replicated 2-of-3 ring shares")
    if not isinstance(binary, Rep3Protocol) or not binary.dom.binary:
        raise SchemeMismatch("local conversion targets replicated 2-of-3 binary shares")
    if arith.dom.is_field:
        raise SchemeMismatch("local conversion is defined over Z_2^k")


def _summand_sharing(proto, j: int, vec, lanes: int) -> SVec:
    """Sharing whose summand j is ``vec`` and whose other summands are zero."""
    z = proto.dom.zeros(lanes)
    parts = [(vec if p == j else z, vec if (p + 1) % 3 == j else z) for p in range(3)]
    return SVec(proto, lanes, parts)


def _local_bits(binary, x: SVec, m: int) -> list[list[SVec]]:
    lanes = x.lanes
    out = []
    for j in range(3):
        planes = to_planes(x.parts[j][0], m)
        out.append([_summand_sharing(binary, j, pl, lanes) for pl in planes])
    return out


def a2b_local_csa(x: SVec, binary, m: int) -> tuple[list[SVec], list[SVec]]:
    """Two binary addends whose sum is x mod 2^m (one AND round)."""
    _require_local(x.proto, binary)
    x0, x1, x2 = _local_bits(binary, x, m)
    return carry_save(BitOps(binary), x0, x1, x2)


def a2b_local(x: SVec, binary, m: int | None = None) -> list[SVec]:
    """Bits 0..m-1 of a replicated ring secret; communication only for carries."""
    arith = x.proto
    _require_local(arith, binary)
    m = m or arith.dom.params.k
    if m > arith.dom.params.bits:
        raise ParamError("more bits than the ring holds")
    s, c = a2b_local_csa(x, binary, m)
    return ripple_add(BitOps(binary), s, c)


def b2a_local(bits: Sequence[SVec], arith) -> SVec:
    """Arithmetic sharing of sum 2^i b_i.

    Two summands y0, y1 come from keys of their holder pairs; the binary circuit
    computes z = x - y0 - y1 and reveals it to the two holders of summand 2.
    """
    binary = bits[0].proto
    _require_local(arith, binary)
    k = arith.dom.params.bits
    lanes = bits[0].lanes
    bits = list(bits) + [binary.zeros(lanes)] * (k - len(bits))
    bits = bits[:k]
    mod = arith.dom.modulus
    s = arith.s
    y0 = arith.dom.rand(s.key({0, 2}, "b2a"), lanes)
    y1 = arith.dom.rand(s.key({0, 1}, "b2a"), lanes)
    n0 = [_summand_sharing(binary, 0, pl, lanes) for pl in to_planes([(-int(v)) % mod for v in y0], k)]
    n1 = [_summand_sharing(binary, 1, pl, lanes) for pl in to_planes([(-int(v)) % mod for v in y1], k)]
    bo = BitOps(binary)
    sm, cr = carry_save(bo, bits, n0, n1)
    z = ripple_add(bo, sm, cr)
    # reveal z to parties 1 and 2; each lacks one binary summand
    need = {2: (1, 0), 1: (0, 0)}  # receiver: (sender, component)
    for dst, (src, comp) in need.items():
        binary.net.send(src, dst, MsgType.OPEN, binary.enc([b.parts[src][comp] for b in z], lanes))
    views = {}
    for dst, (src, _) in need.items():
        missing = binary.dec(binary.net.recv_payload(src, dst), k, lanes)
        views[dst] = [b.parts[dst][0] ^ b.parts[dst][1] ^ mv for b, mv in zip(z, missing)]
    binary.net.barrier()
    z_vals = [arith.dom.vec(from_planes(views[dst], lanes)) for dst in (1, 2)]
    summands = [y0, y1, z_vals[1]]
    parts = [(summands[p], summands[(p + 1) % 3]) for p in range(3)]
    parts[1] = (y1, z_vals[0])
    return SVec(arith, lanes, parts)


def bit2a_local(bits: Sequence[SVec], arith) -> list[SVec]:
    """Single bits to the ring: b = b0 ^ b1 ^ b2 evaluated arithmetically, two rounds."""
    if not bits:
        return []
    binary = bits[0].proto
    _require_local(arith, binary)
    lanes = [b.lanes for b in bits]
    cat = binary.concat(list(bits))
    total = cat.lanes
    a = [_summand_sharing(arith, j, arith.dom.vec(binary.dom.to_ints(cat.parts[j][0], total)), total)
         for j in range(3)]
    bo = BitOps(arith)
    (t,) = bo.xor_many([(a[0], a[1])])
    (b,) = bo.xor_many([(t, a[2])])
    return arith.split(b, lanes)


def _open_diff(x: SVec, r: SVec):
    return x.proto.open(x.proto.sub(x, r))


def dabit_convert(x, dabits: Sequence[DaBit], direction: str = "A2B"):
    """A2B: open c = x - r with r = sum 2^i r_i and add c back in binary.

    B2A: ``x`` is a list of binary bits; each is opened XOR its daBit and
    mapped back with c + r - 2cr.
    """
    if direction == "A2B":
        arith = x.proto
        m = arith.dom.params.bits if arith.dom.is_field else (arith.dom.params.k)
        if len(dabits) < m:
            raise InsufficientRandomness(f"need {m} daBits, got {len(dabits)}")
        dabits = dabits[:m]
        r = arith.sum([arith.scale(d.arith, 1 << i) for i, d in enumerate(dabits)])
        return _add_back(x, r, [d.binary for d in dabits])
    if direction == "B2A":
        bits = list(x)
        if len(dabits) < len(bits):
            raise InsufficientRandomness(f"need {len(bits)} daBits, got {len(dabits)}")
        arith = dabits[0].arith.proto
        return arith.sum([arith.scale(v, 1 << i) for i, v in enumerate(bits_to_arith(bits, dabits))])
    raise ParamError(f"unknown direction {direction!r}")


def bits_to_arith(bits: Sequence[SVec], dabits: Sequence[DaBit]) -> list[SVec]:
    """Each binary bit to the arithmetic side with one daBit (one opening round)."""
    if not bits:
        return []
    binary = bits[0].proto
    arith = dabits[0].arith.proto
    masked = [binary.add(b, d.binary) for b, d in zip(bits, dabits)]
    opened = binary.open_many(masked)
    out = []
    for c, d in zip(opened, dabits):
        cv = arith.dom.vec(binary.dom.to_ints(c, d.arith.lanes)) if binary.dom.binary else c
        # c ^ r = c + r - 2cr with c public
        factor = arith.dom.sub(arith.dom.full(d.arith.lanes, 1), arith.dom.scale(cv, 2))
        out.append(arith.add_public(arith.mul_public(d.arith, factor), cv))
    return out


def edabit_convert(x: SVec, edabit: EdaBit) -> list[SVec]:
    """A2B with one edaBit: one arithmetic opening plus a binary adder."""
    arith = x.proto
    need = arith.dom.params.bits if arith.dom.is_field else arith.dom.params.k
    if edabit.m < need:
        raise InsufficientRandomness(f"edaBit has {edabit.m} bits, need {need}")
    return _add_back(x, edabit.arith, edabit.bits[:need])


def _add_back(x: SVec, r: SVec, rbits: list[SVec]) -> list[SVec]:
    arith = x.proto
    bo = BitOps(rbits[0].proto)
    lanes = x.lanes
    m = len(rbits)
    c = arith.dom.to_ints(_open_diff(x, r), lanes)
    if not arith.dom.is_field:
        planes = to_planes(c, m)
        return add_pub_shared(bo, [bo.plane(pl, lanes) for pl in planes], rbits)
    return field_add_mod(bo, c, rbits, arith.dom.modulus)


def field_add_mod(bo: BitOps, c: list[int], rbits: list[SVec], p: int) -> list[SVec]:
    """Bits of (c + r) mod p for public c < p and shared r <= p (m = bit length of p).

    s = c + r on m+1 bits; t = s + 2^{m+1} - p, whose carry-out is [s >= p]; mux.
    """
    m = len(rbits)
    lanes = rbits[0].lanes
    zero = bo.p.zeros(lanes)
    cpl = to_planes(c, m + 1)
    s = add_pub_shared(bo, [bo.plane(pl, lanes) for pl in cpl], list(rbits) + [zero])
    off = (1 << (m + 1)) - p
    opl = to_planes([off] * lanes, m + 1)
    t, ge = add_pub_shared(bo, [bo.plane(pl, lanes) for pl in opl], s, carry_out=True)
    return bo.mux_many([(ge, s[i], t[i]) for i in range(m)])


def decompose_bounded(x: SVec, m: int, r_bits: Sequence[SVec], r_low: SVec, r_high: SVec) -> list[SVec]:
    """Low m bits of x, for x known to fit in m bits.

    Opens c = x + r_low + 2^m r_high and computes (c - r_low) mod 2^m in the
    binary circuit; the high mask never enters the circuit.
    """
    arith = x.proto
    lanes = x.lanes
    if len(r_bits) < m:
        raise InsufficientRandomness("mask has too few bits")
    masked = arith.add(arith.add(x, r_low), arith.scale(r_high, 1 << m))
    c = arith.dom.to_ints(arith.open(masked), lanes)
    bo = BitOps(r_bits[0].proto)
    planes = to_planes(c, m)
    return sub_pub_shared(bo, [bo.plane(pl, lanes) for pl in planes], list(r_bits[:m]))
