"""Single-secret sharing schemes: additive, XOR, Araki 2-of-3, Shamir, 3-of-4 replicated.

These are the dealer-side and reconstruction-side primitives. Protocol
execution over vectors of secrets lives in :mod:`mpcforge.engine`.

Rep3 index convention (0-based): party ``i`` holds ``(v_i, a_i)`` with
``a_i = v_{(i-1) mod 3} - x`` (XOR instead of minus in the binary domain),
so parties ``i`` and ``i+1`` recover ``x = v_i - a_{i+1}``.

Rep4: ``x = x_0 + x_1 + x_2 + x_3`` and party ``i`` holds every summand except ``x_i``.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Sequence

from .algebra import PRG, DomainElement, DomainParams, Kind, horner, interpolate_ints
from .errors import (DomainMismatch, InconsistentReplicas, InsufficientShares, ParamError,
                     SchemeMismatch)


class Scheme(enum.IntEnum):
    ADDITIVE = 1
    XOR = 2
    REP3 = 3
    SHAMIR = 4
    REP4 = 5


@dataclass(frozen=True)
class Share:
    scheme: Scheme
    party_id: int
    payload: tuple
    params: DomainParams
    threshold: int | None = None  # Shamir: shares needed to reconstruct
    nbits: int | None = None  # XOR: bit-string length

    def __post_init__(self):
        if self.scheme is Scheme.SHAMIR and self.payload[0] % self.params.modulus == 0:
            raise ParamError("Shamir evaluation point must be non-zero")


def _rand(prg: PRG, params: DomainParams, n: int) -> list[int]:
    return prg.randbelow_many(params.modulus, n)


def share_additive(x: DomainElement, n: int, prg: PRG) -> list[Share]:
    if n < 2:
        raise ParamError("additive sharing needs n >= 2")
    m = x.params.modulus
    parts = _rand(prg, x.params, n - 1)
    last = (x.value - sum(parts)) % m
    return [Share(Scheme.ADDITIVE, i, (v,), x.params) for i, v in enumerate(parts + [last])]


def share_xor(x: int, n: int, prg: PRG, nbits: int | None = None) -> list[Share]:
    if n < 2:
        raise ParamError("XOR sharing needs n >= 2")
    nbits = nbits or max(1, x.bit_length())
    if x >> nbits:
        raise ParamError(f"{x} wider than {nbits} bits")
    parts = [prg.randbits(nbits) for _ in range(n - 1)]
    last = x
    for p in parts:
        last ^= p
    params = DomainParams.binary()
    return [Share(Scheme.XOR, i, (v,), params, nbits=nbits) for i, v in enumerate(parts + [last])]


def share_rep3(x: DomainElement, prg: PRG) -> list[Share]:
    params = x.params
    v = _rand(prg, params, 3)
    m = params.modulus
    out = []
    for i in range(3):
        prev = v[(i - 1) % 3]
        a = prev ^ x.value if params.kind is Kind.BINARY else (prev - x.value) % m
        out.append(Share(Scheme.REP3, i, (v[i], a), params))
    return out


def share_shamir(x: DomainElement, n: int, t: int, prg: PRG) -> list[Share]:
    """Degree t-1 polynomial; any t of the n shares recover x. Points are z_i = i+1."""
    params = x.params
    if params.kind is not Kind.PRIME_FIELD:
        raise DomainMismatch("Shamir sharing needs a prime field")
    p = params.modulus
    if not 1 <= t <= n or n >= p:
        raise ParamError(f"need 1 <= t <= n < p, got t={t} n={n} p={p}")
    coeffs = [x.value] + _rand(prg, params, t - 1)
    return [Share(Scheme.SHAMIR, i, (i + 1, horner(coeffs, i + 1, p)), params, threshold=t)
            for i in range(n)]


def share_rep4(x: DomainElement, prg: PRG) -> list[Share]:
    m = x.params.modulus
    s = _rand(prg, x.params, 3)
    s.append((x.value - sum(s)) % m)
    return [Share(Scheme.REP4, i, tuple(None if j == i else s[j] for j in range(4)), x.params)
            for i in range(4)]


def _common(shares: Sequence[Share]) -> tuple[Scheme, DomainParams]:
    if not shares:
        raise InsufficientShares("no shares given")
    scheme, params = shares[0].scheme, shares[0].params
    for sh in shares:
        if sh.scheme != scheme:
            raise SchemeMismatch("mixed sharing schemes")
        if sh.params != params:
            raise DomainMismatch("mixed domains")
    if len({sh.party_id for sh in shares}) != len(shares):
        raise InsufficientShares("duplicate party shares")
    return scheme, params


def reconstruct(shares: Sequence[Share], n: int | None = None) -> DomainElement | int:
    """Recover the secret. XOR sharings return a plain int (a bit string)."""
    scheme, params = _common(shares)
    m = params.modulus
    if scheme in (Scheme.ADDITIVE, Scheme.XOR):
        if n is not None and len(shares) < n:
            raise InsufficientShares(f"additive/XOR needs all {n} shares")
        if scheme is Scheme.XOR:
            acc = 0
            for sh in shares:
                acc ^= sh.payload[0]
            return acc
        return DomainElement(sum(sh.payload[0] for sh in shares) % m, params)
    if scheme is Scheme.REP3:
        by_id = {sh.party_id: sh for sh in shares}
        estimates = []
        for i in range(3):
            j = (i + 1) % 3
            if i in by_id and j in by_id:
                vi, aj = by_id[i].payload[0], by_id[j].payload[1]
                estimates.append(vi ^ aj if params.kind is Kind.BINARY else (vi - aj) % m)
        if not estimates:
            raise InsufficientShares("Rep3 needs two parties")
        if len(set(estimates)) > 1:
            raise InconsistentReplicas(f"Rep3 replicas disagree: {estimates}")
        return DomainElement(estimates[0], params)
    if scheme is Scheme.SHAMIR:
        t = shares[0].threshold or len(shares)
        if len(shares) < t:
            raise InsufficientShares(f"Shamir needs {t} shares, got {len(shares)}")
        xs = [sh.payload[0] for sh in shares]
        ys = [sh.payload[1] for sh in shares]
        coeffs = interpolate_ints(xs, ys, m)
        if any(coeffs[t:]):
            raise InconsistentReplicas("Shamir shares do not lie on a degree t-1 polynomial")
        return DomainElement(coeffs[0], params)
    if scheme is Scheme.REP4:
        summands: list[set] = [set() for _ in range(4)]
        for sh in shares:
            for j, v in enumerate(sh.payload):
                if v is not None:
                    summands[j].add(v)
        if any(not s for s in summands):
            raise InsufficientShares("Rep4 shares do not cover all four summands")
        if any(len(s) > 1 for s in summands):
            raise InconsistentReplicas("Rep4 summand copies disagree")
        return DomainElement(sum(next(iter(s)) for s in summands) % m, params)
    raise SchemeMismatch(f"unknown scheme {scheme}")


def local_linear(c0: DomainElement | int, terms: Sequence[tuple[int, Share]]) -> Share:
    """One party's share of ``c0 + sum(coeff * secret)``; purely local."""
    if not terms:
        raise ParamError("need at least one term")
    scheme, params = _common_party([sh for _, sh in terms])
    pid = terms[0][1].party_id
    c0v = c0.value if isinstance(c0, DomainElement) else c0
    if isinstance(c0, DomainElement) and c0.params != params:
        raise DomainMismatch("constant outside the share domain")
    m = params.modulus
    binary = params.kind is Kind.BINARY or scheme is Scheme.XOR

    def combine(index: int) -> int:
        if binary:
            acc = 0
            for c, sh in terms:
                if c & 1:
                    acc ^= sh.payload[index]
            return acc
        return sum(c * sh.payload[index] for c, sh in terms) % m

    first = terms[0][1]
    if scheme in (Scheme.ADDITIVE, Scheme.XOR):
        v = combine(0)
        if pid == 0:
            v = v ^ c0v if binary else (v + c0v) % m
        return Share(scheme, pid, (v,), params, nbits=first.nbits)
    if scheme is Scheme.REP3:
        v, a = combine(0), combine(1)
        a = a ^ c0v if binary else (a - c0v) % m
        return Share(scheme, pid, (v, a), params)
    if scheme is Scheme.SHAMIR:
        y = (combine(1) + c0v) % m
        return Share(scheme, pid, (first.payload[0], y), params, threshold=first.threshold)
    if scheme is Scheme.REP4:
        vals = []
        for j in range(4):
            if j == pid:
                vals.append(None)
            else:
                v = sum(c * sh.payload[j] for c, sh in terms) % m
                if j == 0:
                    v = (v + c0v) % m
                vals.append(v)
        return Share(scheme, pid, tuple(vals), params)
    raise SchemeMismatch(f"unknown scheme {scheme}")


def _common_party(shares: Sequence[Share]) -> tuple[Scheme, DomainParams]:
    scheme, params = shares[0].scheme, shares[0].params
    for sh in shares:
        if sh.scheme != scheme:
            raise SchemeMismatch("mixed sharing schemes")
        if sh.params != params:
            raise DomainMismatch("mixed domains")
        if sh.party_id != shares[0].party_id:
            raise ParamError("local_linear combines one party's shares")
    return scheme, params


# -- wire format: scheme tag (1 byte), party id (2 bytes, big-endian), payload limbs LE

def _width(share: Share) -> int:
    if share.scheme is Scheme.XOR:
        return max(1, ((share.nbits or 1) + 7) // 8)
    return share.params.byte_width


def share_to_bytes(share: Share) -> bytes:
    w = _width(share)
    out = bytearray(struct.pack(">BH", int(share.scheme), share.party_id))
    for v in share.payload:
        if v is None:
            continue
        out += int(v).to_bytes(w, "little")
    return bytes(out)


def share_from_bytes(data: bytes, params: DomainParams, threshold: int | None = None) -> Share:
    tag, pid = struct.unpack(">BH", data[:3])
    scheme = Scheme(tag)
    body = data[3:]
    if scheme is Scheme.XOR:
        return Share(scheme, pid, (int.from_bytes(body, "little"),), DomainParams.binary(),
                     nbits=8 * len(body))
    w = params.byte_width
    limbs = [int.from_bytes(body[i:i + w], "little") for i in range(0, len(body), w)]
    if scheme is Scheme.REP4:
        limbs.insert(pid, None)
    return Share(scheme, pid, tuple(limbs), params, threshold=threshold)
