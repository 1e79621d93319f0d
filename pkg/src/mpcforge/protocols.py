"""Vectorised secret-sharing protocols.

An ``SVec`` is a vector of ``lanes`` secrets shared under one protocol.
``parts[p]`` is party p's local state, a tuple of domain vectors whose
meaning depends on the scheme:

* additive / XOR: ``(x_p,)``
* replicated 2-of-3: ``(x_p, x_{p+1})`` of ``x = x_0 + x_1 + x_2``
* Shamir: ``(f(p+1),)`` for a degree-t polynomial f with f(0) = x
* replicated 3-of-4: summands ``x_0..x_3`` with ``None`` at index p
* Furukawa binary: ``(t_p, s_p)`` with XOR of the t's zero and ``s_p = t_{p-1} ^ x``

Linear operations touch only local state. Every interactive step serialises
the values that cross a party boundary and moves them through the session's
network, so byte and round counters are those of a real run.
"""

from __future__ import annotations

import hashlib
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Sequence

from .algebra import lagrange_at
from .errors import Abort, DomainMismatch, InconsistentBroadcast, InsufficientRandomness, ParamError
from .sharing import Scheme
from .transport import MsgType


@dataclass
class SVec:
    proto: Any
    lanes: int
    parts: list
    mac: list | None = None

    def __len__(self) -> int:
        return self.lanes


def _digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()[:16]


class Protocol:
    scheme: Scheme
    authenticated = False
    uses_triples = False

    def __init__(self, session, dom, malicious: bool = False, out_modulus: int | None = None):
        self.s = session
        self.net = session.net
        self.n = session.n
        self.dom = dom
        self.malicious = malicious
        self.out_modulus = out_modulus or dom.modulus
        self.triple_source = None
        self.log_products = False
        self.phase = "online"

    # -- construction
    def pub(self, ints):
        return self.dom.vec(ints)

    def pub_full(self, lanes: int, value: int):
        return self.dom.full(lanes, value)

    def _check(self, *xs: SVec) -> None:
        for x in xs:
            if x.proto is not self:
                raise DomainMismatch("operands belong to different protocol instances")
        if len({x.lanes for x in xs}) > 1:
            raise ParamError(f"lane mismatch: {[x.lanes for x in xs]}")

    def _lin(self, f, *xs: SVec) -> SVec:
        self._check(*xs)
        parts = []
        for p in range(self.n):
            comps = []
            for c in range(len(xs[0].parts[p])):
                vals = [x.parts[p][c] for x in xs]
                comps.append(None if vals[0] is None else f(*vals))
            parts.append(tuple(comps))
        mac = None
        if xs[0].mac is not None:
            mac = [f(*[x.mac[p] for x in xs]) for p in range(self.n)]
        return SVec(self, xs[0].lanes, parts, mac)

    # -- local linear operations
    def add(self, x: SVec, y: SVec) -> SVec:
        return self._lin(self.dom.add, x, y)

    def sub(self, x: SVec, y: SVec) -> SVec:
        return self._lin(self.dom.sub, x, y)

    def neg(self, x: SVec) -> SVec:
        return self._lin(self.dom.neg, x)

    def scale(self, x: SVec, c: int) -> SVec:
        return self._lin(lambda v: self.dom.scale(v, c), x)

    def mul_public(self, x: SVec, c) -> SVec:
        return self._lin(lambda v: self.dom.mul(v, c), x)

    def add_public(self, x: SVec, c) -> SVec:
        raise NotImplementedError

    def sub_public(self, x: SVec, c) -> SVec:
        return self.add_public(x, self.dom.neg(c))

    def rsub_public(self, c, x: SVec) -> SVec:
        """c - x"""
        return self.add_public(self.neg(x), c)

    def sum(self, xs: Sequence[SVec]) -> SVec:
        acc = xs[0]
        for x in xs[1:]:
            acc = self.add(acc, x)
        return acc

    def constant(self, c, lanes: int) -> SVec:
        return self.add_public(self.zeros(lanes), c)

    def zeros(self, lanes: int) -> SVec:
        z = self.dom.zeros(lanes)
        parts = [tuple(None if comp is None else z for comp in self._layout(p)) for p in range(self.n)]
        mac = [z for _ in range(self.n)] if self.authenticated else None
        return SVec(self, lanes, parts, mac)

    def _layout(self, p: int) -> tuple:
        return (0,)

    def take(self, x: SVec, start: int, count: int) -> SVec:
        if start < 0 or start + count > x.lanes:
            raise ParamError("slice out of range")
        out = self._lin(lambda v: self.dom.take(v, start, count), x)
        out.lanes = count
        return out

    def concat(self, xs: Sequence[SVec]) -> SVec:
        if len(xs) == 1:
            return xs[0]
        for x in xs:
            if x.proto is not self:
                raise DomainMismatch("operands belong to different protocol instances")
        lengths = [x.lanes for x in xs]
        parts = []
        for p in range(self.n):
            comps = []
            for c in range(len(xs[0].parts[p])):
                vals = [x.parts[p][c] for x in xs]
                comps.append(None if vals[0] is None else self.dom.concat(vals, lengths))
            parts.append(tuple(comps))
        mac = None
        if xs[0].mac is not None:
            mac = [self.dom.concat([x.mac[p] for x in xs], lengths) for p in range(self.n)]
        return SVec(self, sum(lengths), parts, mac)

    def gather(self, x: SVec, idx: Sequence[int]) -> SVec:
        """Lanes reordered or repeated by a public index list."""
        idx = list(idx)
        if any(i < 0 or i >= x.lanes for i in idx):
            raise ParamError("gather index out of range")
        out = self._lin(lambda v: self.dom.gather(v, idx, x.lanes), x)
        out.lanes = len(idx)
        return out

    def prefix_sum(self, x: SVec) -> SVec:
        """Inclusive running sum over lanes (local)."""
        if self.dom.binary:
            raise DomainMismatch("prefix sums are arithmetic")
        return self._lin(lambda v: self.dom.prefix_sum(v, x.lanes), x)

    def lane_sum(self, x: SVec, groups: int = 1) -> SVec:
        if groups <= 0 or x.lanes % groups:
            raise ParamError("lanes must split evenly into groups")
        out = self._lin(lambda v: self.dom.lane_sum(v, x.lanes, groups), x)
        out.lanes = groups
        return out

    def split(self, x: SVec, lengths: Sequence[int]) -> list[SVec]:
        out, at = [], 0
        for n in lengths:
            out.append(self.take(x, at, n))
            at += n
        return out

    # -- wire helpers
    def enc(self, vecs: Sequence, lanes: int) -> bytes:
        return b"".join(self.dom.encode(v, lanes) for v in vecs)

    def dec(self, data: bytes, count: int, lanes: int) -> list:
        w = self.dom.nbytes(lanes)
        return [self.dom.decode(data[i * w:(i + 1) * w], lanes) for i in range(count)]

    # -- interactive operations
    def open_many(self, xs: Sequence[SVec]) -> list:
        if not xs:
            return []
        x = self.concat(list(xs))
        views = self._open(x)
        if self.authenticated:
            self.s.mac_openings.append((self, views, x))
        res = views[0]
        out, at = [], 0
        for v in xs:
            out.append(self.dom.take(res, at, v.lanes))
            at += v.lanes
        return out

    def open(self, x: SVec):
        return self.open_many([x])[0]

    def reveal(self, x: SVec) -> list[int]:
        """Open and map to plain ints (reduced to the output modulus)."""
        if self.out_modulus != self.dom.modulus:
            # hide the garbage above bit k of an extended-ring value
            x = self.add(x, self.scale(self.random(x.lanes), self.out_modulus))
        vals = self.dom.to_ints(self.open(x), x.lanes)
        return [v % self.out_modulus for v in vals]

    def mul_many(self, pairs: Sequence[tuple[SVec, SVec]]) -> list[SVec]:
        if not pairs:
            return []
        for x, y in pairs:
            self._check(x, y)
        lengths = [x.lanes for x, _ in pairs]
        x = self.concat([p[0] for p in pairs])
        y = self.concat([p[1] for p in pairs])
        z = self._mul(x, y)
        self.s.counters.mults += x.lanes
        if self.dom.binary:
            self.s.counters.and_gates += x.lanes
        if self.log_products and self.phase == "online":
            self.s.mult_log.append((self, x, y, z))
        return self.split(z, lengths)

    def mul(self, x: SVec, y: SVec) -> SVec:
        return self.mul_many([(x, y)])[0]

    @contextmanager
    def offline(self):
        prev, self.phase = self.phase, "offline"
        try:
            yield self
        finally:
            self.phase = prev

    # -- correlated randomness
    def deal(self, vec, lanes: int) -> SVec:
        """Trusted-dealer sharing of a known vector (offline material only)."""
        parts, mac = self._share_plain(vec, lanes, self.s.dealer)
        per_party = sum(self.dom.nbytes(lanes) for comp in parts[0] if comp is not None)
        self.net.deal(self.n * per_party * (2 if mac is not None else 1))
        return SVec(self, lanes, parts, mac)

    def deal_ints(self, ints) -> SVec:
        return self.deal(self.dom.vec(ints), len(ints))

    def triples(self, lanes: int) -> tuple[SVec, SVec, SVec]:
        if self.triple_source is not None:
            return self.triple_source(self, lanes)
        return self.dealer_triples(lanes)

    def dealer_triples(self, lanes: int) -> tuple[SVec, SVec, SVec]:
        a = self.dom.rand(self.s.dealer, lanes)
        b = self.dom.rand(self.s.dealer, lanes)
        c = self.dom.mul(a, b)
        return self.deal(a, lanes), self.deal(b, lanes), self.deal(c, lanes)

    def beaver(self, x: SVec, y: SVec, triple) -> SVec:
        """z = eps*y - delta*a + c with eps = a + x, delta = b + y opened together."""
        a, b, c = triple
        self._check(x, y, a, b, c)
        eps, delta = self.open_many([self.add(a, x), self.add(b, y)])
        return self.add(self.sub(self.mul_public(y, eps), self.mul_public(a, delta)), c)

    def _count_triples(self, lanes: int) -> None:
        if self.phase == "online":
            self.s.counters.triples_consumed += lanes
        else:
            self.s.counters.aux_consumed += lanes

    # hooks
    def _share_plain(self, vec, lanes, prg):
        raise NotImplementedError

    def _open(self, x: SVec) -> list:
        raise NotImplementedError

    def _mul(self, x: SVec, y: SVec) -> SVec:
        raise NotImplementedError

    def input(self, owner: int, ints) -> SVec:
        raise NotImplementedError

    def random(self, lanes: int) -> SVec:
        raise NotImplementedError


class AdditiveProtocol(Protocol):
    """n-party additive (XOR over bits) sharing with Beaver multiplication.

    With ``mac=True`` every value carries SPDZ tag shares ``m_p`` of ``alpha * x``.
    """

    scheme = Scheme.ADDITIVE
    uses_triples = True

    def __init__(self, session, dom, malicious=False, mac=False, out_modulus=None, alpha=None):
        super().__init__(session, dom, malicious, out_modulus)
        if dom.binary:
            self.scheme = Scheme.XOR
        self.authenticated = mac
        if mac:
            if dom.binary:
                raise DomainMismatch("MACs are defined for fields and rings only")
            if alpha is None:
                if dom.is_field:
                    alpha = session.dealer.randbelow(dom.modulus)
                else:
                    alpha = session.dealer.randbelow(1 << dom.params.s)
            self.alpha = alpha % dom.modulus
            keys = session.dealer.randbelow_many(dom.modulus, self.n - 1)
            self.alpha_shares = keys + [(self.alpha - sum(keys)) % dom.modulus]
            session.finalizers.append(self.mac_check)

    def _split(self, vec, lanes, prg):
        parts = [self.dom.rand(prg, lanes) for _ in range(self.n - 1)]
        last = vec
        for v in parts:
            last = self.dom.sub(last, v)
        return parts + [last]

    def _share_plain(self, vec, lanes, prg):
        parts = [(v,) for v in self._split(vec, lanes, prg)]
        mac = None
        if self.authenticated:
            mac = self._split(self.dom.scale(vec, self.alpha), lanes, prg)
        return parts, mac

    def add_public(self, x, c):
        parts = list(x.parts)
        parts[0] = (self.dom.add(parts[0][0], c),)
        mac = None
        if x.mac is not None:
            mac = [self.dom.add(m, self.dom.scale(c, a)) for m, a in zip(x.mac, self.alpha_shares)]
        return SVec(self, x.lanes, parts, mac)

    def _open(self, x):
        payloads = [self.dom.encode(x.parts[p][0], x.lanes) for p in range(self.n)]
        views = self.net.exchange_all(MsgType.OPEN, payloads, echo=self.malicious)
        out = []
        for p in range(self.n):
            acc = self.dom.zeros(x.lanes)
            for q in range(self.n):
                acc = self.dom.add(acc, self.dom.decode(views[p][q], x.lanes))
            out.append(acc)
        return out

    def _mul(self, x, y):
        triple = self.triples(x.lanes)
        if triple[0].lanes < x.lanes:
            raise InsufficientRandomness("not enough triples")
        self._count_triples(x.lanes)
        return self.beaver(x, y, triple)

    def input(self, owner, ints):
        lanes = len(ints)
        vec = self.dom.vec(ints)
        if not self.authenticated:
            parts = self._split(vec, lanes, self.s.party_prg[owner])
            for q in range(self.n):
                if q != owner:
                    self.net.send(owner, q, MsgType.INPUT, self.dom.encode(parts[q], lanes))
            got = [parts[q] if q == owner else self.dom.decode(self.net.recv_payload(owner, q), lanes)
                   for q in range(self.n)]
            self.net.barrier()
            # the owner keeps the summand that makes the total right
            return SVec(self, lanes, [(g,) for g in got])
        return self.secure_input(owner, vec, lanes)

    def secure_input(self, owner, vec, lanes):
        """Mask with an authenticated random r opened to the owner; broadcast w = x - r with echo."""
        r = self.random(lanes)
        for q in range(self.n):
            if q != owner:
                self.net.send(q, owner, MsgType.INPUT, self.dom.encode(r.parts[q][0], lanes))
        r_plain = r.parts[owner][0]
        for q in range(self.n):
            if q != owner:
                r_plain = self.dom.add(r_plain, self.dom.decode(self.net.recv_payload(q, owner), lanes))
        self.net.barrier()
        w = self.dom.sub(vec, r_plain)
        payload = self.dom.encode(w, lanes)
        self.net.broadcast(owner, MsgType.INPUT, payload)
        views = [payload if q == owner else self.net.recv_payload(owner, q) for q in range(self.n)]
        self.net.barrier()
        self.net.echo_check([_digest(v) for v in views])
        ws = [self.dom.decode(v, lanes) for v in views]
        parts = list(r.parts)
        parts[0] = (self.dom.add(parts[0][0], ws[0]),)
        mac = [self.dom.add(m, self.dom.scale(ws[p], self.alpha_shares[p])) for p, m in enumerate(r.mac)]
        return SVec(self, lanes, parts, mac)

    def random(self, lanes):
        if self.authenticated:
            return self.deal(self.dom.rand(self.s.dealer, lanes), lanes)
        return SVec(self, lanes, [(self.dom.rand(self.s.party_prg[p], lanes),) for p in range(self.n)])

    def mac_check(self):
        """Batched check over every opening since the last call (commit, then reveal)."""
        items = [(views, x) for proto, views, x in self.s.mac_openings if proto is self]
        self.s.mac_openings = [it for it in self.s.mac_openings if it[0] is not self]
        if not items:
            return True
        coins = self.s.joint_prg()
        sigma = [0] * self.n
        m = self.dom.modulus
        for views, x in items:
            r = coins.randbelow_many(m, x.lanes)
            for p in range(self.n):
                resid = self.dom.sub(x.mac[p], self.dom.scale(views[p], self.alpha_shares[p]))
                sigma[p] = (sigma[p] + sum(int(a) * b for a, b in zip(resid, r))) % m
        w = self.dom.width
        reveal = [v.to_bytes(w, "little") for v in sigma]
        commits = [hashlib.sha256(b).digest() for b in reveal]
        self.net.exchange_all(MsgType.COMMIT, commits)
        views = self.net.exchange_all(MsgType.CHECK, reveal)
        for p in range(self.n):
            total = 0
            for q in range(self.n):
                if hashlib.sha256(views[p][q]).digest() != commits[q]:
                    raise Abort("MAC check reveal does not match commitment")
                total += int.from_bytes(views[p][q], "little")
            if total % m:
                raise Abort("MAC check failed")
        return True


class Rep3Protocol(Protocol):
    """Replicated additive 2-of-3: party p holds summands p and p+1."""

    scheme = Scheme.REP3

    def __init__(self, session, dom, malicious=False, out_modulus=None):
        if session.n != 3:
            raise ParamError("replicated 2-of-3 needs exactly 3 parties")
        super().__init__(session, dom, malicious, out_modulus)

    def _layout(self, p):
        return (0, 0)

    def _from_summands(self, s):
        return [(s[p], s[(p + 1) % 3]) for p in range(3)]

    def _share_plain(self, vec, lanes, prg):
        s0, s1 = self.dom.rand(prg, lanes), self.dom.rand(prg, lanes)
        s2 = self.dom.sub(self.dom.sub(vec, s0), s1)
        return self._from_summands([s0, s1, s2]), None

    def add_public(self, x, c):
        parts = list(x.parts)
        parts[0] = (self.dom.add(parts[0][0], c), parts[0][1])
        parts[2] = (parts[2][0], self.dom.add(parts[2][1], c))
        return SVec(self, x.lanes, parts)

    def _open(self, x):
        lanes = x.lanes
        # party p is missing summand p+2: p+1 sends it, p+2 vouches with a hash
        for p in range(3):
            self.net.send((p + 1) % 3, p, MsgType.OPEN, self.dom.encode(x.parts[(p + 1) % 3][1], lanes))
            if self.malicious:
                self.net.send((p + 2) % 3, p, MsgType.ECHO, _digest(self.dom.encode(x.parts[(p + 2) % 3][0], lanes)))
        out = []
        for p in range(3):
            data = self.net.recv_payload((p + 1) % 3, p)
            if self.malicious and self.net.recv_payload((p + 2) % 3, p) != _digest(data):
                raise InconsistentBroadcast(f"party {p} received inconsistent replicas")
            missing = self.dom.decode(data, lanes)
            out.append(self.dom.add(self.dom.add(x.parts[p][0], x.parts[p][1]), missing))
        self.net.barrier()
        return out

    def _zero(self, lanes):
        f = [self.dom.rand(self.s.key({j, (j - 1) % 3}, "zero"), lanes) for j in range(3)]
        return [self.dom.sub(f[p], f[(p + 1) % 3]) for p in range(3)]

    def _mul(self, x, y):
        lanes = x.lanes
        d = self.dom
        alpha = self._zero(lanes)
        z = []
        for p in range(3):
            x0, x1 = x.parts[p]
            y0, y1 = y.parts[p]
            z.append(d.add(d.add(d.add(d.mul(x0, y0), d.mul(x0, y1)), d.mul(x1, y0)), alpha[p]))
        for p in range(3):
            self.net.send(p, (p - 1) % 3, MsgType.RESHARE, d.encode(z[p], lanes))
        parts = [(z[p], d.decode(self.net.recv_payload((p + 1) % 3, p), lanes)) for p in range(3)]
        self.net.barrier()
        return SVec(self, lanes, parts)

    def input(self, owner, ints):
        lanes = len(ints)
        o = owner
        s = [None] * 3
        s[o] = self.dom.rand(self.s.key({o, (o - 1) % 3}, "input"), lanes)
        s[(o + 1) % 3] = self.dom.rand(self.s.key({o, (o + 1) % 3}, "input"), lanes)
        last = (o + 2) % 3
        s[last] = self.dom.sub(self.dom.sub(self.dom.vec(ints), s[o]), s[(o + 1) % 3])
        payload = self.dom.encode(s[last], lanes)
        holders = [(o + 1) % 3, (o + 2) % 3]
        for q in holders:
            self.net.send(o, q, MsgType.INPUT, payload)
        got = {q: self.net.recv_payload(o, q) for q in holders}
        self.net.barrier()
        if self.malicious:
            a, b = holders
            self.net.send(a, b, MsgType.ECHO, _digest(got[a]))
            self.net.send(b, a, MsgType.ECHO, _digest(got[b]))
            if self.net.recv_payload(a, b) != _digest(got[b]) or self.net.recv_payload(b, a) != _digest(got[a]):
                raise InconsistentBroadcast("input owner sent different summands")
            self.net.barrier()
        parts = []
        for p in range(3):
            comps = []
            for j in (p, (p + 1) % 3):
                comps.append(self.dom.decode(got[p], lanes) if j == last and p != o else s[j])
            parts.append(tuple(comps))
        return SVec(self, lanes, parts)

    def random(self, lanes):
        s = [self.dom.rand(self.s.key({j, (j - 1) % 3}, "rand"), lanes) for j in range(3)]
        return SVec(self, lanes, self._from_summands(s))


class ShamirProtocol(Protocol):
    """Degree-t Shamir sharing at points 1..n with t < n/2; resharing multiplication."""

    scheme = Scheme.SHAMIR

    def __init__(self, session, dom, malicious=False, t: int | None = None):
        if not dom.is_field:
            raise DomainMismatch("Shamir sharing needs a prime field")
        n = session.n
        t = (n - 1) // 2 if t is None else t
        if t < 1 or 2 * t + 1 > n:
            raise ParamError(f"need 1 <= t and 2t+1 <= n, got t={t} n={n}")
        if n >= dom.modulus:
            raise ParamError("need more field elements than parties")
        super().__init__(session, dom, malicious)
        self.t = t
        p = dom.modulus
        self.points = list(range(1, n + 1))
        self.rec = lagrange_at(self.points[:t + 1], 0, p)
        self.full = lagrange_at(self.points, 0, p)
        # predicted shares at the remaining points from the first t+1
        self.extra = [lagrange_at(self.points[:t + 1], z, p) for z in self.points[t + 1:]]

    def _poly_shares(self, vec, lanes, prg):
        d = self.dom
        coeffs = [vec] + [d.rand(prg, lanes) for _ in range(self.t)]
        out = []
        for z in self.points:
            acc = d.zeros(lanes)
            for c in reversed(coeffs):
                acc = d.add(d.scale(acc, z), c)
            out.append(acc)
        return out

    def _share_plain(self, vec, lanes, prg):
        return [(y,) for y in self._poly_shares(vec, lanes, prg)], None

    def add_public(self, x, c):
        return SVec(self, x.lanes, [(self.dom.add(part[0], c),) for part in x.parts])

    def _combine(self, weights, ys, lanes):
        acc = self.dom.zeros(lanes)
        for w, y in zip(weights, ys):
            acc = self.dom.add(acc, self.dom.scale(y, w))
        return acc

    def _open(self, x):
        lanes = x.lanes
        payloads = [self.dom.encode(x.parts[p][0], lanes) for p in range(self.n)]
        views = self.net.exchange_all(MsgType.OPEN, payloads)
        out = []
        for p in range(self.n):
            ys = [self.dom.decode(v, lanes) for v in views[p]]
            if self.malicious:
                for weights, y in zip(self.extra, ys[self.t + 1:]):
                    if not self.dom.equal(self._combine(weights, ys[:self.t + 1], lanes), y):
                        raise InconsistentBroadcast("opened shares are not on a degree-t polynomial")
            out.append(self._combine(self.rec, ys[:self.t + 1], lanes))
        return out

    def _mul(self, x, y):
        lanes = x.lanes
        d = self.dom
        subs = []
        for p in range(self.n):
            prod = d.mul(x.parts[p][0], y.parts[p][0])
            subs.append(self._poly_shares(prod, lanes, self.s.party_prg[p]))
        for p in range(self.n):
            for q in range(self.n):
                if q != p:
                    self.net.send(p, q, MsgType.RESHARE, d.encode(subs[p][q], lanes))
        parts = []
        for q in range(self.n):
            got = [subs[p][q] if p == q else d.decode(self.net.recv_payload(p, q), lanes) for p in range(self.n)]
            parts.append((self._combine(self.full, got, lanes),))
        self.net.barrier()
        return SVec(self, lanes, parts)

    def input(self, owner, ints):
        lanes = len(ints)
        ys = self._poly_shares(self.dom.vec(ints), lanes, self.s.party_prg[owner])
        for q in range(self.n):
            if q != owner:
                self.net.send(owner, q, MsgType.INPUT, self.dom.encode(ys[q], lanes))
        parts = [(ys[q] if q == owner else self.dom.decode(self.net.recv_payload(owner, q), lanes),)
                 for q in range(self.n)]
        self.net.barrier()
        return SVec(self, lanes, parts)

    def random(self, lanes):
        # pseudo-random secret sharing from pre-agreed keys: no communication
        prg = self.s.key(range(self.n), "prss")
        parts, _ = self._share_plain(self.dom.rand(prg, lanes), lanes, prg)
        return SVec(self, lanes, parts)


class Rep4Protocol(Protocol):
    """Replicated 3-of-4: x = x_0 + x_1 + x_2 + x_3, party p holds all x_j with j != p."""

    scheme = Scheme.REP4

    def __init__(self, session, dom, malicious=True, out_modulus=None):
        if session.n != 4:
            raise ParamError("replicated 3-of-4 needs exactly 4 parties")
        super().__init__(session, dom, malicious, out_modulus)

    def _layout(self, p):
        return tuple(None if j == p else 0 for j in range(4))

    def _from_summands(self, s):
        return [tuple(None if j == p else s[j] for j in range(4)) for p in range(4)]

    def _share_plain(self, vec, lanes, prg):
        s = [self.dom.rand(prg, lanes) for _ in range(3)]
        last = vec
        for v in s:
            last = self.dom.sub(last, v)
        return self._from_summands(s + [last]), None

    def add_public(self, x, c):
        parts = [part if p == 0 else (self.dom.add(part[0], c),) + part[1:] for p, part in enumerate(x.parts)]
        return SVec(self, x.lanes, parts)

    def _open(self, x):
        lanes = x.lanes
        for p in range(4):
            a, b = (p + 1) % 4, (p + 2) % 4
            self.net.send(a, p, MsgType.OPEN, self.dom.encode(x.parts[a][p], lanes))
            self.net.send(b, p, MsgType.ECHO, _digest(self.dom.encode(x.parts[b][p], lanes)))
        out = []
        for p in range(4):
            data = self.net.recv_payload((p + 1) % 4, p)
            if self.net.recv_payload((p + 2) % 4, p) != _digest(data):
                raise InconsistentBroadcast(f"party {p} received inconsistent summands")
            acc = self.dom.decode(data, lanes)
            for j in range(4):
                if j != p:
                    acc = self.dom.add(acc, x.parts[p][j])
            out.append(acc)
        self.net.barrier()
        return out

    def _summand(self, x, j):
        # every party except j holds summand j; any copy will do for local math
        return x.parts[(j + 1) % 4][j]

    def _mul(self, x, y):
        lanes = x.lanes
        d = self.dom
        # summand contributions as seen by each party: view[m][u]
        view = [[d.zeros(lanes) if u != m else None for u in range(4)] for m in range(4)]
        for u in range(4):
            prod = d.mul(self._summand(x, u), self._summand(y, u))
            for m in range(4):
                if m != u:
                    view[m][u] = d.add(view[m][u], prod)
        pending = []
        for g in range(4):
            for h in range(g + 1, 4):
                i, j = [q for q in range(4) if q not in (g, h)]
                v = d.add(d.mul(self._summand(x, g), self._summand(y, h)),
                          d.mul(self._summand(x, h), self._summand(y, g)))
                mask = d.rand(self.s.key({i, j, g}, "rep4"), lanes)
                rest = d.sub(v, mask)
                payload = d.encode(rest, lanes)
                # i sends the summand to h, j vouches for it with a hash
                self.net.send(i, h, MsgType.RESHARE, payload)
                self.net.send(j, h, MsgType.ECHO, _digest(payload))
                pending.append((g, h, i, j, mask, rest))
        for g, h, i, j, mask, rest in pending:
            data = self.net.recv_payload(i, h)
            if self.net.recv_payload(j, h) != _digest(data):
                raise InconsistentBroadcast("verifiable resharing failed")
            for m in range(4):
                if m != h:
                    view[m][h] = d.add(view[m][h], mask)
                if m != g:
                    view[m][g] = d.add(view[m][g], d.decode(data, lanes) if m == h else rest)
        self.net.barrier()
        return SVec(self, lanes, [tuple(view[m]) for m in range(4)])

    def input(self, owner, ints):
        lanes = len(ints)
        d = self.dom
        o = owner
        a, b, c = [q for q in range(4) if q != o]
        s = [None] * 4
        s[o] = d.zeros(lanes)
        s[a] = d.rand(self.s.key(set(range(4)) - {a}, "input"), lanes)
        s[b] = d.rand(self.s.key(set(range(4)) - {b}, "input"), lanes)
        s[c] = d.sub(d.sub(d.vec(ints), s[a]), s[b])
        payload = d.encode(s[c], lanes)
        self.net.send(o, a, MsgType.INPUT, payload)
        self.net.send(o, b, MsgType.INPUT, payload)
        got = {q: d.decode(self.net.recv_payload(o, q), lanes) for q in (a, b)}
        self.net.barrier()
        parts = []
        for m in range(4):
            parts.append(tuple(None if j == m else (got[m] if j == c and m in got else s[j]) for j in range(4)))
        return SVec(self, lanes, parts)

    def input_known(self, ints, known_to: Sequence[int]) -> SVec:
        """Share a value already known to 2 or 3 parties."""
        d = self.dom
        lanes = len(ints)
        vec = d.vec(ints)
        known = sorted(set(known_to))
        if len(known) == 3:
            (u,) = [q for q in range(4) if q not in known]
            s = [d.zeros(lanes) for _ in range(4)]
            s[u] = vec
            return SVec(self, lanes, self._from_summands(s))
        if len(known) != 2:
            raise ParamError("known_to must list 2 or 3 parties")
        i, j = known
        g, h = [q for q in range(4) if q not in known]
        s = [d.zeros(lanes) for _ in range(4)]
        s[h] = d.rand(self.s.key({i, j, g}, "rep4"), lanes)
        s[g] = d.sub(vec, s[h])
        payload = d.encode(s[g], lanes)
        self.net.send(i, h, MsgType.INPUT, payload)
        self.net.send(j, h, MsgType.ECHO, _digest(payload))
        data = self.net.recv_payload(i, h)
        if self.net.recv_payload(j, h) != _digest(data):
            raise InconsistentBroadcast("verifiable send failed")
        self.net.barrier()
        parts = self._from_summands(s)
        parts[h] = tuple(d.decode(data, lanes) if k == g else v for k, v in enumerate(parts[h]))
        return SVec(self, lanes, parts)

    def random(self, lanes):
        s = [self.dom.rand(self.s.key(set(range(4)) - {j}, "rand"), lanes) for j in range(4)]
        return SVec(self, lanes, self._from_summands(s))


class FurukawaProtocol(Protocol):
    """Binary 3-party sharing: party p holds (t_p, s_p), t's XOR to 0, s_p = t_{p-1} ^ x."""

    scheme = Scheme.REP3

    def __init__(self, session, dom, malicious=False):
        if session.n != 3:
            raise ParamError("binary replicated sharing needs exactly 3 parties")
        if not dom.binary:
            raise DomainMismatch("this sharing is binary only")
        super().__init__(session, dom, malicious)

    def _layout(self, p):
        return (0, 0)

    def _from_r(self, r):
        # any r_0 ^ r_1 ^ r_2 = x gives t_p = r_p ^ r_{p-1}, s_p = r_p
        return [(r[p] ^ r[(p - 1) % 3], r[p]) for p in range(3)]

    def _share_plain(self, vec, lanes, prg):
        r0, r1 = prg.randbits(lanes), prg.randbits(lanes)
        return self._from_r([r0, r1, vec ^ r0 ^ r1]), None

    def add_public(self, x, c):
        return SVec(self, x.lanes, [(t, s ^ c) for t, s in x.parts])

    def _open(self, x):
        lanes = x.lanes
        for p in range(3):
            self.net.send(p, (p + 1) % 3, MsgType.OPEN, self.dom.encode(x.parts[p][0], lanes))
        out = []
        for p in range(3):
            t_prev = self.dom.decode(self.net.recv_payload((p - 1) % 3, p), lanes)
            out.append(x.parts[p][1] ^ t_prev)
        self.net.barrier()
        if self.malicious:
            self.net.echo_check([_digest(self.dom.encode(v, lanes)) for v in out])
        return out

    def _mul(self, x, y):
        lanes = x.lanes
        f = [self.s.key({j, (j - 1) % 3}, "zero").randbits(lanes) for j in range(3)]
        r = []
        for p in range(3):
            t, s = x.parts[p]
            u, w = y.parts[p]
            r.append((t & u) ^ (s & w) ^ f[p] ^ f[(p + 1) % 3])
        for p in range(3):
            self.net.send(p, (p + 1) % 3, MsgType.RESHARE, self.dom.encode(r[p], lanes))
        parts = []
        for p in range(3):
            r_prev = self.dom.decode(self.net.recv_payload((p - 1) % 3, p), lanes)
            parts.append((r[p] ^ r_prev, r[p]))
        self.net.barrier()
        return SVec(self, lanes, parts)

    def input(self, owner, ints):
        lanes = len(ints)
        parts, _ = self._share_plain(self.dom.vec(ints), lanes, self.s.party_prg[owner])
        for q in range(3):
            if q != owner:
                self.net.send(owner, q, MsgType.INPUT, self.enc(parts[q], lanes))
        got = []
        for q in range(3):
            if q == owner:
                got.append(parts[q])
            else:
                got.append(tuple(self.dec(self.net.recv_payload(owner, q), 2, lanes)))
        self.net.barrier()
        return SVec(self, lanes, got)

    def random(self, lanes):
        r = [self.s.key({p, (p + 1) % 3}, "rand").randbits(lanes) for p in range(3)]
        return SVec(self, lanes, self._from_r(r))
