"""Boolean circuits over shared bits.

``BitOps`` hides whether a shared bit lives in a binary protocol (XOR free,
AND interactive) or as a 0/1 value in an arithmetic protocol (XOR costs a
multiplication: x ^ y = x + y - 2xy). Bit vectors are little-endian lists of
SVecs, one SVec per bit position, each holding all lanes.
"""

from __future__ import annotations

from typing import Sequence

from .domains import unpack_bits
from .errors import ParamError
from .protocols import Protocol, SVec


class BitOps:
    def __init__(self, proto: Protocol):
        self.p = proto
        self.binary = proto.dom.binary

    # public bit vectors: a packed int for binary protocols, a 0/1 vector otherwise
    def plane(self, packed: int, lanes: int):
        if self.binary:
            return packed
        return self.p.dom.vec(unpack_bits(packed, lanes))

    def ones(self, lanes: int):
        return self.p.pub_full(lanes, 1)

    def const(self, value: int, lanes: int) -> SVec:
        return self.p.constant(self.p.pub_full(lanes, value), lanes)

    def and_many(self, pairs: Sequence[tuple[SVec, SVec]]) -> list[SVec]:
        return self.p.mul_many(pairs)

    def xor_given_and(self, x: SVec, y: SVec, xy: SVec) -> SVec:
        if self.binary:
            return self.p.add(x, y)
        return self.p.sub(self.p.add(x, y), self.p.scale(xy, 2))

    def xor_many(self, pairs: Sequence[tuple[SVec, SVec]]) -> list[SVec]:
        if self.binary:
            return [self.p.add(x, y) for x, y in pairs]
        prods = self.and_many(pairs)
        return [self.xor_given_and(x, y, xy) for (x, y), xy in zip(pairs, prods)]

    def disjoint_or(self, x: SVec, y: SVec) -> SVec:
        """x | y when x & y is known to be zero: a plain sum either way."""
        return self.p.add(x, y)

    def not_(self, x: SVec) -> SVec:
        return self.p.rsub_public(self.ones(x.lanes), x) if not self.binary else self.p.add_public(x, self.ones(x.lanes))

    def xor_pub(self, x: SVec, c) -> SVec:
        if self.binary:
            return self.p.add_public(x, c)
        # x + c - 2cx
        d = self.p.dom
        factor = d.sub(d.full(x.lanes, 1), d.scale(c, 2))
        return self.p.add_public(self.p.mul_public(x, factor), c)

    def and_pub(self, x: SVec, c) -> SVec:
        return self.p.mul_public(x, c)

    def mux_many(self, items: Sequence[tuple[SVec, SVec, SVec]]) -> list[SVec]:
        """cond ? b : a, as a + cond*(b - a)."""
        prods = self.and_many([(c, self.p.sub(b, a)) for c, a, b in items])
        return [self.p.add(a, pr) for (_, a, _), pr in zip(items, prods)]

    def open_bits(self, bits: Sequence[SVec]) -> list:
        return self.p.open_many(list(bits))


def planes_pub(bo: BitOps, planes: Sequence[int], lanes: int) -> list:
    return [bo.plane(pl, lanes) for pl in planes]


def add_pub_shared(bo: BitOps, c: Sequence, r: Sequence[SVec], cin: int = 0,
                   carry_out: bool = False):
    """Ripple adder for a public operand c (plane vectors) plus shared bits r, mod 2^m.

    carry' = g ^ c&(r^car) with g = r&car: one AND per position.
    """
    p = bo.p
    m = len(r)
    if len(c) != m:
        raise ParamError("operand widths differ")
    lanes = r[0].lanes
    out = []
    # position 0 has a public carry-in, so its carry is local
    if cin:
        out.append(bo.not_(bo.xor_pub(r[0], c[0])))
        # c | r = c ^ r ^ c&r
        car = bo.disjoint_or(bo.xor_pub(r[0], c[0]), bo.and_pub(r[0], c[0]))
    else:
        out.append(bo.xor_pub(r[0], c[0]))
        car = bo.and_pub(r[0], c[0])
    for i in range(1, m):
        last = i == m - 1
        if last and not carry_out:
            out.append(bo.xor_pub(_xor(bo, r[i], car), c[i]))
            break
        (g,) = bo.and_many([(r[i], car)])
        r_x_car = bo.xor_given_and(r[i], car, g)
        out.append(bo.xor_pub(r_x_car, c[i]))
        car = bo.disjoint_or(g, bo.and_pub(r_x_car, c[i]))
    if carry_out:
        return out, car
    return out


def _xor(bo: BitOps, x: SVec, y: SVec) -> SVec:
    return bo.xor_many([(x, y)])[0]


def sub_pub_shared(bo: BitOps, c: Sequence, r: Sequence[SVec], borrow: bool = False):
    """c - r mod 2^m as c + ~r + 1; optional borrow flag (1 iff c < r)."""
    notr = [bo.not_(x) for x in r]
    res = add_pub_shared(bo, c, notr, cin=1, carry_out=borrow)
    if borrow:
        bits, carry = res
        return bits, bo.not_(carry)
    return res


def ripple_add(bo: BitOps, x: Sequence[SVec], y: Sequence[SVec], carry_out: bool = False):
    """Shared + shared ripple adder mod 2^m; carry' = ((x^car)&(y^car))^car."""
    if not bo.binary:
        raise ParamError("shared-shared adders run on binary protocols")
    p = bo.p
    m = len(x)
    out = [p.add(x[0], y[0])]
    if m == 1 and not carry_out:
        return out
    (car,) = bo.and_many([(x[0], y[0])])
    for i in range(1, m):
        out.append(p.add(p.add(x[i], y[i]), car))
        if i == m - 1 and not carry_out:
            break
        (t,) = bo.and_many([(p.add(x[i], car), p.add(y[i], car))])
        car = p.add(t, car)
    if carry_out:
        return out, car
    return out


def add_many_ripple(bo: BitOps, x: Sequence[Sequence[SVec]], y: Sequence[Sequence[SVec]],
                    carry_out: bool = False):
    """Several independent shared adders evaluated side by side (same rounds as one)."""
    if not x:
        return []
    lens = [xi[0].lanes for xi in x]
    p = bo.p
    m = len(x[0])
    xs = [p.concat([xi[i] for xi in x]) for i in range(m)]
    ys = [p.concat([yi[i] for yi in y]) for i in range(m)]
    res = ripple_add(bo, xs, ys, carry_out)
    bits, car = res if carry_out else (res, None)
    outs = []
    for j, n in enumerate(lens):
        start = sum(lens[:j])
        b = [p.take(v, start, n) for v in bits]
        outs.append((b, p.take(car, start, n)) if carry_out else b)
    return outs


def carry_save(bo: BitOps, x: Sequence[SVec], y: Sequence[SVec], z: Sequence[SVec]):
    """Three addends to two: sum bits and shifted majority (carry) bits, mod 2^m."""
    if not bo.binary:
        raise ParamError("carry-save runs on binary protocols")
    p = bo.p
    m = len(x)
    lanes = x[0].lanes
    s = [p.add(p.add(a, b), c) for a, b, c in zip(x, y, z)]
    # maj(a,b,c) = ((a^b)&(a^c))^a, one AND; the top carry falls off mod 2^m
    pairs = [(p.add(x[i], y[i]), p.add(x[i], z[i])) for i in range(m - 1)]
    prods = bo.and_many(pairs) if pairs else []
    maj = [p.add(t, x[i]) for i, t in enumerate(prods)]
    return s, [p.zeros(lanes)] + maj


def carry_tree(bo: BitOps, g: list[SVec], prop: list[SVec]) -> SVec:
    """Carry out of a prefix of positions, log depth.

    (G, P) of a high block over a low block: G = G_hi ^ P_hi & G_lo, P = P_hi & P_lo.
    """
    p = bo.p
    while len(g) > 1:
        pairs, keep = [], []
        nodes = []
        for i in range(0, len(g) - 1, 2):
            lo, hi = i, i + 1
            nodes.append((lo, hi))
            pairs.append((prop[hi], g[lo]))
            pairs.append((prop[hi], prop[lo]))
        prods = bo.and_many(pairs)
        ng, np_ = [], []
        for k, (lo, hi) in enumerate(nodes):
            ng.append(bo.disjoint_or(g[hi], prods[2 * k]))
            np_.append(prods[2 * k + 1])
        if len(g) % 2:
            ng.append(g[-1])
            np_.append(prop[-1])
        g, prop = ng, np_
    return g[0]


def carry_tree_pub(bo: BitOps, c: Sequence, r: Sequence[SVec], cin: int = 0) -> SVec:
    """Carry out of c + r (c public) over len(r) positions."""
    g = [bo.and_pub(ri, ci) for ri, ci in zip(r, c)]
    prop = [bo.xor_pub(ri, ci) for ri, ci in zip(r, c)]
    if cin:
        g[0] = bo.disjoint_or(g[0], prop[0])
    return carry_tree(bo, g, prop)


def carry_tree_shared(bo: BitOps, x: Sequence[SVec], y: Sequence[SVec]) -> SVec:
    gs = bo.and_many(list(zip(x, y)))
    prop = [bo.xor_given_and(a, b, ab) for a, b, ab in zip(x, y, gs)]
    return carry_tree(bo, gs, prop)


def less_than(bo: BitOps, a: Sequence[SVec], b: Sequence[SVec]) -> SVec:
    """[a < b] for unsigned little-endian bit vectors, MSB-first prefix combination.

    lt = lt_hi ^ eq_hi & lt_lo, eq = eq_hi & eq_lo.
    """
    p = bo.p
    ab = bo.and_many(list(zip(a, b)))
    lt = [p.sub(bi, x) for bi, x in zip(b, ab)]  # b & ~a
    eq = [bo.not_(bo.xor_given_and(ai, bi, x)) for ai, bi, x in zip(a, b, ab)]
    while len(lt) > 1:
        pairs, nodes = [], []
        for i in range(0, len(lt) - 1, 2):
            lo, hi = i, i + 1
            nodes.append((lo, hi))
            pairs.append((eq[hi], lt[lo]))
            pairs.append((eq[hi], eq[lo]))
        prods = bo.and_many(pairs)
        nl, ne = [], []
        for k, (lo, hi) in enumerate(nodes):
            nl.append(bo.disjoint_or(lt[hi], prods[2 * k]))
            ne.append(prods[2 * k + 1])
        if len(lt) % 2:
            nl.append(lt[-1])
            ne.append(eq[-1])
        lt, eq = nl, ne
    return lt[0]


def shift_left(bo: BitOps, x: Sequence[SVec], k: int) -> list[SVec]:
    lanes = x[0].lanes
    return [bo.p.zeros(lanes)] * k + list(x[:len(x) - k])


def multiply_bits(bo: BitOps, x: Sequence[SVec], y: Sequence[SVec]) -> list[SVec]:
    """Product mod 2^m: partial products in one AND round, carry-save reduction, final ripple."""
    p = bo.p
    m = len(x)
    prods = bo.and_many([(x[i], y[j]) for i in range(m) for j in range(m - i)])
    rows, at = [], 0
    lanes = x[0].lanes
    for i in range(m):
        row = [p.zeros(lanes)] * i + prods[at:at + m - i]
        at += m - i
        rows.append(row)
    return sum_rows(bo, rows)


def sum_rows(bo: BitOps, rows: list[list[SVec]]) -> list[SVec]:
    """Sum of several m-bit numbers mod 2^m via a carry-save (Wallace) tree."""
    p = bo.p
    if len(rows) == 1:
        return rows[0]
    while len(rows) > 2:
        groups = len(rows) // 3
        m = len(rows[0])
        xs = [p.concat([rows[3 * g][i] for g in range(groups)]) for i in range(m)]
        ys = [p.concat([rows[3 * g + 1][i] for g in range(groups)]) for i in range(m)]
        zs = [p.concat([rows[3 * g + 2][i] for g in range(groups)]) for i in range(m)]
        s, c = carry_save(bo, xs, ys, zs)
        lanes = rows[0][0].lanes
        nxt = []
        for g in range(groups):
            nxt.append([p.take(v, g * lanes, lanes) for v in s])
            nxt.append([p.take(v, g * lanes, lanes) for v in c])
        rows = nxt + rows[3 * groups:]
    return ripple_add(bo, rows[0], rows[1])
