"""The four benchmark kernels: comparison, sort, inner product, matmul.

Arithmetic families hold a vector of N secrets as one ``SVec``; FurukawaBin
holds it as a little-endian list of bit SVecs (a "word"), one per bit.
"""

from __future__ import annotations

import math
from typing import Sequence

from .algebra import PRG
from .circuits import BitOps, less_than, multiply_bits, sum_rows
from .engine import ProtocolConfig, Runtime
from .errors import ParamError
from .protocols import SVec

KERNELS = ("compare", "sort", "inner", "matmul")


def _binary_family(rt: Runtime) -> bool:
    return rt.arith is None


# -- comparison

def compare_vectors(rt: Runtime, a, b) -> SVec:
    """Bit i is [a_i < b_i], unsigned; held in the runtime's bit world."""
    if _binary_family(rt):
        if len(a) != len(b):
            raise ParamError("operand widths differ")
        return less_than(rt.bo, a, b)
    if a.lanes != b.lanes:
        raise ParamError("length mismatch")
    return rt.lt_bit(a, b)


# -- inner product and matmul

def inner_product(rt: Runtime, a, b):
    """sum a_i b_i: N products opened in one batch, then a local sum."""
    if _binary_family(rt):
        p = rt.binary
        prod = multiply_bits(rt.bo, a, b)
        rows = [[p.take(v, j, 1) for v in prod] for j in range(prod[0].lanes)]
        return sum_rows(rt.bo, rows)
    if a.lanes != b.lanes:
        raise ParamError("length mismatch")
    ar = rt.arith
    return ar.lane_sum(ar.mul(a, b), 1)


def matmul(rt: Runtime, A, B, n: int):
    """Row-major n x n product with n^3 multiplications in one batch."""
    if _binary_family(rt):
        p = rt.binary
        # lane (k, i, j): rows of the carry-save sum are indexed by k
        ia = [i * n + k for k in range(n) for i in range(n) for j in range(n)]
        ib = [k * n + j for k in range(n) for i in range(n) for j in range(n)]
        prod = multiply_bits(rt.bo, [p.gather(v, ia) for v in A], [p.gather(v, ib) for v in B])
        rows = [[p.take(v, k * n * n, n * n) for v in prod] for k in range(n)]
        return sum_rows(rt.bo, rows)
    ar = rt.arith
    if A.lanes != n * n or B.lanes != n * n:
        raise ParamError("matrices must be n x n")
    ia = [i * n + k for i in range(n) for j in range(n) for k in range(n)]
    ib = [k * n + j for i in range(n) for j in range(n) for k in range(n)]
    prod = ar.mul(ar.gather(A, ia), ar.gather(B, ib))
    return ar.lane_sum(prod, n * n)


# -- sorting

def merge_exchange(n: int) -> list[list[tuple[int, int]]]:
    """Batcher's merge-exchange network as layers of disjoint comparators (i < j)."""
    layers = []
    if n < 2:
        return layers
    t = math.ceil(math.log2(n))
    p = 1 << (t - 1)
    while p > 0:
        q, r, d = 1 << (t - 1), 0, p
        while True:
            layer = [(i, i + d) for i in range(n - d) if i & p == r]
            if layer:
                layers.append(layer)
            if q == p:
                break
            d, q, r = q - p, q >> 1, p
        p >>= 1
    return layers


def _batcher_sort(rt: Runtime, words: list[SVec]) -> list[SVec]:
    p = rt.binary
    bo = rt.bo
    n = words[0].lanes
    for layer in merge_exchange(n):
        lo = [i for i, _ in layer]
        hi = [j for _, j in layer]
        A = [p.gather(w, lo) for w in words]
        B = [p.gather(w, hi) for w in words]
        swap = less_than(bo, B, A)
        mins = bo.mux_many([(swap, x, y) for x, y in zip(A, B)])
        maxs = [p.add(p.add(x, y), m) for x, y, m in zip(A, B, mins)]
        # reassemble: untouched lanes keep their place
        where = list(range(n))
        c = len(layer)
        for t, (i, j) in enumerate(layer):
            where[i] = n + t
            where[j] = n + c + t
        words = [p.gather(p.concat([w, mn, mx]), where) for w, mn, mx in zip(words, mins, maxs)]
    return words


def _one_hot(rt: Runtime, dest: SVec, n: int) -> list[SVec]:
    """e[t] lane j = [dest_j == t] for t < n, from the bits of dest."""
    ar = rt.arith
    lanes = dest.lanes
    if n == 1:
        return [ar.constant(ar.pub_full(lanes, 1), lanes)]
    b = max(1, math.ceil(math.log2(n)))
    bits = rt.to_arith(rt.decompose(dest, b))
    e = [ar.constant(ar.pub_full(lanes, 1), lanes)]
    for i, bit in enumerate(bits):
        step = 1 << i
        # entries whose high sibling would be >= n cannot see bit i set
        grow = [t for t in range(len(e)) if t + step < n]
        hi = ar.mul_many([(e[t], bit) for t in grow])
        e = [ar.sub(e[t], hi[t]) if t < len(hi) else e[t] for t in range(len(e))] + hi
    return e


def _apply_one_hot(rt: Runtime, onehot: list[SVec], vecs: list[SVec]) -> list[SVec]:
    """out[t] = sum_j onehot[t][j] * w[j] for every w, all products in one batch."""
    ar = rt.arith
    n = len(onehot)
    X = ar.concat(onehot)
    pairs = [(X, ar.concat([w] * n)) for w in vecs]
    prods = ar.mul_many(pairs)
    return [ar.lane_sum(pr, n) for pr in prods]


def _destinations(rt: Runtime, f: SVec) -> SVec:
    """Stable partition target: zeros keep order first, ones after them.

    dest = (s0 - 1) + f (Z + s1 - s0) with inclusive prefix counts s0, s1 and Z zeros.
    """
    ar = rt.arith
    n = f.lanes
    s1 = ar.prefix_sum(f)
    total = ar.gather(s1, [n - 1] * n)
    idx = ar.pub(list(range(n)))
    s0m1 = ar.add_public(ar.neg(s1), idx)  # s0 - 1 = j - s1
    # Z + s1 - s0 = (n - S) + 2 s1 - (j + 1)
    t = ar.add_public(ar.sub(ar.scale(s1, 2), total), ar.pub([n - 1 - j for j in range(n)]))
    return ar.add(s0m1, ar.mul(f, t))


def radix_sort(rt: Runtime, v):
    """Oblivious LSD radix sort: one stable bit-partition per value bit.

    The bits are extracted once; each pass computes destinations from the
    current bit and moves the value and the not-yet-used bits there with a
    one-hot selection. FurukawaBin uses a Batcher network instead.
    """
    if _binary_family(rt):
        return _batcher_sort(rt, v)
    n = v.lanes
    if n == 1:
        return v
    ell = rt.ell
    bits = rt.to_arith(rt.decompose(v, ell))
    rest = bits
    for i in range(ell):
        dest = _destinations(rt, rest[0])
        onehot = _one_hot(rt, dest, n)
        moved = _apply_one_hot(rt, onehot, [v] + rest[1:])
        v, rest = moved[0], moved[1:]
    return v


# -- running a kernel end to end

def make_inputs(cfg: ProtocolConfig, kernel: str, n: int, seed: int = 0) -> dict:
    """Synthetic inputs below min(2^ell, modulus)."""
    if kernel not in KERNELS:
        raise ParamError(f"unknown kernel {kernel!r}")
    bound = min(1 << cfg.ell, cfg.plain_modulus)
    prg = PRG(f"inputs:{seed}:{kernel}:{n}")
    size = n * n if kernel == "matmul" else n
    if kernel == "sort":
        return {"v": prg.randbelow_many(bound, size)}
    return {"a": prg.randbelow_many(bound, size), "b": prg.randbelow_many(bound, size)}


def plain_kernel(cfg: ProtocolConfig, kernel: str, n: int, data: dict) -> list[int]:
    """Plaintext result in the kernel's output domain."""
    mod = cfg.plain_modulus
    if kernel == "compare":
        return [int(x < y) for x, y in zip(data["a"], data["b"])]
    if kernel == "sort":
        return sorted(data["v"])
    if kernel == "inner":
        return [sum(x * y for x, y in zip(data["a"], data["b"])) % mod]
    A, B = data["a"], data["b"]
    return [sum(A[i * n + k] * B[k * n + j] for k in range(n)) % mod for i in range(n) for j in range(n)]


def share(rt: Runtime, values: Sequence[int], owner: int = 0):
    if _binary_family(rt):
        return rt.input_bits(owner, values)
    return rt.input(owner, values)


def open_result(rt: Runtime, x) -> list[int]:
    if isinstance(x, list):
        return rt.reveal_bits(x)
    if x.proto is rt.arith:
        return rt.reveal(x)
    return rt.reveal_bits([x])


def execute(rt: Runtime, kernel: str, n: int, data: dict, owner: int = 0) -> list[int]:
    """Share inputs from ``owner``, run the kernel, open the result, validate."""
    if kernel == "compare":
        out = compare_vectors(rt, share(rt, data["a"], owner), share(rt, data["b"], owner))
    elif kernel == "sort":
        out = radix_sort(rt, share(rt, data["v"], owner))
    elif kernel == "inner":
        out = inner_product(rt, share(rt, data["a"], owner), share(rt, data["b"], owner))
    elif kernel == "matmul":
        out = matmul(rt, share(rt, data["a"], owner), share(rt, data["b"], owner), n)
    else:
        raise ParamError(f"unknown kernel {kernel!r}")
    res = open_result(rt, out)
    rt.finish()
    return res
