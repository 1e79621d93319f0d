"""Vectorised plaintext arithmetic used inside protocols.

``ModDomain`` stores a vector as a numpy object array of Python ints mod M.
``BitDomain`` packs a vector of bits into one Python int (lane i = bit i), so a
single ``&`` evaluates an AND gate on every lane at once.
"""

from __future__ import annotations

import numpy as np

from .algebra import PRG, DomainParams, Kind


class ModDomain:
    binary = False

    def __init__(self, modulus: int, params: DomainParams | None = None):
        self.modulus = modulus
        self.params = params
        self.width = max(1, ((modulus - 1).bit_length() + 7) // 8)
        self.is_field = params is not None and params.kind is Kind.PRIME_FIELD

    def __repr__(self):
        return f"ModDomain({self.modulus})"

    def __eq__(self, other):
        return isinstance(other, ModDomain) and other.modulus == self.modulus

    def __hash__(self):
        return hash(("mod", self.modulus))

    def vec(self, values) -> np.ndarray:
        arr = np.empty(len(values), dtype=object)
        m = self.modulus
        for i, v in enumerate(values):
            arr[i] = int(v) % m
        return arr

    def zeros(self, n: int) -> np.ndarray:
        return self.vec([0] * n)

    def full(self, n: int, value: int) -> np.ndarray:
        return self.vec([value] * n)

    def rand(self, prg: PRG, n: int) -> np.ndarray:
        return self.vec(prg.randbelow_many(self.modulus, n))

    def add(self, a, b):
        return (a + b) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def scale(self, a, c: int):
        return (a * (int(c) % self.modulus)) % self.modulus

    def to_ints(self, a, n: int | None = None) -> list[int]:
        return [int(v) for v in a]

    def length(self, a) -> int:
        return len(a)

    def take(self, a, start: int, count: int):
        return a[start:start + count]

    def concat(self, parts, lengths=None):
        if not parts:
            return self.zeros(0)
        return np.concatenate(parts)

    def gather(self, a, idx, n: int | None = None):
        return a[np.asarray(idx, dtype=np.int64)] if len(idx) else self.zeros(0)

    def encode(self, a, n: int | None = None) -> bytes:
        w = self.width
        return b"".join(int(v).to_bytes(w, "little") for v in a)

    def decode(self, data: bytes, n: int) -> np.ndarray:
        w = self.width
        m = self.modulus
        return self.vec([int.from_bytes(data[i * w:(i + 1) * w], "little") % m for i in range(n)])

    def nbytes(self, n: int) -> int:
        return self.width * n

    def equal(self, a, b) -> bool:
        return len(a) == len(b) and all(int(x) == int(y) for x, y in zip(a, b))

    def prefix_sum(self, a, n: int | None = None):
        return np.cumsum(a) % self.modulus if len(a) else a

    def lane_sum(self, a, lanes: int, groups: int):
        """Sum contiguous blocks of lanes: ``groups`` outputs."""
        return a.reshape(groups, lanes // groups).sum(axis=1) % self.modulus


class BitDomain:
    binary = True
    modulus = 2
    is_field = False

    def __init__(self):
        self.params = DomainParams.binary()

    def __repr__(self):
        return "BitDomain()"

    def __eq__(self, other):
        return isinstance(other, BitDomain)

    def __hash__(self):
        return hash("bit")

    def vec(self, bits) -> int:
        return pack_bits(bits)

    def zeros(self, n: int) -> int:
        return 0

    def ones(self, n: int) -> int:
        return (1 << n) - 1

    def full(self, n: int, value: int) -> int:
        return self.ones(n) if value & 1 else 0

    def rand(self, prg: PRG, n: int) -> int:
        return prg.randbits(n)

    def add(self, a, b):
        return a ^ b

    sub = add

    def neg(self, a):
        return a

    def mul(self, a, b):
        return a & b

    def scale(self, a, c: int):
        return a if c & 1 else 0

    def to_ints(self, a, n: int) -> list[int]:
        return unpack_bits(a, n)

    def take(self, a, start: int, count: int) -> int:
        return (a >> start) & ((1 << count) - 1)

    def concat(self, parts, lengths):
        out, shift = 0, 0
        for p, n in zip(parts, lengths):
            out |= p << shift
            shift += n
        return out

    def gather(self, a, idx, n: int):
        bits = unpack_bits(a, n)
        return pack_bits([bits[i] for i in idx])

    def encode(self, a, n: int) -> bytes:
        return a.to_bytes(max(1, (n + 7) // 8), "little")

    def decode(self, data: bytes, n: int) -> int:
        return int.from_bytes(data, "little") & ((1 << n) - 1)

    def nbytes(self, n: int) -> int:
        return max(1, (n + 7) // 8)

    def equal(self, a, b) -> bool:
        return a == b

    def lane_sum(self, a, lanes: int, groups: int):
        size = lanes // groups
        mask = (1 << size) - 1
        out = 0
        for g in range(groups):
            out |= (((a >> (g * size)) & mask).bit_count() & 1) << g
        return out


def pack_bits(bits) -> int:
    arr = np.asarray(list(bits), dtype=np.uint8)
    if arr.size == 0:
        return 0
    return int.from_bytes(np.packbits(arr & 1, bitorder="little").tobytes(), "little")


def unpack_bits(v: int, n: int) -> list[int]:
    if n == 0:
        return []
    raw = np.frombuffer(v.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].tolist()


def to_planes(values, m: int) -> list[int]:
    """Bit-slice: plane i packs bit i of every value (lane j = values[j])."""
    vals = [int(v) for v in values]
    n = len(vals)
    planes = []
    for lo in range(0, m, 64):
        limb = np.array([(v >> lo) & 0xFFFFFFFFFFFFFFFF for v in vals], dtype=np.uint64)
        for i in range(min(64, m - lo)):
            bits = ((limb >> np.uint64(i)) & np.uint64(1)).astype(np.uint8)
            planes.append(int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little") if n else 0)
    return planes


def from_planes(planes, n: int) -> list[int]:
    out = [0] * n
    for i, plane in enumerate(planes):
        if not plane:
            continue
        for j, b in enumerate(unpack_bits(plane, n)):
            if b:
                out[j] |= 1 << i
    return out


def domain_for(params: DomainParams):
    if params.kind is Kind.BINARY:
        return BitDomain()
    return ModDomain(params.modulus, params)
