"""Exact arithmetic over Z_p, Z_{2^k} and Z_2, polynomials, and a seeded PRG."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DomainMismatch, DuplicatePoint, NotInvertible, Overflow, ParamError

M61 = (1 << 61) - 1
M127 = (1 << 127) - 1


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24, probabilistic-grade beyond."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Kind(enum.Enum):
    PRIME_FIELD = "field"
    RING = "ring"
    BINARY = "binary"


@dataclass(frozen=True)
class DomainParams:
    kind: Kind
    modulus_p: int | None = None
    k: int | None = None
    s: int = 40
    # ring values carried in Z_{2^{k+s}} (MAC-extended ring)
    extended: bool = False

    def __post_init__(self):
        if not 1 <= self.s <= 64:
            raise ParamError(f"statistical parameter s={self.s} outside [1, 64]")
        if self.kind is Kind.PRIME_FIELD:
            if self.modulus_p is None or not is_prime(self.modulus_p):
                raise ParamError(f"{self.modulus_p} is not prime")
        elif self.kind is Kind.RING:
            if self.k is None or not 2 <= self.k <= 128:
                raise ParamError(f"ring bit width k={self.k} outside [2, 128]")

    @classmethod
    def field(cls, p: int = M61, s: int = 40) -> "DomainParams":
        return cls(Kind.PRIME_FIELD, modulus_p=p, s=s)

    @classmethod
    def ring(cls, k: int = 64, s: int = 40, extended: bool = False) -> "DomainParams":
        return cls(Kind.RING, k=k, s=s, extended=extended)

    @classmethod
    def binary(cls) -> "DomainParams":
        return cls(Kind.BINARY)

    @property
    def modulus(self) -> int:
        if self.kind is Kind.PRIME_FIELD:
            return self.modulus_p
        if self.kind is Kind.RING:
            return 1 << (self.k + self.s if self.extended else self.k)
        return 2

    @property
    def bits(self) -> int:
        """Bit length of the largest element."""
        return (self.modulus - 1).bit_length()

    @property
    def byte_width(self) -> int:
        return max(1, (self.bits + 7) // 8)

    def extend(self) -> "DomainParams":
        if self.kind is not Kind.RING:
            raise DomainMismatch("only rings have a MAC-extended form")
        return DomainParams(Kind.RING, k=self.k, s=self.s, extended=True)

    def base(self) -> "DomainParams":
        if self.kind is Kind.RING and self.extended:
            return DomainParams(Kind.RING, k=self.k, s=self.s)
        return self

    def __call__(self, value: int) -> "DomainElement":
        return DomainElement(value % self.modulus, self)

    def __str__(self) -> str:
        if self.kind is Kind.PRIME_FIELD:
            return f"Z_{self.modulus_p}"
        if self.kind is Kind.RING:
            return f"Z_2^{self.k + self.s if self.extended else self.k}"
        return "Z_2"


@dataclass(frozen=True)
class DomainElement:
    value: int
    params: DomainParams

    def __post_init__(self):
        if not 0 <= self.value < self.params.modulus:
            raise Overflow(f"{self.value} not reduced in {self.params}")

    def _check(self, other: "DomainElement") -> None:
        if not isinstance(other, DomainElement) or other.params != self.params:
            raise DomainMismatch(f"{self.params} vs {getattr(other, 'params', other)}")

    def __add__(self, other):
        return element_arith("add", self, other)

    def __sub__(self, other):
        return element_arith("sub", self, other)

    def __mul__(self, other):
        return element_arith("mul", self, other)

    def __neg__(self):
        return element_arith("neg", self)

    def inv(self) -> "DomainElement":
        return element_arith("inv", self)

    def __int__(self) -> int:
        return self.value


def element_arith(op: str, a: DomainElement, b: DomainElement | None = None) -> DomainElement:
    m = a.params.modulus
    if op in ("add", "sub", "mul"):
        a._check(b)
        if op == "add":
            v = a.value + b.value
        elif op == "sub":
            v = a.value - b.value
        else:
            v = a.value * b.value
        return DomainElement(v % m, a.params)
    if op == "neg":
        return DomainElement(-a.value % m, a.params)
    if op == "inv":
        if a.params.kind is Kind.RING and a.value % 2 == 0:
            raise NotInvertible(f"{a.value} is even in {a.params}")
        if a.value == 0:
            raise NotInvertible(f"zero has no inverse in {a.params}")
        return DomainElement(pow(a.value, -1, m), a.params)
    raise ValueError(f"unknown op {op!r}")


@dataclass
class Polynomial:
    """Coefficients constant term first."""

    coefficients: list[DomainElement]
    params: DomainParams = field(default=None)

    def __post_init__(self):
        if self.params is None:
            self.params = self.coefficients[0].params
        if any(c.params != self.params for c in self.coefficients):
            raise DomainMismatch("mixed coefficient domains")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def values(self) -> list[int]:
        return [c.value for c in self.coefficients]


def poly_eval(f: Polynomial, z: DomainElement) -> DomainElement:
    if z.params != f.params:
        raise DomainMismatch("evaluation point outside the polynomial's field")
    return DomainElement(horner(f.values(), z.value, f.params.modulus), f.params)


def horner(coeffs: Sequence[int], z: int, modulus: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * z + c) % modulus
    return acc


def _poly_mul_linear(poly: list[int], root: int, p: int) -> list[int]:
    # poly * (X - root)
    out = [0] * (len(poly) + 1)
    for i, c in enumerate(poly):
        out[i + 1] = (out[i + 1] + c) % p
        out[i] = (out[i] - c * root) % p
    return out


def interpolate_ints(xs: Sequence[int], ys: Sequence[int], p: int) -> list[int]:
    if len(set(x % p for x in xs)) != len(xs):
        raise DuplicatePoint("interpolation points must be distinct")
    n = len(xs)
    coeffs = [0] * n
    for i in range(n):
        basis = [1]
        denom = 1
        for j in range(n):
            if j != i:
                basis = _poly_mul_linear(basis, xs[j], p)
                denom = denom * (xs[i] - xs[j]) % p
        scale = ys[i] * pow(denom, -1, p) % p
        for d in range(n):
            coeffs[d] = (coeffs[d] + scale * basis[d]) % p
    return coeffs


def poly_interpolate(points: Iterable[tuple[DomainElement, DomainElement]]) -> Polynomial:
    points = list(points)
    if not points:
        raise ParamError("need at least one point")
    params = points[0][0].params
    if params.kind is not Kind.PRIME_FIELD:
        raise DomainMismatch("interpolation needs a prime field")
    for z, y in points:
        if z.params != params or y.params != params:
            raise DomainMismatch("points from different domains")
    xs = [z.value for z, _ in points]
    ys = [y.value for _, y in points]
    coeffs = interpolate_ints(xs, ys, params.modulus)
    return Polynomial([DomainElement(c, params) for c in coeffs], params)


def lagrange_at(xs: Sequence[int], at: int, p: int) -> list[int]:
    """Weights w_i with f(at) = sum w_i f(xs[i]) for deg f < len(xs)."""
    if len(set(xs)) != len(xs):
        raise DuplicatePoint("interpolation points must be distinct")
    out = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if j != i:
                num = num * (at - xj) % p
                den = den * (xi - xj) % p
        out.append(num * pow(den, -1, p) % p)
    return out


def bit_decompose_plain(x: DomainElement | int, m: int) -> list[int]:
    """Little-endian bits of x; raises Overflow if x does not fit in m bits."""
    v = x.value if isinstance(x, DomainElement) else x
    if v < 0 or v >> m:
        raise Overflow(f"{v} does not fit in {m} bits")
    return [(v >> i) & 1 for i in range(m)]


def recompose(bits: Sequence[int]) -> int:
    return sum(b << i for i, b in enumerate(bits))


class PRG:
    """SHAKE-256 in counter mode; deterministic for a given seed."""

    def __init__(self, seed: bytes | str | int):
        if isinstance(seed, int):
            seed = seed.to_bytes((seed.bit_length() + 8) // 8, "little", signed=True)
        elif isinstance(seed, str):
            seed = seed.encode()
        if not seed:
            raise ParamError("PRG seed must be non-empty")
        self._key = hashlib.sha256(b"mpcforge-prg" + seed).digest()
        self._counter = 0

    def random_bytes(self, n: int) -> bytes:
        block = hashlib.shake_256(self._key + self._counter.to_bytes(8, "little")).digest(n)
        self._counter += 1
        return block

    def randbits(self, nbits: int) -> int:
        if nbits <= 0:
            return 0
        raw = int.from_bytes(self.random_bytes((nbits + 7) // 8), "little")
        return raw & ((1 << nbits) - 1)

    def randbelow_many(self, modulus: int, count: int) -> list[int]:
        if count <= 0:
            return []
        if modulus & (modulus - 1) == 0:
            nbits = modulus.bit_length() - 1
            width = max(1, (nbits + 7) // 8)
            mask = modulus - 1
            raw = self.random_bytes(width * count)
            return [int.from_bytes(raw[i * width:(i + 1) * width], "little") & mask for i in range(count)]
        # 64 surplus bits make the modular bias negligible
        width = (modulus.bit_length() + 64 + 7) // 8
        raw = self.random_bytes(width * count)
        return [int.from_bytes(raw[i * width:(i + 1) * width], "little") % modulus for i in range(count)]

    def randbelow(self, modulus: int) -> int:
        return self.randbelow_many(modulus, 1)[0]

    def nonzero_below(self, modulus: int) -> int:
        return 1 + self.randbelow(modulus - 1)

    def fork(self, label: str | bytes) -> "PRG":
        if isinstance(label, str):
            label = label.encode()
        return PRG(self._key + b"/" + label)

    def shuffle(self, items: list) -> list:
        """Fisher-Yates permutation driven by this stream; returns a new list."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.randbelow(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def prg_sample(seed: bytes, params: DomainParams, n: int) -> list[DomainElement]:
    rng = PRG(seed)
    return [DomainElement(v, params) for v in rng.randbelow_many(params.modulus, n)]
