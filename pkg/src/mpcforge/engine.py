"""Protocol families and the online runtime that kernels program against.

``ProtocolConfig`` names a family and its knobs; ``Runtime`` builds the
arithmetic and binary protocols for that family, the conversion machinery
between them, and the deferred validation that runs at the end.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

from .algebra import DomainParams, is_prime
from .circuits import BitOps, carry_tree_pub, carry_tree_shared, less_than
from .conversion import (DaBit, EdaBit, a2b_local, a2b_local_csa, bit2a_local, bits_to_arith,
                         decompose_bounded, edabit_convert)
from .domains import BitDomain, ModDomain, to_planes
from .errors import Abort, ConfigError, InsufficientRandomness, ParamError
from .preprocessing import (BeaverTriple, dealer_edabits, gen_dabits, gen_edabits, gen_random_bits,
                            ot_source, postprocess_check, validated_source)
from .protocols import (AdditiveProtocol, FurukawaProtocol, Protocol, Rep3Protocol, Rep4Protocol,
                        SVec, ShamirProtocol)
from .session import Session
from .transport import Network

FAMILIES = ("Semi", "Semi2k", "Rep3Ring", "MalRepRing", "SpdzField", "Spdz2k", "Shamir", "MalShamir",
            "Rep4", "FurukawaBin")
VALIDATIONS = ("sacrifice", "batch_poly", "ring_check", "postprocess", "bucket_cnc", "none")
CONVERSIONS = ("local", "edabit", "dabit", "off")

FIELD_FAMILIES = {"Semi", "SpdzField", "Shamir", "MalShamir"}
MALICIOUS = {"MalRepRing", "SpdzField", "Spdz2k", "MalShamir"}
SEMI_HONEST_PEER = {"SpdzField": "Semi", "Spdz2k": "Semi2k", "MalRepRing": "Rep3Ring", "MalShamir": "Shamir"}

# allowed validations per family; the first entry is the default
_FAMILY_VALIDATION = {
    "Semi": ("none",), "Semi2k": ("none",), "Rep3Ring": ("none",), "Shamir": ("none",), "Rep4": ("none",),
    "SpdzField": ("sacrifice", "batch_poly", "bucket_cnc"),
    "Spdz2k": ("ring_check",),
    "MalRepRing": ("postprocess",),
    "MalShamir": ("postprocess",),
    "FurukawaBin": ("bucket_cnc", "none"),
}

# default primes for field families, by requested width
_FIELD_PRIMES = {64: (1 << 64) - 59, 128: (1 << 128) - 159}


def default_prime(bits: int) -> int:
    """Largest prime below 2^bits (table for the standard widths)."""
    if bits in _FIELD_PRIMES:
        return _FIELD_PRIMES[bits]
    p = (1 << bits) - 1
    while p > 2 and not is_prime(p):
        p -= 2
    return p


@dataclass
class ProtocolConfig:
    family: str
    n_parties: int = 3
    bits: int = 64
    prime: int | None = None
    stat_sec: int = 40
    validation: str | None = None
    conversion: str | None = None
    value_bits: int = 32
    triples: str = "dealer"
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.validation is None:
            self.validation = _FAMILY_VALIDATION[self.family][0]
        if self.conversion is None and self.family != "FurukawaBin":
            self.conversion = "local" if self.family == "Rep3Ring" else "edabit"
        if self.family in FIELD_FAMILIES and self.prime is None:
            self.prime = default_prime(self.bits)
        self.check()

    @property
    def is_field(self) -> bool:
        return self.family in FIELD_FAMILIES

    @property
    def malicious(self) -> bool:
        if self.family == "FurukawaBin":
            return self.validation != "none"
        return self.family in MALICIOUS

    @property
    def threshold(self) -> int:
        if self.family in ("Shamir", "MalShamir"):
            return (self.n_parties - 1) // 2
        if self.family.startswith("Rep") or self.family in ("MalRepRing", "FurukawaBin"):
            return 1
        return self.n_parties - 1

    def check(self) -> None:
        n = self.n_parties
        f = self.family
        if f in ("Rep3Ring", "MalRepRing", "FurukawaBin") and n != 3:
            raise ConfigError(f"{f} runs with exactly 3 parties")
        if f == "Rep4" and n != 4:
            raise ConfigError("Rep4 runs with exactly 4 parties")
        if f in ("Shamir", "MalShamir") and n < 3:
            raise ConfigError("Shamir needs 2t+1 <= n with t >= 1, so n >= 3")
        if n < 2:
            raise ConfigError("need at least 2 parties")
        if self.validation not in _FAMILY_VALIDATION[f]:
            raise ConfigError(f"{f} supports validation {_FAMILY_VALIDATION[f]}, not {self.validation!r}")
        if f == "FurukawaBin":
            if self.conversion not in (None, "off"):
                raise ConfigError("FurukawaBin is binary only and has no conversion")
        elif self.conversion not in CONVERSIONS:
            raise ConfigError(f"unknown conversion {self.conversion!r}")
        elif self.conversion == "local" and f != "Rep3Ring":
            raise ConfigError("local conversion needs semi-honest replicated ring shares (Rep3Ring)")
        if self.is_field:
            if not is_prime(self.prime):
                raise ConfigError(f"{self.prime} is not prime")
            if self.prime <= 2:
                raise ConfigError("field families need an odd prime")
        elif self.bits < 2:
            raise ConfigError("ring width must be at least 2 bits")
        if self.value_bits < 1:
            raise ConfigError("value_bits must be positive")
        if self.triples not in ("dealer", "ot"):
            raise ConfigError("triples must be 'dealer' or 'ot'")
        if self.triples == "ot" and f not in ("Semi", "Semi2k"):
            raise ConfigError("OT triples are wired for the semi-honest additive families")

    def domain_params(self) -> DomainParams:
        if self.family == "FurukawaBin":
            return DomainParams.binary()
        if self.is_field:
            return DomainParams.field(self.prime)
        return DomainParams.ring(self.bits, self.stat_sec, self.family in ("Spdz2k", "MalRepRing"))

    @property
    def ell(self) -> int:
        """Bit length of kernel values: inputs lie in [0, 2^ell) (and below p)."""
        if self.is_field:
            return min(self.value_bits, self.prime.bit_length())
        return min(self.value_bits, self.bits)

    @property
    def plain_modulus(self) -> int:
        """Modulus the kernels' plaintext oracle computes in."""
        if self.family == "FurukawaBin":
            return 1 << self.ell
        return self.prime if self.is_field else 1 << self.bits

    # key=value files
    def dumps(self) -> str:
        return "".join(f"{k}={'' if v is None else v}\n" for k, v in asdict(self).items())

    @classmethod
    def loads(cls, text: str) -> "ProtocolConfig":
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            if "=" not in ln:
                raise ConfigError(f"bad config line {ln!r}")
            k, v = (t.strip() for t in ln.split("=", 1))
            if k not in types:
                raise ConfigError(f"unknown config key {k!r}")
            if v == "":
                kw[k] = None
            elif "int" in str(types[k]):
                kw[k] = int(v, 0)
            else:
                kw[k] = v
        if "family" not in kw:
            raise ConfigError("config needs a family")
        return cls(**kw)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "ProtocolConfig":
        return cls.loads(Path(path).read_text())


class Runtime:
    """One run of one family: protocols, conversions, validation.

    Kernels see three worlds: ``arith`` (None for FurukawaBin), ``binary``,
    and the bit world ``bitp`` in which decomposed bits live (the arithmetic
    protocol itself when conversion is ``off``).
    """

    def __init__(self, config: ProtocolConfig, net: Network | None = None, seed: int | None = None):
        self.cfg = config
        self.s = Session(config.n_parties, net, config.seed if seed is None else seed)
        self.net = self.s.net
        self.params = config.domain_params()
        self.arith: Protocol | None = None
        self.binary: Protocol = self._build_binary()
        if config.family != "FurukawaBin":
            self.arith = self._build_arith()
        self.conversion = config.conversion
        self.bitp = self.arith if self.conversion == "off" else self.binary
        self.bo = BitOps(self.bitp)
        logged = [p for p in (self.arith, self.binary) if p is not None and p.log_products]
        if logged:
            self.s.finalizers.insert(0, lambda: postprocess_check(self.s.mult_log, self.s))

    # -- construction
    def _build_binary(self) -> Protocol:
        f = self.cfg.family
        s = self.s
        bit = BitDomain()
        if f == "Rep3Ring":
            return Rep3Protocol(s, bit)
        if f == "Rep4":
            return Rep4Protocol(s, bit)
        if f in ("MalRepRing", "FurukawaBin"):
            p = FurukawaProtocol(s, bit, malicious=self.cfg.malicious)
            p.log_products = self.cfg.malicious
            return p
        p = AdditiveProtocol(s, bit, malicious=self.cfg.malicious)
        if self.cfg.malicious:
            # AND triples checked by the (deterministic over bits) pairwise sacrifice
            p.triple_source = validated_source("sacrifice")
        return p

    def _build_arith(self) -> Protocol:
        cfg = self.cfg
        f = cfg.family
        s = self.s
        dom = ModDomain(self.params.modulus, self.params)
        out = 1 << cfg.bits if self.params.extended else None
        if f in ("Semi", "Semi2k"):
            p = AdditiveProtocol(s, dom)
            if cfg.triples == "ot":
                p.triple_source = ot_source
        elif f in ("SpdzField", "Spdz2k"):
            p = AdditiveProtocol(s, dom, malicious=True, mac=True, out_modulus=out)
            p.triple_source = validated_source(cfg.validation)
        elif f in ("Rep3Ring", "MalRepRing"):
            p = Rep3Protocol(s, dom, malicious=f == "MalRepRing", out_modulus=out)
        elif f in ("Shamir", "MalShamir"):
            p = ShamirProtocol(s, dom, malicious=f == "MalShamir")
        elif f == "Rep4":
            p = Rep4Protocol(s, dom)
        else:  # pragma: no cover - guarded by ProtocolConfig.check
            raise ConfigError(f)
        p.log_products = cfg.validation == "postprocess"
        return p

    # -- inputs and outputs
    @property
    def ell(self) -> int:
        return self.cfg.ell

    def input(self, owner: int, ints: Sequence[int]) -> SVec:
        return self.arith.input(owner, [int(v) for v in ints])

    def input_bits(self, owner: int, ints: Sequence[int], m: int | None = None) -> list[SVec]:
        """Values entered directly as little-endian binary words."""
        m = m or self.ell
        lanes = len(ints)
        planes = to_planes([int(v) for v in ints], m)
        flat = []
        for pl in planes:
            flat += self.binary.dom.to_ints(pl, lanes)
        return self.binary.split(self.binary.input(owner, flat), [lanes] * m)

    def reveal(self, x: SVec) -> list[int]:
        return self.arith.reveal(x)

    def reveal_bits(self, bits: Sequence[SVec]) -> list[int]:
        """Open little-endian words held in the bit world."""
        p = bits[0].proto
        lanes = bits[0].lanes
        opened = p.open_many(list(bits))
        out = [0] * lanes
        for i, v in enumerate(opened):
            for j, b in enumerate(p.dom.to_ints(v, lanes)):
                out[j] |= (int(b) & 1) << i
        return out

    # -- decomposition
    def _sigma(self, m: int) -> int:
        p = self.params.modulus
        return min(self.cfg.stat_sec, p.bit_length() - m - math.ceil(math.log2(self.cfg.n_parties)) - 3)

    def bounded_ok(self, m: int) -> bool:
        """Whether an m-bit value can be decomposed by masking without wrap-around."""
        if self.cfg.is_field:
            return self._sigma(m) >= 8
        return m <= self.cfg.bits

    def full_width(self) -> int:
        return self.params.modulus.bit_length() if self.cfg.is_field else self.cfg.bits

    def _mask_bits(self, count: int, m: int):
        """(r, bits of r) for a masked decomposition of m low bits."""
        a = self.arith
        mode = self.conversion
        if mode == "edabit":
            if self.cfg.is_field and self.cfg.n_parties << m >= self.params.modulus:
                e = dealer_edabits(count, m, a, self.binary, bound=self.params.modulus)
            else:
                e = gen_edabits(count, m, a, self.binary, width=m)
            return e.arith, e.bits[:m]
        if mode == "dabit":
            d = [gen_dabits(count, a, self.binary) for _ in range(m)]
            r = a.sum([a.scale(x.arith, 1 << i) for i, x in enumerate(d)])
            return r, [x.binary for x in d]
        # off: random bits live in the arithmetic protocol itself
        with a.offline():
            rb = gen_random_bits(count * m, a)
        bits = a.split(rb, [count] * m)
        r = a.sum([a.scale(b, 1 << i) for i, b in enumerate(bits)])
        return r, bits

    def _mask_high(self, count: int, m: int) -> SVec:
        a = self.arith
        with a.offline():
            if not self.cfg.is_field:
                return a.random(count)
            sigma = self._sigma(m)
            vals = [self.s.party_prg[i].randbelow_many(1 << sigma, count) for i in range(a.n)]
            return a.sum([a.input(i, v) for i, v in enumerate(vals)])

    def decompose(self, x: SVec, m: int) -> list[SVec]:
        """Low m bits of x, for 0 <= x < 2^m (or any ring value when m = k)."""
        if self.conversion == "local":
            return a2b_local(x, self.binary, m)
        if self.bounded_ok(m):
            r, rbits = self._mask_bits(x.lanes, m)
            high = self._mask_high(x.lanes, m) if (self.cfg.is_field or m < self.cfg.bits
                                                    or self.params.extended) else self.arith.zeros(x.lanes)
            return decompose_bounded(x, m, rbits, r, high)
        return self.decompose_full(x)[:m]

    def decompose_full(self, x: SVec) -> list[SVec]:
        """All bits of a field element (values in [0, p))."""
        a = self.arith
        w = self.full_width()
        p = self.params.modulus
        if self.conversion == "edabit":
            e = dealer_edabits(x.lanes, w, a, self.binary, bound=p)
        else:
            if p != (1 << w) - 1:
                raise ConfigError("full decomposition from independent random bits needs a Mersenne prime")
            r, rbits = self._mask_bits(x.lanes, w)
            e = EdaBit(r, rbits)
        return edabit_convert(x, e)

    def lt_bit(self, a: SVec, b: SVec) -> SVec:
        """[a < b] in the bit world for kernel values (unsigned, below 2^ell)."""
        l = self.ell
        m = l + 1
        ar = self.arith
        if self.conversion == "local" and m <= self.cfg.bits:
            d = ar.add_public(ar.sub(a, b), ar.pub_full(a.lanes, 1 << l))
            s, c = a2b_local_csa(d, self.binary, m)
            bo = self.bo
            car = carry_tree_shared(bo, s[:l], c[:l]) if l else self.binary.zeros(a.lanes)
            top = self.binary.add(self.binary.add(s[l], c[l]), car)
            return bo.not_(top)
        if self.conversion != "local" and self.bounded_ok(m):
            d = ar.add_public(ar.sub(a, b), ar.pub_full(a.lanes, 1 << l))
            r, rbits = self._mask_bits(a.lanes, m)
            high = self._mask_high(a.lanes, m) if (self.cfg.is_field or m < self.cfg.bits
                                                    or self.params.extended) else ar.zeros(a.lanes)
            masked = ar.add(ar.add(d, r), ar.scale(high, 1 << m))
            cval = ar.dom.to_ints(ar.open(masked), a.lanes)
            bo = self.bo
            cpl = [bo.plane(pl, a.lanes) for pl in to_planes(cval, m)]
            # bit l of c - r = c + ~r + 1: c_l ^ ~r_l ^ carry of the low l positions
            notr = [bo.not_(x) for x in rbits[:m]]
            car = carry_tree_pub(bo, cpl[:l], notr[:l], cin=1) if l else bo.const(1, a.lanes)
            top = bo.xor_pub(self.bitp.add(notr[l], car), cpl[l]) if bo.binary else \
                bo.xor_pub(bo.xor_many([(notr[l], car)])[0], cpl[l])
            return bo.not_(top)
        # small domains: compare the full decompositions
        both = self.decompose_pair_full(a, b)
        return less_than(self.bo, both[0], both[1])

    def decompose_pair_full(self, a: SVec, b: SVec) -> tuple[list[SVec], list[SVec]]:
        ar = self.arith
        n = a.lanes
        x = ar.concat([a, b])
        if self.conversion == "local":
            bits = a2b_local(x, self.binary, self.cfg.bits)
        elif self.cfg.is_field:
            bits = self.decompose_full(x)
        else:
            bits = self.decompose(x, self.cfg.bits)
        p = self.bitp
        return [p.take(v, 0, n) for v in bits], [p.take(v, n, n) for v in bits]

    def to_arith(self, bits: Sequence[SVec]) -> list[SVec]:
        """Bit-world bits as arithmetic 0/1 values."""
        if not bits:
            return []
        if self.bitp is self.arith:
            return list(bits)
        if self.conversion == "local":
            return bit2a_local(bits, self.arith)
        b = self.binary
        lanes = [v.lanes for v in bits]
        cat = b.concat(list(bits))
        d = gen_dabits(cat.lanes, self.arith, b)
        (res,) = bits_to_arith([cat], [DaBit(d.arith, d.binary)])
        return self.arith.split(res, lanes)

    # -- end of run
    def finish(self) -> bool:
        return run_validation(self.s)


# -- named engine operations

def open_value(x: SVec):
    """Open a shared vector to all parties (echo/MAC/replica checks per protocol)."""
    return x.proto.open(x)


def beaver_multiply(x: SVec, y: SVec, triple: BeaverTriple | None = None) -> SVec:
    """x*y with one Beaver triple: eps = a + x, delta = b + y opened in one round."""
    proto = x.proto
    if triple is None:
        return proto.mul(x, y)
    if triple.lanes < x.lanes:
        raise InsufficientRandomness("triple batch shorter than the operands")
    z = proto.beaver(x, y, triple.take(0, x.lanes).astuple())
    proto._count_triples(x.lanes)
    return z


def secure_input_field(proto: AdditiveProtocol, owner: int, values: Sequence[int]) -> SVec:
    if not proto.dom.is_field:
        raise ParamError("secure_input_field needs a prime field protocol")
    vec = proto.dom.vec(values)
    return proto.secure_input(owner, vec, len(values)) if proto.authenticated else proto.input(owner, values)


def secure_input_ring(proto: AdditiveProtocol, owner: int, values: Sequence[int]) -> SVec:
    """Masked input carried in Z_{2^{k+s}}; the value reconstructs mod 2^k."""
    if proto.dom.is_field or proto.dom.binary:
        raise ParamError("secure_input_ring needs a ring protocol")
    vec = proto.dom.vec(values)
    return proto.secure_input(owner, vec, len(values)) if proto.authenticated else proto.input(owner, values)


def sh_and(x: SVec, y: SVec) -> SVec:
    if not isinstance(x.proto, FurukawaProtocol):
        raise ParamError("sh_and works on Furukawa binary shares")
    return x.proto.mul(x, y)


def rep4_input(proto: Rep4Protocol, values: Sequence[int], known_to: Sequence[int]) -> SVec:
    return proto.input_known(values, known_to)


def rep4_multiply(x: SVec, y: SVec) -> SVec:
    if not isinstance(x.proto, Rep4Protocol):
        raise ParamError("rep4_multiply works on Rep4 shares")
    return x.proto.mul(x, y)


def run_validation(session: Session) -> bool:
    """Run the deferred checks; any failure closes the session and raises Abort."""
    if session.closed:
        raise Abort("session already aborted")
    return session.finalize()
