"""Small-domain configurations shared by the engine, kernel and acceptance tests."""

from mpcforge.engine import ProtocolConfig

# every family in its native small domain: Z_31 for fields, Z_2^8 for rings, 8-bit words for binary
SMALL = {
    "Semi": dict(prime=31),
    "SpdzField": dict(prime=31),
    "Shamir": dict(prime=31),
    "MalShamir": dict(prime=31),
    "Semi2k": dict(bits=8),
    "Spdz2k": dict(bits=8),
    "Rep3Ring": dict(bits=8),
    "MalRepRing": dict(bits=8),
    "Rep4": dict(bits=8, n_parties=4),
    "FurukawaBin": dict(bits=8, value_bits=8),
}

FAMILY_NAMES = list(SMALL)
ARITH_FAMILIES = [f for f in SMALL if f != "FurukawaBin"]


def small_config(family: str, **extra) -> ProtocolConfig:
    kw = dict(SMALL[family])
    kw.update(extra)
    return ProtocolConfig(family, **kw)
