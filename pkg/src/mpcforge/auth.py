"""Multiplicative MACs: SPDZ over Z_p and SPDZ2k over Z_{2^{k+s}}."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import PRG, DomainElement, DomainParams, Kind
from .errors import Abort, DomainMismatch
from .sharing import Scheme, Share, reconstruct, share_additive


@dataclass(frozen=True)
class MacKeyShare:
    alpha_share: Share
    domain: DomainParams  # where tags live: Z_p, or Z_{2^{k+s}} for rings

    @property
    def party_id(self) -> int:
        return self.alpha_share.party_id


@dataclass(frozen=True)
class AuthShare:
    value_share: Share
    mac_share: Share

    @property
    def party_id(self) -> int:
        return self.value_share.party_id


def mac_domain(params: DomainParams) -> DomainParams:
    if params.kind is Kind.PRIME_FIELD:
        return params
    if params.kind is Kind.RING:
        return params.extend()
    raise DomainMismatch("MACs are defined for fields and rings only")


def deal_mac_key(params: DomainParams, n: int, dealer: PRG, alpha: int | None = None) -> list[MacKeyShare]:
    """Trusted-dealer key: alpha uniform in Z_p, or in Z_{2^s} for rings."""
    dom = mac_domain(params)
    if alpha is None:
        alpha = dealer.randbelow(params.modulus if params.kind is Kind.PRIME_FIELD else 1 << params.s)
    shares = share_additive(DomainElement(alpha % dom.modulus, dom), n, dealer)
    return [MacKeyShare(sh, dom) for sh in shares]


def authenticate(x_shares: Sequence[Share], keys: Sequence[MacKeyShare], dealer: PRG) -> list[AuthShare]:
    if any(sh.scheme is not Scheme.ADDITIVE for sh in x_shares):
        raise DomainMismatch("authentication expects additive shares")
    dom = keys[0].domain
    if x_shares[0].params != dom:
        raise DomainMismatch(f"value shares in {x_shares[0].params}, MAC domain is {dom}")
    x = reconstruct(x_shares)
    alpha = reconstruct([k.alpha_share for k in keys])
    mac_shares = share_additive(x * alpha, len(x_shares), dealer)
    return [AuthShare(v, m) for v, m in zip(x_shares, mac_shares)]


def _residual(x: int, mac_shares: Sequence[Share], keys: Sequence[MacKeyShare]) -> int:
    dom = keys[0].domain
    m = dom.modulus
    by_party = {k.party_id: k.alpha_share.payload[0] for k in keys}
    # each party's sigma_i = m_i - alpha_i * x; the opened sum must vanish
    return sum(sh.payload[0] - by_party[sh.party_id] * x for sh in mac_shares) % m


def mac_check_field(opened: Sequence[tuple[int, Sequence[Share], Sequence[MacKeyShare]]]) -> bool:
    for x, mac_shares, keys in opened:
        if keys[0].domain.kind is not Kind.PRIME_FIELD:
            raise DomainMismatch("field MAC check on a ring key")
        if _residual(int(x), mac_shares, keys):
            raise Abort("MAC check failed")
    return True


def mac_check_ring(opened: Sequence[tuple[int, Sequence[Share]]], keys: Sequence[MacKeyShare],
                   k: int, s: int) -> bool:
    dom = keys[0].domain
    if dom.modulus != 1 << (k + s):
        raise DomainMismatch(f"ring MAC key lives in {dom}, expected Z_2^{k + s}")
    for x, mac_shares in opened:
        if _residual(int(x), mac_shares, keys):
            raise Abort("MAC check failed")
    return True


def mac_check_batch(openings: Sequence[tuple[int, Sequence[Share]]], keys: Sequence[MacKeyShare],
                    rng: PRG) -> bool:
    """One random linear combination over all openings instead of one check each."""
    if not openings:
        return True
    m = keys[0].domain.modulus
    coeffs = rng.randbelow_many(m, len(openings))
    total = 0
    for r, (x, mac_shares) in zip(coeffs, openings):
        total += r * _residual(int(x), mac_shares, keys)
    if total % m:
        raise Abort("batched MAC check failed")
    return True
