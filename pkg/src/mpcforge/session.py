"""Execution context shared by all protocol instances of one run."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .algebra import PRG
from .errors import Abort
from .transport import InMemoryNetwork, MsgType, Network


@dataclass
class Counters:
    triples_consumed: int = 0  # Beaver triples used by online multiplications
    aux_consumed: int = 0  # triples sacrificed during validation
    mults: int = 0  # secure multiplications of any kind (lanes)
    and_gates: int = 0
    dabits: int = 0
    edabits: int = 0


class Session:
    """Network, seeded randomness and validation state for one run.

    Parties are simulated in one process: every value that crosses a party
    boundary is serialised and sent through ``net``, so byte and round
    counters reflect a real deployment. Pairwise / subset PRF keys are
    modelled by deterministic forks of a setup PRG (agreed before the run,
    no communication).
    """

    def __init__(self, n: int, net: Network | None = None, seed: int | str = 0):
        self.n = n
        self.net = net if net is not None else InMemoryNetwork(n)
        if self.net.n != n:
            raise ValueError("network size differs from party count")
        root = PRG(f"session:{seed}")
        self.seed = seed
        self.dealer = root.fork("dealer")
        self._setup = root.fork("setup")
        self.party_prg = [root.fork(f"party{i}") for i in range(n)]
        self.counters = Counters()
        self._keys: dict = {}
        self._joint: PRG | None = None
        self.mult_log: list = []  # (protocol, x, y, z) for postprocessing
        self.mac_openings: list = []  # (protocol, per-party views, SVec)
        self.finalizers: list = []
        self.closed = False

    def key(self, parties, label: str = "") -> PRG:
        """PRF stream known exactly to ``parties``; set up once, free to use."""
        ident = (tuple(sorted(parties)), label)
        if ident not in self._keys:
            self._keys[ident] = self._setup.fork(f"{ident}")
        return self._keys[ident]

    def joint_prg(self) -> PRG:
        """Public coins from one commit-reveal round, then expanded locally."""
        if self._joint is None:
            seeds = [p.random_bytes(16) for p in self.party_prg]
            commits = [hashlib.sha256(s).digest() for s in seeds]
            self.net.exchange_all(MsgType.COMMIT, commits)
            views = self.net.exchange_all(MsgType.COMMIT, seeds)
            for dst in range(self.n):
                for src in range(self.n):
                    if hashlib.sha256(views[dst][src]).digest() != commits[src]:
                        raise Abort("coin-toss reveal does not match its commitment")
            mixed = bytes(16)
            for s in views[0]:
                mixed = bytes(a ^ b for a, b in zip(mixed, s))
            self._joint = PRG(mixed)
        return self._joint

    def finalize(self) -> bool:
        """Run every deferred check registered by protocols; abort on failure."""
        try:
            for fn in list(self.finalizers):
                fn()
        except Abort:
            self.closed = True
            raise
        return True
