"""Benchmark harness: single runs, sweeps over a parameter grid, CSV/JSON reports."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .engine import ProtocolConfig, Runtime
from .errors import Abort, ConfigError, MPCError, TransportTimeout
from .kernels import KERNELS, execute, make_inputs
from .transport import BandwidthCap, make_network

log = logging.getLogger("mpcforge.bench")

SCHEMA_VERSION = 1
BANDWIDTHS = ("unlimited", "1g", "5g", "10g", "20g")
DEFAULT_TIMEOUT = 600.0

COLUMNS = ["schema", "family", "kernel", "n", "bits", "parties", "bandwidth", "backend", "seed",
           "validation", "conversion", "status", "latency", "global_bytes", "rounds", "triples_consumed",
           "dealer_bytes", "per_party", "domain", "input_owner", "git", "error"]


@dataclass
class RunReport:
    family: str
    kernel: str
    n: int
    bits: int
    parties: int
    bandwidth: str = "unlimited"
    backend: str = "mem"
    seed: int = 0
    validation: str = ""
    conversion: str = ""
    status: str = "ok"
    latency: float | None = None
    global_bytes: int | None = None
    rounds: int | None = None
    triples_consumed: int | None = None
    dealer_bytes: int | None = None
    per_party: list[int] = field(default_factory=list)
    domain: str = ""
    input_owner: int = 0
    git: str = ""
    error: str = ""
    schema: int = SCHEMA_VERSION

    def row(self) -> dict:
        d = asdict(self)
        d["per_party"] = ";".join(str(v) for v in self.per_party)
        return {k: ("" if d[k] is None else d[k]) for k in COLUMNS}


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             timeout=5, cwd=Path(__file__).resolve().parent)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def build_config(family: str, parties: int = 3, bits: int = 64, seed: int = 0, **extra) -> ProtocolConfig:
    return ProtocolConfig(family, n_parties=parties, bits=bits, seed=seed, **extra)


def run_benchmark(cfg: ProtocolConfig, kernel: str, n: int, bandwidth: str = "unlimited",
                  timeout: float = DEFAULT_TIMEOUT, backend: str = "mem", git: str | None = None) -> RunReport:
    """Offline and online phase of one kernel run; the clock covers both.

    Timed-out runs carry no byte figure. Aborts are reported, not raised.
    """
    if kernel not in KERNELS:
        raise ConfigError(f"unknown kernel {kernel!r}")
    if n < 1:
        raise ConfigError("n must be positive")
    cap = BandwidthCap.preset(bandwidth)
    rep = RunReport(cfg.family, kernel, n, cfg.bits, cfg.n_parties, bandwidth, backend, cfg.seed,
                    cfg.validation, cfg.conversion or "", domain=str(cfg.domain_params()),
                    git=git if git is not None else git_describe())
    data = make_inputs(cfg, kernel, n, cfg.seed)
    net = make_network(backend, cfg.n_parties, cap, record=False)
    t0 = time.perf_counter()
    net.deadline = t0 + timeout
    try:
        rt = Runtime(cfg, net)
        execute(rt, kernel, n, data)
        rep.status = "ok"
    except TransportTimeout as exc:
        rep.status = "timeout"
        rep.error = str(exc)
    except Abort as exc:
        rep.status = "abort"
        rep.error = str(exc)
    finally:
        net.close()
    rep.latency = time.perf_counter() - t0
    if rep.status == "timeout":
        return rep
    m = net.metrics
    rep.global_bytes = m.global_bytes
    rep.rounds = m.rounds
    rep.dealer_bytes = m.dealer_bytes
    rep.per_party = m.per_party()
    rep.triples_consumed = rt.s.counters.triples_consumed
    return rep


@dataclass
class SweepSpec:
    families: Sequence[str]
    kernels: Sequence[str]
    ns: Sequence[int]
    bits: Sequence[int] = (64,)
    parties: Sequence[int] = (3,)
    bandwidths: Sequence[str] = ("unlimited",)
    seed: int = 0
    timeout: float = DEFAULT_TIMEOUT
    backend: str = "mem"

    def cells(self) -> Iterable[tuple]:
        return itertools.product(self.families, self.kernels, self.ns, self.bits, self.parties, self.bandwidths)


def sweep(spec: SweepSpec) -> list[RunReport]:
    """One report per grid cell, one cell at a time; failures are recorded, not fatal."""
    reports = []
    git = git_describe()
    cells = list(spec.cells())
    if not cells:
        raise ConfigError("empty sweep")
    for fam, kernel, n, bits, parties, bw in cells:
        try:
            cfg = build_config(fam, parties, bits, spec.seed)
            rep = run_benchmark(cfg, kernel, n, bw, spec.timeout, spec.backend, git)
        except MPCError as exc:
            rep = RunReport(fam, kernel, n, bits, parties, bw, spec.backend, spec.seed, status="error",
                            error=str(exc), git=git)
        log.info("%s %s n=%d bits=%d p=%d %s: %s", fam, kernel, n, bits, parties, bw, rep.status)
        reports.append(rep)
    return reports


def emit_report(reports: Sequence[RunReport], path: str | Path, fmt: str = "csv") -> Path:
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS)
            w.writeheader()
            for r in reports:
                w.writerow(r.row())
    elif fmt == "json":
        path.write_text(json.dumps({"schema": SCHEMA_VERSION, "runs": [asdict(r) for r in reports]}, indent=1))
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    return path


def _parse_csv_value(key: str, raw: str):
    if raw == "":
        return [] if key == "per_party" else None
    if key == "per_party":
        return [int(v) for v in raw.split(";")]
    if key in ("n", "bits", "parties", "seed", "global_bytes", "rounds", "triples_consumed", "dealer_bytes",
               "input_owner", "schema"):
        return int(raw)
    if key == "latency":
        return float(raw)
    return raw


def load_report(path: str | Path) -> list[RunReport]:
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if doc.get("schema") != SCHEMA_VERSION:
            raise ConfigError("report schema version differs")
        return [RunReport(**r) for r in doc["runs"]]
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        kw = {k: _parse_csv_value(k, v) for k, v in row.items()}
        for k in ("validation", "conversion", "domain", "git", "error"):
            kw[k] = kw[k] or ""
        out.append(RunReport(**kw))
    return out


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _str_list(text: str) -> list[str]:
    return [v for v in text.split(",") if v]


def main(argv: Sequence[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="mpcforge", description="Run MPC kernels and report bytes, rounds and latency.")
    ap.add_argument("--family", type=_str_list, default=["Rep3Ring"], help="comma-separated families")
    ap.add_argument("--kernel", type=_str_list, default=["compare"], help=f"comma-separated, from {KERNELS}")
    ap.add_argument("--n", type=_int_list, default=[1024], help="comma-separated input sizes")
    ap.add_argument("--bits", type=_int_list, default=[64], help="integer width(s), e.g. 64,128")
    ap.add_argument("--parties", type=_int_list, default=[3])
    ap.add_argument("--bandwidth", type=_str_list, default=["unlimited"], help=f"from {BANDWIDTHS}")
    ap.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per run")
    ap.add_argument("--backend", choices=("mem", "tcp"), default="mem")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=None, help="report file (stdout table if omitted)")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--config", type=Path, default=None,
                    help="key=value protocol config for a single run (overrides --family/--parties/--bits)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    for bw in args.bandwidth:
        if bw not in BANDWIDTHS:
            ap.error(f"unknown bandwidth {bw!r}")
    try:
        if args.config is not None:
            cfg = ProtocolConfig.load(args.config)
            reports = [run_benchmark(cfg, k, n, bw, args.timeout, args.backend)
                       for k in args.kernel for n in args.n for bw in args.bandwidth]
        else:
            spec = SweepSpec(args.family, args.kernel, args.n, args.bits, args.parties, args.bandwidth,
                             args.seed, args.timeout, args.backend)
            reports = sweep(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.out is not None:
        emit_report(reports, args.out, args.format)
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=COLUMNS)
        w.writeheader()
        for r in reports:
            w.writerow(r.row())
    return 0 if all(r.status == "ok" for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
