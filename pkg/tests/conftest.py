import math
from collections import Counter

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def chi2_uniform_ok(samples, modulus: int) -> bool:
    """Chi-square statistic within 3 sigma of its mean under uniformity."""
    n = len(samples)
    counts = Counter(samples)
    expect = n / modulus
    stat = sum((counts.get(v, 0) - expect) ** 2 / expect for v in range(modulus))
    df = modulus - 1
    return abs(stat - df) <= 3 * math.sqrt(2 * df)


def within_3sigma(hits: int, trials: int, p: float) -> bool:
    sigma = math.sqrt(p * (1 - p) / trials)
    return abs(hits / trials - p) <= 3 * sigma


CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
