"""Secret-sharing MPC protocol families with an instrumented benchmark harness."""

from .algebra import DomainElement, DomainParams, Kind
from .engine import FAMILIES, ProtocolConfig, Runtime
from .errors import Abort, ConfigError, MPCError
from .kernels import KERNELS, compare_vectors, execute, inner_product, matmul, radix_sort
from .session import Session

__all__ = [
    "Abort", "ConfigError", "DomainElement", "DomainParams", "FAMILIES", "KERNELS", "Kind", "MPCError",
    "ProtocolConfig", "Runtime", "Session", "compare_vectors", "execute", "inner_product", "matmul",
    "radix_sort",
]
