"""ellq: numerics for elliptic theta/Gamma functions, eight-vertex SOS
structures, Baxter TQ equations, the discrete Liouville equation and the
spectrum of the associated integrable model."""

from .elliptic import (
    DEFAULT_CTX,
    DEFAULT_POLICY,
    ModularData,
    PrecisionContext,
    TruncationPolicy,
)

__all__ = [
    "ModularData",
    "PrecisionContext",
    "TruncationPolicy",
    "DEFAULT_CTX",
    "DEFAULT_POLICY",
]

__version__ = "0.1.0"
