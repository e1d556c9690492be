"""Truncated Laurent objects for functions on the u-plane.

SymmetricLaurent represents f(u) = c0 + sum_{k=1..K} c_k (u^k + u^{-k}),
i.e. functions invariant under u -> 1/u.  Arithmetic closes at the
truncation order K; any dropped mode sets the ``truncated`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SymmetricLaurent:
    """c0 + sum_{k>=1} c_k (u^k + u^{-k}) up to mode K."""

    coeffs: np.ndarray          # index k = 0..K
    truncated: bool = False

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, c, order=0):
        a = np.zeros(order + 1, dtype=complex)
        a[0] = c
        return cls(a)

    def __call__(self, u):
        u = complex(u)
        tot = self.coeffs[0]
        uk = 1.0 + 0j
        for k in range(1, len(self.coeffs)):
            uk *= u
            tot += self.coeffs[k] * (uk + 1 / uk)
        return tot

    def __add__(self, other):
        if not isinstance(other, SymmetricLaurent):
            out = self.coeffs.copy()
            out[0] += other
            return SymmetricLaurent(out, self.truncated)
        n = max(self.order, other.order) + 1
        out = np.zeros(n, dtype=complex)
        out[: self.order + 1] += self.coeffs
        out[: other.order + 1] += other.coeffs
        return SymmetricLaurent(out, self.truncated or other.truncated)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, SymmetricLaurent):
            return self + SymmetricLaurent(-other.coeffs, other.truncated)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, SymmetricLaurent):
            return SymmetricLaurent(self.coeffs * other, self.truncated)
        # full Laurent convolution, projected back on symmetric modes
        K = self.order + other.order
        full = np.zeros(2 * K + 1, dtype=complex)  # modes -K..K
        for k1, c1 in self._modes():
            for k2, c2 in other._modes():
                full[K + k1 + k2] += c1 * c2
        out = np.empty(K + 1, dtype=complex)
        out[0] = full[K]
        for k in range(1, K + 1):
            # symmetric input => full[K+k] == full[K-k]
            out[k] = (full[K + k] + full[K - k]) / 2
        trunc = self.truncated or other.truncated
        cap = max(self.order, other.order)
        if K > cap and np.any(np.abs(out[cap + 1 :]) > 0):
            trunc = True
        return SymmetricLaurent(out[: cap + 1], trunc)

    __rmul__ = __mul__

    def _modes(self):
        yield 0, self.coeffs[0]
        for k in range(1, len(self.coeffs)):
            if self.coeffs[k] != 0:
                yield k, self.coeffs[k]
                yield -k, self.coeffs[k]

    def scaled_eval(self, s, u):
        """f(s*u) evaluated pointwise (the scaled function is not symmetric)."""
        return self(complex(s) * complex(u))

    def truncate(self, K):
        if K >= self.order:
            return self
        dropped = np.any(np.abs(self.coeffs[K + 1 :]) > 0)
        return SymmetricLaurent(self.coeffs[: K + 1].copy(), self.truncated or dropped)
