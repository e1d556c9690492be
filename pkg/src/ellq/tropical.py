"""Tropical (p, q -> 0) spectrum: the polynomial G_m, its reciprocal root
pairs, the partition of pairs into P- and H-parts, and the tropical TQ
identity

    t^{(-m)}(u) P_m^{(0)}(u) = (1-uv)^N u^{-m} + (v-u)^N u^m = (-u)^N G_m(u).

Everything is exact polynomial arithmetic on the expanded form
W(u) = u^{m+N} G_m(u) = u^{2m} (u-v)^N + (uv-1)^N of degree 2m+N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import mpmath
import numpy as np
import numpy.polynomial.polynomial as npoly

from .errors import ClassificationError, DegeneracyError, PairingError


@dataclass(frozen=True)
class RootPair:
    """A reciprocal pair (xi, 1/xi) with |xi| >= 1 as the representative."""

    xi: complex

    @property
    def mate(self):
        return 1 / self.xi

    def sort_key(self):
        return (round(abs(self.xi), 12), round(np.angle(self.xi), 12))


@dataclass(frozen=True)
class SpectralState:
    """Classification label of an excited state: which root pairs of G_m
    build P_m^{(0)} (the rest, plus u=1 for odd N, build H^{(0)})."""

    N: int
    m: int
    v: complex
    pairs: tuple            # all RootPairs, canonically sorted
    p_indices: tuple        # indices into ``pairs`` assigned to the P-part
    has_unit_root: bool

    @property
    def pairs_P(self):
        return tuple(self.pairs[i] for i in self.p_indices)

    @property
    def pairs_H(self):
        return tuple(p for i, p in enumerate(self.pairs) if i not in self.p_indices)

    def p_poly(self):
        """u^m P_m^{(0)}(u) as ascending coefficients (monic, degree 2m)."""
        poly = np.array([1.0 + 0j])
        for pr in self.pairs_P:
            poly = npoly.polymul(poly, [pr.xi * pr.mate, -(pr.xi + pr.mate), 1.0])
        return poly

    def h_poly(self):
        """u^N H^{(0)}(u) as ascending coefficients (monic, degree N)."""
        poly = np.array([1.0 + 0j])
        if self.has_unit_root:
            poly = npoly.polymul(poly, [-1.0, 1.0])
        for pr in self.pairs_H:
            poly = npoly.polymul(poly, [pr.xi * pr.mate, -(pr.xi + pr.mate), 1.0])
        return poly

    def p_laurent(self, u):
        """P_m^{(0)}(u) = u^{-m} prod (u - xi)(u - 1/xi)."""
        return npoly.polyval(u, self.p_poly()) * u ** (-self.m)

    def h_coeffs(self):
        """H^{(0)} decomposition coefficients [1, H_1, ..., H_N] in 1/u."""
        return self.h_poly()[::-1]


def g_polynomial(m, N, v):
    """Ascending coefficients of W(u) = u^{m+N} G_m(u) = u^{2m}(u-v)^N + (uv-1)^N."""
    if m < 0 or N < 1:
        raise ValueError("need m >= 0 and N >= 1")
    if v == 0:
        raise ValueError("v must be nonzero")
    a = npoly.polypow([-v, 1.0], N)        # (u - v)^N
    b = npoly.polypow([-1.0, v], N)        # (uv - 1)^N
    W = np.zeros(2 * m + N + 1, dtype=complex)
    W[2 * m: 2 * m + N + 1] += a
    W[: N + 1] += b
    return W


def _newton_polish(coeffs, roots, dps=40, steps=12):
    """Polish companion-matrix roots at elevated precision."""
    with mpmath.workdps(dps):
        cs = [mpmath.mpc(c) for c in coeffs]
        ds = [k * cs[k] for k in range(1, len(cs))]
        out = []
        for r in roots:
            z = mpmath.mpc(r)
            for _ in range(steps):
                pv = mpmath.polyval(cs[::-1], z)
                dv = mpmath.polyval(ds[::-1], z)
                if dv == 0:
                    break
                step = pv / dv
                z -= step
                if abs(step) < mpmath.mpf(10) ** (-dps + 5):
                    break
            out.append(complex(z))
        return out


def find_root_pairs(coeffs, pair_tol=1e-8, degeneracy_tol=1e-8):
    """All roots of the expanded polynomial, paired as (xi, 1/xi).

    Returns (pairs, has_unit_root).  Roots are polished by Newton at
    elevated precision; an unpairable root raises PairingError, colliding
    roots raise DegeneracyError.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    roots = list(np.roots(coeffs[::-1]))
    roots = _newton_polish(coeffs, roots)
    scale = np.max(np.abs(coeffs))
    for r in roots:
        val = abs(npoly.polyval(r, coeffs))
        if val > 1e-10 * scale * max(1.0, abs(r)) ** (len(coeffs) - 1):
            raise PairingError(f"root refinement failed at {r} (|W|={val:.2e})")
    for i, j in itertools.combinations(range(len(roots)), 2):
        if abs(roots[i] - roots[j]) < degeneracy_tol * max(1.0, abs(roots[i])):
            raise DegeneracyError(
                f"multiple root near {roots[i]}; perturb v to break degeneracy")
    has_unit = False
    unpaired = list(roots)
    unit_idx = None
    for i, r in enumerate(unpaired):
        if abs(r - 1) < pair_tol:
            unit_idx = i
            break
    if unit_idx is not None:
        has_unit = True
        unpaired.pop(unit_idx)
    pairs = []
    while unpaired:
        r = unpaired.pop(0)
        best_j, best_d = None, None
        for j, s in enumerate(unpaired):
            d = abs(r * s - 1)
            if best_d is None or d < best_d:
                best_j, best_d = j, d
        if best_j is None or best_d > pair_tol:
            raise PairingError(f"no reciprocal mate for root {r} (best |xi xi'-1|={best_d})")
        s = unpaired.pop(best_j)
        rep = r if abs(r) >= abs(s) else s
        if abs(abs(rep) - 1) < 1e-12:  # tie on the unit circle: break by arg
            rep = r if np.angle(r) >= np.angle(s) else s
        pairs.append(RootPair(rep))
    pairs.sort(key=RootPair.sort_key)
    return tuple(pairs), has_unit


def enumerate_states(N, m, v):
    """All C(#pairs, m) spectral states of (N, m) at parameter v."""
    W = g_polynomial(m, N, v)
    pairs, has_unit = find_root_pairs(W)
    want = m + (N // 2 if N % 2 == 0 else (N - 1) // 2)
    if len(pairs) != want:
        raise PairingError(f"expected {want} pairs, found {len(pairs)}")
    if (N % 2 == 1) != has_unit:
        raise PairingError("unit root presence inconsistent with parity of N")
    states = []
    for combo in itertools.combinations(range(len(pairs)), m):
        states.append(SpectralState(N, m, v, pairs, combo, has_unit))
    return states


def tropical_t(state: SpectralState, rel_tol=1e-10):
    """Coefficients of t^{(-m)}(u) = (-u)^N G_m(u) / P_m^{(0)}(u) by exact
    polynomial division (ascending, degree N).  A nonvanishing remainder
    raises ClassificationError."""
    W = g_polynomial(state.m, state.N, state.v)
    numer = (-1) ** state.N * W      # (-u)^N G_m(u) * u^{2m} / u^m-normalizations
    denom = state.p_poly()
    quot, rem = npoly.polydiv(numer, denom)
    scale = np.max(np.abs(W))
    if len(rem) and np.max(np.abs(rem)) > rel_tol * scale:
        raise ClassificationError(
            f"polynomial division has remainder {np.max(np.abs(rem)):.2e}")
    return quot


def tropical_tq_residual(state: SpectralState, u):
    """Residual of t^{(-m)}(u) P_m^{(0)}(u) - (1-uv)^N u^{-m} - (v-u)^N u^m."""
    v, N, m = state.v, state.N, state.m
    t = npoly.polyval(u, tropical_t(state))
    P = state.p_laurent(u)
    return t * P - (1 - u * v) ** N * u ** (-m) - (v - u) ** N * u ** m
