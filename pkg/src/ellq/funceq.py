"""Baxter TQ equations in multiplicative variables, the discrete Liouville
equation and its pole-stripped form, and transfer-polynomial utilities.

Multiplicative conventions (u, v, q, p) = e^{2 pi i (x, y, tau, eta)}:

    t_q(u) chi(u) = h_q(uv)^N chi(pu) + v^N h_q(u/v)^N chi(u/p)
    t_p(u) chi(u) = h_p(uv)^N chi(qu) + v^N h_p(u/v)^N chi(u/q)

    chi(pqu) chi(u) - v^N chi(pu) chi(qu) = R(u),
    R(u) = R0 (Gamma(1/uv)/Gamma(v/u))^N

    chi(u) = H(u) / [(pq/(uv); p,q)_inf (pq u/v; p,q)_inf]^N

    H(pqu) H(u) - v^N (1 - 1/(uv))^N (1 - pq u/v)^N H(pu) H(qu) = S(u),
    S(u) = R0 (v/u, p^2 q^2 u/v, pq uv, pq/(uv); p,q)_inf^N

Note the N-th power on chi's pole prefactor: it is required for the H-form
displays to be exactly equivalent to the chi-form, and is verified by
tests/test_funceq.py.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .elliptic import DEFAULT_CTX, DEFAULT_POLICY, ell_gamma, h, qpoch2
from .errors import DomainError
from .laurent import SymmetricLaurent


@dataclass
class ChiFunction:
    """Q-eigenvalue chi(u) represented by the entire part H plus the
    explicit pole prefactor [(pq/(uv), pq u/v; p, q)_inf]^{-N}."""

    H: SymmetricLaurent
    v: complex
    p: complex
    q: complex
    N: int
    ctx: object = DEFAULT_CTX
    policy: object = DEFAULT_POLICY

    def denominator(self, u):
        p, q, v = self.p, self.q, self.v
        return (qpoch2(p * q / (u * v), p, q, self.ctx, self.policy)
                * qpoch2(p * q * u / v, p, q, self.ctx, self.policy)) ** self.N

    def __call__(self, u):
        return self.H(u) / self.denominator(u)


def strip_poles(chi: ChiFunction) -> SymmetricLaurent:
    """The entire part H of a ChiFunction in explicit form."""
    return chi.H


def liouville_R(u, v, p, q, N, R0=1.0, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """R(u) = R0 (Gamma(1/uv) / Gamma(v/u))^N."""
    num = ell_gamma(1 / (u * v), p, q, ctx, policy)
    den = ell_gamma(v / u, p, q, ctx, policy)
    return R0 * (num / den) ** N


def liouville_S(u, v, p, q, N, R0=1.0, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """S(u) = R0 (v/u, p^2q^2 u/v, pq uv, pq/(uv); p, q)_inf^N."""
    val = (qpoch2(v / u, p, q, ctx, policy)
           * qpoch2(p * p * q * q * u / v, p, q, ctx, policy)
           * qpoch2(p * q * u * v, p, q, ctx, policy)
           * qpoch2(p * q / (u * v), p, q, ctx, policy))
    return R0 * val ** N


def laplace_residual(u, v, p, q, N, R0=1.0, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """Discrete Laplace residual R(pqu)R(u) - v^{2N} R(pu)R(qu), relative."""
    rr = lambda w: liouville_R(w, v, p, q, N, R0, ctx, policy)
    lhs = rr(p * q * u) * rr(u)
    rhs = v ** (2 * N) * rr(p * u) * rr(q * u)
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return (lhs - rhs) / scale


def tq_residual_q(chi, t, u, v, p, q, N, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """t_q(u) chi(u) - h_q(uv)^N chi(pu) - v^N h_q(u/v)^N chi(u/p)."""
    return (t(u) * chi(u)
            - h(u * v, q, ctx, policy) ** N * chi(p * u)
            - v ** N * h(u / v, q, ctx, policy) ** N * chi(u / p))


def tq_residual_p(chi, t, u, v, p, q, N, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """Mirror of tq_residual_q under p <-> q."""
    return (t(u) * chi(u)
            - h(u * v, p, ctx, policy) ** N * chi(q * u)
            - v ** N * h(u / v, p, ctx, policy) ** N * chi(u / q))


def liouville_residual(chi, u, v, p, q, N, R0=1.0, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """chi(pqu) chi(u) - v^N chi(pu) chi(qu) - R(u)."""
    return (chi(p * q * u) * chi(u) - v ** N * chi(p * u) * chi(q * u)
            - liouville_R(u, v, p, q, N, R0, ctx, policy))


def liouville_H_residual(H, u, v, p, q, N, R0=1.0, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """H(pqu)H(u) - v^N (1-1/(uv))^N (1-pq u/v)^N H(pu)H(qu) - S(u)."""
    return (H(p * q * u) * H(u)
            - v ** N * (1 - 1 / (u * v)) ** N * (1 - p * q * u / v) ** N
            * H(p * u) * H(q * u)
            - liouville_S(u, v, p, q, N, R0, ctx, policy))


# ---------------------------------------------------------------------------
# Transfer polynomials in the h_q basis
# ---------------------------------------------------------------------------

@dataclass
class TransferPolynomial:
    """t(u) = sum_{k=0}^{N-1} t_k h(w^k u; q)^N with w = e^{2 pi i/N}.

    Coefficients satisfy t_{N-k} = t_k; ``symmetry_deviation`` records how
    far the un-symmetrized fit was from that.
    """

    N: int
    q: complex
    coeffs: np.ndarray
    symmetry_deviation: float = 0.0
    ctx: object = DEFAULT_CTX
    policy: object = DEFAULT_POLICY

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if len(self.coeffs) != self.N:
            raise ValueError("need N basis coefficients")

    @property
    def omega(self):
        return cmath.exp(2j * cmath.pi / self.N)

    def basis(self, u):
        w = self.omega
        return np.array([h(w ** k * u, self.q, self.ctx, self.policy) ** self.N
                         for k in range(self.N)], dtype=complex)

    def __call__(self, u):
        return self.basis(u) @ self.coeffs

    @property
    def independent_coeffs(self):
        """The floor(N/2)+1 independent values t_0 .. t_{floor(N/2)}."""
        return self.coeffs[: self.N // 2 + 1]


def t_symmetry_check(t, u, q, N):
    """Residual pair of t(qu) = (-u)^{-N} t(u) and t(1/u) = (-u)^{-N} t(u)."""
    base = (-u) ** (-N) * t(u)
    return t(q * u) - base, t(1 / u) - base


def t_decompose(points, values, q, N, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY,
                cond_limit=1e12):
    """Fit t samples to the h_q basis.

    With len(points) >= N the full basis is fitted and the coefficient
    symmetry t_{N-k} = t_k is verified (deviation recorded, coefficients
    symmetrized).  With floor(N/2)+1 <= len(points) < N the symmetric
    combinations are fitted directly.
    """
    points = list(points)
    values = np.asarray(list(values), dtype=complex)
    w = cmath.exp(2j * cmath.pi / N)
    n_ind = N // 2 + 1
    if len(points) < n_ind:
        raise DomainError(f"need at least {n_ind} sample points")
    full = len(points) >= N

    def basis_row(u):
        return [h(w ** k * u, q, ctx, policy) ** N for k in range(N)]

    rows = np.array([basis_row(u) for u in points], dtype=complex)
    if full:
        A = rows
    else:
        A = np.zeros((len(points), n_ind), dtype=complex)
        for k in range(n_ind):
            A[:, k] = rows[:, k]
            if 0 < k < N - k:
                A[:, k] += rows[:, N - k]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DomainError(f"ill-conditioned basis matrix (cond={cond:.2e}); "
                          "choose different sample points")
    sol, *_ = np.linalg.lstsq(A, values, rcond=None)
    if full:
        coeffs = sol
        dev = 0.0
        scale = max(np.max(np.abs(coeffs)), 1e-300)
        for k in range(1, N):
            dev = max(dev, abs(coeffs[k] - coeffs[N - k]) / scale)
        sym = coeffs.copy()
        for k in range(1, N):
            sym[k] = (coeffs[k] + coeffs[N - k]) / 2
        return TransferPolynomial(N, q, sym, symmetry_deviation=dev,
                                  ctx=ctx, policy=policy)
    coeffs = np.zeros(N, dtype=complex)
    for k in range(n_ind):
        coeffs[k] = sol[k]
        if 0 < k < N - k:
            coeffs[N - k] = sol[k]
    return TransferPolynomial(N, q, coeffs, symmetry_deviation=0.0,
                              ctx=ctx, policy=policy)


# ---------------------------------------------------------------------------
# Additive <-> multiplicative normalization bridge
# ---------------------------------------------------------------------------

def tq_normalization_factor(x, y, tau, N, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """c(x)^N with c = i q^{1/8} e^{-i pi (x+y)} (q; q)_inf, the factor
    relating the additive transfer matrix to its multiplicative form:
    t(x|tau) = c^N t_q(u).

    (The source display divides by (q;q)_inf; equivalence of the additive
    and multiplicative TQ equations requires multiplying instead, which is
    what the identity theta1 = i q^{1/8} u^{-1/2} h(u;q) (q;q)_inf gives.)
    """
    q = cmath.exp(2j * cmath.pi * tau)
    from .elliptic import qpoch1
    c = (1j * cmath.exp(1j * cmath.pi * tau / 4) * cmath.exp(-1j * cmath.pi * (x + y))
         * qpoch1(q, q, ctx, policy))
    return c ** N


def tq0_residual(Q_additive, t_additive, x, y, eta, tau, N,
                 ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """t(x) Q(x) - theta1(x+y)^N Q(x+eta) - theta1(x-y)^N Q(x-eta)."""
    from .elliptic import theta1
    return (t_additive(x) * Q_additive(x)
            - theta1(x + y, tau, ctx, policy) ** N * Q_additive(x + eta)
            - theta1(x - y, tau, ctx, policy) ** N * Q_additive(x - eta))
