"""Elliptic special functions: theta functions, shortened theta h, q-Pochhammer
symbols, the elliptic Gamma function and its Phi form.

Conventions
-----------
* theta1(x|tau) = -i sum_n (-)^n exp(i pi tau (n+1/2)^2 + 2 pi i (n+1/2) x)
* theta4(x|tau) =    sum_n (-)^n exp(i pi tau n^2     + 2 pi i n x)
* theta2(x|tau) = theta1(x + 1/2 | tau),  theta3(x|tau) = theta4(x + 1/2 | tau)
* h(u; q) = (u; q)_inf (q/u; q)_inf
* Gamma(u; p, q) = (pq/u; p, q)_inf / (u; p, q)_inf
* Phi(x) = (sqrt(pq) u; p, q)_inf / (sqrt(pq)/u; p, q)_inf = 1/Gamma(sqrt(pq) u)

Branch policy: every fractional power is taken through the additive
parameters where available (q^{1/8} = e^{i pi tau/4}, u^{-1/2} = e^{-i pi x},
sqrt(pq) = e^{i pi (tau+eta)}); when only multiplicative inputs exist the
principal logarithm is used, factor by factor.  Poles are reported as
structured :class:`~ellq.errors.PoleError` values carrying lattice indices,
never as inf.
"""

from __future__ import annotations

import cmath
from contextlib import nullcontext
from dataclasses import dataclass, field

import mpmath

from .errors import DomainError, PoleError, TruncationError

TWO_PI_I = 2j * cmath.pi


@dataclass(frozen=True)
class TruncationPolicy:
    """Stop rule shared by every truncated sum/product.

    Evaluators stop once the running tail bound drops below ``tail_tol``
    (absolute) and raise :class:`TruncationError` if ``max_terms`` is
    exhausted first.
    """

    max_terms: int = 4000
    tail_tol: float = 1e-15

    def __post_init__(self):
        if self.max_terms <= 0 or self.tail_tol <= 0:
            raise ValueError("max_terms and tail_tol must be positive")


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision: ``bits=None`` means native double, otherwise all
    arithmetic runs under mpmath at the given binary precision (round to
    nearest).  One computation should share a single context."""

    bits: int | None = None

    @property
    def native(self) -> bool:
        return self.bits is None

    def workprec(self):
        if self.native:
            return nullcontext()
        return mpmath.workprec(self.bits)

    def number(self, z):
        return complex(z) if self.native else mpmath.mpc(z)

    def exp(self, z):
        return cmath.exp(z) if self.native else mpmath.exp(z)

    def expi_pi(self, z):
        """e^{i pi z} with z additive; exact in the additive parameter."""
        if self.native:
            return cmath.exp(1j * cmath.pi * complex(z))
        return mpmath.exp(1j * mpmath.pi * mpmath.mpc(z))


DEFAULT_CTX = PrecisionContext()
DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class ModularData:
    """Parameter pack (x, y, tau, eta) with multiplicative images
    (u, v, q, p) = e^{2 pi i (x, y, tau, eta)}.

    Requires Im tau > 0 and Im eta > 0 (so |q| < 1, |p| < 1).
    """

    x: complex
    y: complex
    tau: complex
    eta: complex
    u: complex = field(init=False)
    v: complex = field(init=False)
    q: complex = field(init=False)
    p: complex = field(init=False)

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise DomainError(f"Im tau must be positive, got tau={self.tau}")
        if complex(self.eta).imag <= 0:
            raise DomainError(f"Im eta must be positive, got eta={self.eta}")
        for name, val in (("u", self.x), ("v", self.y), ("q", self.tau), ("p", self.eta)):
            object.__setattr__(self, name, cmath.exp(TWO_PI_I * complex(val)))

    @classmethod
    def from_additive(cls, x, y, tau, eta) -> "ModularData":
        return cls(complex(x), complex(y), complex(tau), complex(eta))

    @classmethod
    def from_multiplicative(cls, u, v, q, p) -> "ModularData":
        """Principal-branch additive parameters: x = log(u)/(2 pi i), etc."""
        def to_add(w, name):
            w = complex(w)
            if w == 0:
                raise DomainError(f"{name} must be nonzero")
            return cmath.log(w) / TWO_PI_I

        return cls(to_add(u, "u"), to_add(v, "v"), to_add(q, "q"), to_add(p, "p"))

    @property
    def sqrt_p(self) -> complex:
        return cmath.exp(1j * cmath.pi * complex(self.eta))

    @property
    def sqrt_q(self) -> complex:
        return cmath.exp(1j * cmath.pi * complex(self.tau))

    @property
    def sqrt_pq(self) -> complex:
        return cmath.exp(1j * cmath.pi * complex(self.eta + self.tau))


def _check_tau(tau):
    if complex(tau).imag <= 0:
        raise DomainError(f"Im tau must be positive, got tau={tau}")


def theta1(x, tau, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """theta1(x|tau) = 2 sum_{n>=0} (-)^n e^{i pi tau (n+1/2)^2} sin((2n+1) pi x)."""
    _check_tau(tau)
    with ctx.workprec():
        x = ctx.number(x)
        tau = ctx.number(tau)
        qt = abs(ctx.expi_pi(tau))          # |e^{i pi tau}| < 1
        growth = abs(ctx.exp(2 * cmath.pi * abs(complex(x).imag)))
        total = ctx.number(0)
        sign = 1
        for n in range(policy.max_terms):
            half = n + 0.5
            term = sign * ctx.expi_pi(tau * half * half) * _sin_pi(ctx, (2 * n + 1) * x)
            total += 2 * term
            bound = 2 * qt ** ((n + 1.5) ** 2) * growth ** (n + 1.5)
            ratio = qt ** (2 * n + 4) * growth
            if ratio < 1 and bound / (1 - ratio) < policy.tail_tol:
                return total
            sign = -sign
        raise TruncationError("theta1 did not certify its tail within max_terms")


def theta4(x, tau, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """theta4(x|tau) = 1 + 2 sum_{n>=1} (-)^n e^{i pi tau n^2} cos(2 pi n x)."""
    _check_tau(tau)
    with ctx.workprec():
        x = ctx.number(x)
        tau = ctx.number(tau)
        qt = abs(ctx.expi_pi(tau))
        growth = abs(ctx.exp(2 * cmath.pi * abs(complex(x).imag)))
        total = ctx.number(1)
        sign = -1
        for n in range(1, policy.max_terms):
            total += 2 * sign * ctx.expi_pi(tau * n * n) * _cos_pi(ctx, 2 * n * x)
            bound = 2 * qt ** ((n + 1) ** 2) * growth ** (n + 1)
            ratio = qt ** (2 * n + 3) * growth
            if ratio < 1 and bound / (1 - ratio) < policy.tail_tol:
                return total
            sign = -sign
        raise TruncationError("theta4 did not certify its tail within max_terms")


def theta2(x, tau, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    return theta1(x + 0.5, tau, ctx, policy)


def theta3(x, tau, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    return theta4(x + 0.5, tau, ctx, policy)


def _sin_pi(ctx, z):
    if ctx.native:
        return cmath.sin(cmath.pi * complex(z))
    return mpmath.sinpi(z)


def _cos_pi(ctx, z):
    if ctx.native:
        return cmath.cos(cmath.pi * complex(z))
    return mpmath.cospi(z)


def qpoch1(u, q, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """(u; q)_inf = prod_{n>=0} (1 - u q^n)."""
    if abs(complex(q)) >= 1:
        raise DomainError(f"|q| must be < 1, got q={q}")
    with ctx.workprec():
        u = ctx.number(u)
        q = ctx.number(q)
        aq = abs(complex(q))
        prod = ctx.number(1)
        fac = u
        for _ in range(policy.max_terms):
            prod *= 1 - fac
            fac *= q
            tail = abs(fac) / (1 - aq)
            if 2 * tail * max(1.0, abs(prod)) < policy.tail_tol:
                return prod
        raise TruncationError("qpoch1 did not certify its tail within max_terms")


def qpoch2(u, p, q, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """(u; p, q)_inf = prod_{m,n>=0} (1 - u p^m q^n)."""
    for name, nome in (("p", p), ("q", q)):
        if abs(complex(nome)) >= 1:
            raise DomainError(f"|{name}| must be < 1, got {name}={nome}")
    with ctx.workprec():
        u = ctx.number(u)
        p = ctx.number(p)
        q = ctx.number(q)
        ap, aq = abs(complex(p)), abs(complex(q))
        prod = ctx.number(1)
        arg = u
        for _ in range(policy.max_terms):
            prod *= qpoch1(arg, q, ctx, policy)
            arg *= p
            tail = abs(arg) / ((1 - ap) * (1 - aq))
            if 2 * tail * max(1.0, abs(prod)) < policy.tail_tol:
                return prod
        raise TruncationError("qpoch2 did not certify its tail within max_terms")


def _find_near_zero_factor(u, p, q, tol=1e-9):
    """Lattice indices (m, n) with |1 - u p^m q^n| < tol, if any."""
    u, p, q = complex(u), complex(p), complex(q)
    ap, aq = abs(p), abs(q)
    fac_m = u
    m = 0
    while abs(fac_m) * max(1.0, 1.0) > 0.5 and m < 400:
        fac = fac_m
        n = 0
        while abs(fac) > 0.5 and n < 400:
            if abs(1 - fac) < tol:
                return (m, n)
            fac *= q
            n += 1
        fac_m *= p
        m += 1
    return None


def ell_gamma(u, p, q, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """Elliptic Gamma function (pq/u; p, q)_inf / (u; p, q)_inf.

    Symmetrized in p <-> q by ordering the nome pair, so
    ell_gamma(u, p, q) == ell_gamma(u, q, p) bit for bit.
    Raises PoleError with lattice indices when u = p^{-m} q^{-n}.
    """
    if abs(complex(u)) == 0:
        raise DomainError("u must be nonzero")
    p, q = _sym_order(p, q)
    den = qpoch2(u, p, q, ctx, policy)
    if abs(den) < 1e-10:
        idx = _find_near_zero_factor(u, p, q)
        raise PoleError(f"elliptic Gamma pole at u={u}", indices=idx)
    num = qpoch2(complex(p) * complex(q) / complex(u), p, q, ctx, policy)
    return num / den


def _sym_order(p, q):
    """Deterministic nome ordering (lexicographic) for p<->q symmetry."""
    cp, cq = complex(p), complex(q)
    if (cp.real, cp.imag) <= (cq.real, cq.imag):
        return p, q
    return q, p


def phi_u(u, p, q, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY, sqrt_pq=None):
    """Phi as a function of the multiplicative variable u:
    (sqrt(pq) u; p, q)_inf / (sqrt(pq)/u; p, q)_inf."""
    if sqrt_pq is None:
        sqrt_pq = cmath.exp((cmath.log(complex(p)) + cmath.log(complex(q))) / 2)
    p, q = _sym_order(p, q)
    den = qpoch2(sqrt_pq / complex(u), p, q, ctx, policy)
    if abs(den) < 1e-10:
        idx = _find_near_zero_factor(sqrt_pq / complex(u), p, q)
        raise PoleError(f"Phi pole at u={u}", indices=idx)
    num = qpoch2(sqrt_pq * complex(u), p, q, ctx, policy)
    return num / den


def phi(x, md: ModularData, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """Phi(x) = 1/Gamma(sqrt(pq) e^{2 pi i x}); sqrt(pq) = e^{i pi (tau+eta)}."""
    u = cmath.exp(TWO_PI_I * complex(x))
    return phi_u(u, md.p, md.q, ctx, policy, sqrt_pq=md.sqrt_pq)


def h(u, q, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """Shortened theta function h(u; q) = (u; q)_inf (q/u; q)_inf."""
    if abs(complex(u)) == 0:
        raise DomainError("u must be nonzero")
    return qpoch1(u, q, ctx, policy) * qpoch1(complex(q) / complex(u), q, ctx, policy)


def log_gamma_series(u, p, q, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """log Gamma(u) = sum_{k>=1} [u^k - (pq/u)^k] / (k (1-p^k)(1-q^k)),
    valid on the annulus |pq| < |u| < 1."""
    au, ap, aq = abs(complex(u)), abs(complex(p)), abs(complex(q))
    if not (ap * aq < au < 1):
        raise DomainError(f"need |pq| < |u| < 1, got |u|={au}")
    with ctx.workprec():
        u = ctx.number(u)
        p = ctx.number(p)
        q = ctx.number(q)
        w = p * q / u
        total = ctx.number(0)
        uk, wk, pk, qk = u, w, p, q
        r = max(au, abs(complex(w)))
        for k in range(1, policy.max_terms):
            total += (uk - wk) / (k * (1 - pk) * (1 - qk))
            uk *= u
            wk *= w
            pk *= p
            qk *= q
            tail = 2 * r ** (k + 1) / ((1 - r) * (1 - ap) * (1 - aq)) / (k + 1)
            if tail < policy.tail_tol:
                return total
        raise TruncationError("log_gamma_series did not converge within max_terms")


def theta1_from_h(x, tau, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """theta1 via i q^{1/8} u^{-1/2} h(u;q) (q;q)_inf with branch-consistent
    fractional powers q^{1/8} = e^{i pi tau/4}, u^{-1/2} = e^{-i pi x}."""
    _check_tau(tau)
    with ctx.workprec():
        q = ctx.exp(TWO_PI_I * ctx.number(tau))
        u = ctx.exp(TWO_PI_I * ctx.number(x))
        q18 = ctx.expi_pi(ctx.number(tau) / 4)
        um12 = ctx.expi_pi(-ctx.number(x))
        return 1j * q18 * um12 * h(u, q, ctx, policy) * qpoch1(q, q, ctx, policy)


def theta4_from_h(x, tau, ctx=DEFAULT_CTX, policy=DEFAULT_POLICY):
    """theta4 via h(q^{1/2} u; q) (q;q)_inf with q^{1/2} = e^{i pi tau}."""
    _check_tau(tau)
    with ctx.workprec():
        q = ctx.exp(TWO_PI_I * ctx.number(tau))
        u = ctx.exp(TWO_PI_I * ctx.number(x))
        q12 = ctx.expi_pi(ctx.number(tau))
        return h(q12 * u, q, ctx, policy) * qpoch1(q, q, ctx, policy)
