"""Order-by-order linear solver for the pole-stripped Liouville equation

    E(u) := H(pqu) H(u) - v^N (1-1/(uv))^N (1-pq u/v)^N H(pu) H(qu) - R0*Shat(u)

with H and R0 graded (p, q)-series at fixed numeric v (see graded.py).

Scheduling.  Every monomial coefficient of E must vanish.  Writing
level(c_k^{(i,j)}) = (i+j) - 2*max(|k|, m) for an H-entry of u-mode k and
total degree i+j, and level(R0^{(i,j)}) = i+j, each unknown first appears
in E at grade == its level, with a partner of minimal grade (the degree-0
seed part of H), and products of two unknowns of level >= g land at grades
> g.  Solving grades in increasing order therefore meets every unknown
linearly, which is what makes the recursion linear; the per-grade systems
are overdetermined and their least-squares residual is a validity
certificate.

Normalization: the u-modes |k| <= m at degree 0 carry the seed polynomial
(ground state: the constant 1); the edge mode |k| = m is frozen to its
seed value at all orders.  R0 entries live on exponents i, j >= -m and the
whole solution on grades >= -2m; both are certified by the final residual
check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    ResonanceError,
    SolutionInvalidError,
)
from .graded import GradedSeries, graded_inverse, graded_qpoch, graded_qpoch_single
from .tropical import SpectralState, enumerate_states


# ---------------------------------------------------------------------------
# graded building blocks
# ---------------------------------------------------------------------------

def shat_graded(v, N, cap):
    """(v/u, p^2q^2 u/v, pq uv, pq/(uv); p, q)_inf^N up to grade cap."""
    s = graded_qpoch(v, 0, 0, -1, 1, 1, cap, power=N)
    s = s.mul(graded_qpoch(1 / v, 2, 2, 1, 1, 1, cap, power=N), cap)
    s = s.mul(graded_qpoch(v, 1, 1, 1, 1, 1, cap, power=N), cap)
    s = s.mul(graded_qpoch(1 / v, 1, 1, -1, 1, 1, cap, power=N), cap)
    return s


def cfactor_graded(v, N, cap):
    """v^N (1 - 1/(uv))^N (1 - pq u/v)^N (exact, finite)."""
    f1 = GradedSeries.constant(1) - GradedSeries.monomial(1 / v, 0, 0, -1)
    f2 = GradedSeries.constant(1) - GradedSeries.monomial(1 / v, 1, 1, 1)
    return f1.power(N, cap).mul(f2.power(N, cap), cap).scale(v ** N)


def hq_uv_graded(v, N, cap, inv_v=False):
    """h(u v^{+-1}; q)^N as a graded series: (w;q)_inf (q/w;q)_inf with w = u*v
    or u/v (nome exponents carry the grading)."""
    c = (1 / v) if inv_v else v
    s = graded_qpoch_single(c, 0, 0, 1, 0, 1, cap, power=N)          # (w; q)
    s = s.mul(graded_qpoch_single(1 / c, 0, 1, -1, 0, 1, cap, power=N), cap)  # (q/w; q)
    return s


def hp_uv_graded(v, N, cap, inv_v=False):
    """h(u v^{+-1}; p)^N as a graded series."""
    c = (1 / v) if inv_v else v
    s = graded_qpoch_single(c, 0, 0, 1, 1, 0, cap, power=N)
    s = s.mul(graded_qpoch_single(1 / c, 1, 0, -1, 1, 0, cap, power=N), cap)
    return s


def chi_denominator_graded(v, N, cap):
    """[(pq/(uv); p,q)_inf (pq u/v; p,q)_inf]^N."""
    d = graded_qpoch(1 / v, 1, 1, -1, 1, 1, cap, power=N)
    return d.mul(graded_qpoch(1 / v, 1, 1, 1, 1, 1, cap, power=N), cap)


# ---------------------------------------------------------------------------
# solution container
# ---------------------------------------------------------------------------

@dataclass
class PerturbativeSolution:
    N: int
    v: complex
    m: int
    D: int
    state: SpectralState | None
    H: GradedSeries
    R0: GradedSeries
    residual_norms: dict            # grade -> relative residual of (Liou2)
    detected_orders: dict           # u-mode -> leading total degree
    diagnostics: dict = field(default_factory=dict)

    @property
    def r0_leading_order(self):
        return self.R0.min_grade()

    def chi_graded(self, cap=None):
        cap = self.D if cap is None else cap
        dinv = graded_inverse(chi_denominator_graded(self.v, self.N, cap), cap)
        return self.H.mul(dinv, cap)

    def pq_symmetry_deviation(self):
        """max |H(i,j,k) - H(j,i,k)| / scale: emergent p<->q symmetry."""
        scale = max(self.H.max_abs(), 1e-300)
        dev = 0.0
        for (i, j, k), c in self.H:
            dev = max(dev, abs(c - self.H.coeff(j, i, k)) / scale)
        return dev

    def to_dict(self):
        from .reports import jsonify
        return {
            "N": self.N, "v": jsonify(complex(self.v)), "m": self.m, "D": self.D,
            "partition": list(self.state.p_indices) if self.state else [],
            "H": {f"{i},{j},{k}": jsonify(c) for (i, j, k), c in sorted(self.H.terms.items())},
            "R0": {f"{i},{j}": jsonify(c) for (i, j, k), c in sorted(self.R0.terms.items())},
            "residual_norms": {str(g): float(r) for g, r in sorted(self.residual_norms.items())},
            "detected_orders": {str(k): int(d) for k, d in sorted(self.detected_orders.items())},
            "diagnostics": jsonify(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# resonance scan
# ---------------------------------------------------------------------------

def scan_resonances(v, p, q, max_degree, tol=1e-8):
    """Indices (i, j) with |1 - p^i q^j v^2| < tol, 0 <= i+j <= max_degree.

    The perturbative coefficients acquire denominators of exactly this
    form; at the spin set v^2 = p^{-m} q^{-n} the scan fires at (m, n).
    """
    hits = []
    v2 = complex(v) ** 2
    for s in range(0, max_degree + 1):
        for i in range(0, s + 1):
            j = s - i
            if abs(1 - complex(p) ** i * complex(q) ** j * v2) < tol:
                hits.append((i, j))
    return hits


# ---------------------------------------------------------------------------
# the level-scheduled linear solver
# ---------------------------------------------------------------------------

class _LiouvilleSolver:
    def __init__(self, N, v, D, seed_modes, m, zero_tol=1e-13, cert_tol=1e-9):
        self.N, self.v, self.D, self.m = N, complex(v), D, m
        self.zero_tol = zero_tol
        self.cert_tol = cert_tol
        self.kmax = m + N + D + 1
        self.cap = D
        self.C = cfactor_graded(self.v, N, D)
        self.Shat = shat_graded(self.v, N, D)
        # frozen seed part of H (modes |k| <= m at degree 0; edge mode frozen)
        terms = {}
        for k, c in seed_modes.items():
            if c != 0:
                terms[(0, 0, k)] = complex(c)
                if k != 0:
                    terms[(0, 0, -k)] = complex(c)
        self.H = GradedSeries(terms)
        self.R0 = GradedSeries()
        self.cond = {}
        self.level_residuals = {}

    # -- unknown allocation -------------------------------------------------
    def unknowns_at_level(self, g):
        out = []
        for k in range(0, self.kmax + 1):
            if k == self.m:
                continue            # edge mode frozen (normalization)
            d = g + 2 * max(k, self.m)
            if d < 1:
                continue
            for i in range(0, d + 1):
                out.append(("H", k, i, d - i))
        if g >= -2 * self.m:
            for i in range(-self.m, g + self.m + 1):
                out.append(("R0", i, g - i))
        return out

    # -- residual and linearization ------------------------------------------
    def residual(self, cap):
        A = self.H.subs_u_scale(1, 1).mul(self.H, cap)
        B = self.H.subs_u_scale(1, 0).mul(self.H.subs_u_scale(0, 1), cap)
        E = A - self.C.mul(B, cap) - self.R0.mul(self.Shat, cap)
        return E

    def _delta_H(self, k, i, j):
        t = {(i, j, k): 1.0 + 0j}
        if k != 0:
            t[(i, j, -k)] = 1.0 + 0j
        return GradedSeries(t)

    def column(self, unk, g):
        """Grade-g slice of the linearized residual for one unit unknown."""
        if unk[0] == "R0":
            _, i, j = unk
            dS = GradedSeries.monomial(1, i, j, 0).mul(self.Shat, g)
            return {key: -c for key, c in dS.grade_slice(g).items()}
        _, k, i, j = unk
        dH = self._delta_H(k, i, j)
        dA = (dH.subs_u_scale(1, 1).mul(self.H, g)
              + self.H.subs_u_scale(1, 1).mul(dH, g))
        dB = (dH.subs_u_scale(1, 0).mul(self.H.subs_u_scale(0, 1), g)
              + self.H.subs_u_scale(1, 0).mul(dH.subs_u_scale(0, 1), g))
        dE = dA - self.C.mul(dB, g)
        return dE.grade_slice(g)

    def solve(self):
        scales = [self.H.max_abs(), abs(self.v) ** self.N, 1.0]
        base_scale = max(scales)
        g_min = -2 * self.m
        for g in range(g_min, self.D + 1):
            unks = self.unknowns_at_level(g)
            E = self.residual(g)
            # certificate: all grades < g must already vanish
            for gl in E.grades():
                if gl < g:
                    r = E.max_abs(gl)
                    if r > self.cert_tol * base_scale:
                        raise SolutionInvalidError(
                            f"residual {r:.2e} left at grade {gl} < {g}")
            target = E.grade_slice(g)
            cols = [self.column(u, g) for u in unks]
            rows = sorted(set(target) | {key for c in cols for key in c})
            if not rows:
                self.level_residuals[g] = 0.0
                continue
            M = np.zeros((len(rows), len(cols)), dtype=complex)
            for jcol, c in enumerate(cols):
                for irow, key in enumerate(rows):
                    M[irow, jcol] = c.get(key, 0.0)
            b = np.array([-target.get(key, 0.0) for key in rows], dtype=complex)
            if cols:
                z, _res, rank, sv = np.linalg.lstsq(M, b, rcond=1e-13)
                self.cond[g] = float(sv[0] / sv[-1]) if len(sv) and sv[-1] > 0 else np.inf
                post = np.max(np.abs(M @ z - b)) if len(rows) else 0.0
            else:
                z = np.zeros(0, dtype=complex)
                post = np.max(np.abs(b)) if len(b) else 0.0
            level_scale = max(np.max(np.abs(b)) if len(b) else 0.0, base_scale)
            self.level_residuals[g] = float(post / level_scale)
            if post > self.cert_tol * level_scale:
                if g <= 0:
                    raise SolutionInvalidError(
                        f"seed does not satisfy the grade-{g} equations "
                        f"(residual {post:.2e}); invalid partition or degenerate v")
                raise ConvergenceError(
                    f"inconsistent linear system at grade {g}", residual=post)
            # fold solved values into H and R0
            newH, newR = {}, {}
            for u, val in zip(unks, z):
                if abs(val) <= self.zero_tol * max(1.0, level_scale):
                    continue
                if u[0] == "H":
                    _, k, i, j = u
                    newH[(i, j, k)] = newH.get((i, j, k), 0j) + val
                    if k != 0:
                        newH[(i, j, -k)] = newH.get((i, j, -k), 0j) + val
                else:
                    _, i, j = u
                    newR[(i, j, 0)] = newR.get((i, j, 0), 0j) + val
            self.H = self.H + GradedSeries(newH)
            self.R0 = self.R0 + GradedSeries(newR)
        return self._finalize()

    def _finalize(self):
        E = self.residual(self.D)
        A = self.H.subs_u_scale(1, 1).mul(self.H, self.D)
        CB = self.C.mul(self.H.subs_u_scale(1, 0).mul(self.H.subs_u_scale(0, 1), self.D), self.D)
        S = self.R0.mul(self.Shat, self.D)
        norms = {}
        for g in range(-2 * self.m, self.D + 1):
            scale = max(A.max_abs(g), CB.max_abs(g), S.max_abs(g), 1e-300)
            norms[g] = E.max_abs(g) / scale
        detected = {}
        hscale = max(self.H.max_abs(), 1e-300)
        for k in range(0, self.kmax + 1):
            lead = None
            for (i, j, kk), c in self.H:
                if kk == k and abs(c) > 1e-9 * hscale:
                    if lead is None or i + j < lead:
                        lead = i + j
            if lead is not None:
                detected[k] = lead
        return norms, detected


def _solve(N, v, D, seed_modes, m, state, pq_context=None, resonance_tol=1e-8):
    if D < 2:
        raise ValueError("need D >= 2")
    if pq_context is not None:
        p0, q0 = pq_context
        hits = scan_resonances(v, p0, q0, D + 2 * (m + N) + 2, tol=resonance_tol)
        if hits:
            raise ResonanceError(
                f"resonant denominator 1 - p^i q^j v^2 at (i, j) = {hits[0]}",
                indices=hits[0])
    solver = _LiouvilleSolver(N, v, D, seed_modes, m)
    norms, detected = solver.solve()
    bad = {g: r for g, r in norms.items() if r > 1e-10}
    if bad:
        raise ConvergenceError(f"final residual check failed: {bad}",
                               residual=max(bad.values()))
    # the top allocated mode must be inactive, else allocation was too small
    top_active = [k for k in (solver.kmax,) if k in detected]
    diag = {
        "level_residuals": {str(g): float(r) for g, r in solver.level_residuals.items()},
        "condition_numbers": {str(g): (None if not math.isfinite(c) else float(c))
                              for g, c in solver.cond.items()},
        "top_modes_active": top_active,
    }
    if top_active:
        raise ConvergenceError(
            f"mode allocation too small: modes {top_active} active at D={D}")
    return PerturbativeSolution(N=N, v=complex(v), m=m, D=D, state=state,
                                H=solver.H, R0=solver.R0,
                                residual_norms=norms, detected_orders=detected,
                                diagnostics=diag)


def solve_ground(N, v, D, pq_context=None):
    """Perturbative algebraic ground state: H = 1 + sum eps^{Q_n} H_n (u^n+u^{-n})."""
    sol = _solve(N, v, D, {0: 1.0}, 0, None, pq_context=pq_context)
    q1 = sol.detected_orders.get(1)
    if q1 != 2:
        raise SolutionInvalidError(f"first correction order Q_1 = {q1}, expected 2")
    return sol


def solve_excited(state: SpectralState, D, pq_context=None):
    """Perturbative excited state seeded by a tropical SpectralState."""
    poly = state.p_poly()          # ascending, degree 2m, monic
    seed = {}
    for k in range(-state.m, state.m + 1):
        seed[k] = poly[k + state.m]
    seed_sym = {abs(k): seed[abs(k)] for k in seed}
    return _solve(state.N, state.v, D, seed_sym, state.m, state,
                  pq_context=pq_context)


# ---------------------------------------------------------------------------
# induced transfer polynomial (graded) and cross-equation checks
# ---------------------------------------------------------------------------

def _omega(N):
    return np.exp(2j * np.pi / N)


def basis_hq_graded(N, cap, mode_scale=None):
    """Graded series for h(w^k u; q)^N, k = 0..N-1."""
    w = _omega(N)
    out = []
    for k in range(N):
        c = w ** k
        s = graded_qpoch_single(c, 0, 0, 1, 0, 1, cap, power=N)
        s = s.mul(graded_qpoch_single(1 / c, 0, 1, -1, 0, 1, cap, power=N), cap)
        out.append(s)
    return out


@dataclass
class GradedTransfer:
    """t_q(u) = sum_k t_k h_q(w^k u)^N with graded scalar coefficients."""

    N: int
    coeffs: list                    # GradedSeries, u-mode 0 only
    residual_norms: dict
    symmetry_deviation: float

    def tropical_leading(self):
        """(grade, per-k leading dict) of the lowest grade present."""
        g = min((s.min_grade() for s in self.coeffs if s.min_grade() is not None),
                default=None)
        lead = [s.grade_slice(g) if g is not None else {} for s in self.coeffs]
        return g, lead


def induced_transfer(sol: PerturbativeSolution, cap=None):
    """Solve t_q(u) chi(u) = h_q(uv)^N chi(pu) + v^N h_q(u/v)^N chi(u/p)
    for graded coefficients t_k in the h_q basis, grade by grade."""
    N, v, m = sol.N, sol.v, sol.m
    cap = sol.D if cap is None else cap
    chi = sol.chi_graded(cap)
    rhs = (hq_uv_graded(v, N, cap).mul(chi.subs_u_scale(1, 0), cap)
           + hq_uv_graded(v, N, cap, inv_v=True).mul(chi.subs_u_scale(-1, 0), cap)
           .scale(v ** N))
    basis = basis_hq_graded(N, cap)
    basis_chi = [b.mul(chi, cap) for b in basis]
    coeffs = [GradedSeries() for _ in range(N)]

    def current_residual(g):
        E = rhs.drop_above(g)
        for ck, bc in zip(coeffs, basis_chi):
            E = E - ck.mul(bc, g)
        return E

    level_res = {}
    for g in range(-m, cap + 1):
        E = current_residual(g)
        target = E.grade_slice(g)
        cols = []
        unks = []
        for kb in range(N):
            for i in range(-m, g + m + 1):
                j = g - i
                if j < 0:
                    continue
                unks.append((kb, i, j))
                dc = GradedSeries.monomial(1, i, j, 0).mul(basis_chi[kb], g)
                cols.append(dc.grade_slice(g))
        rows = sorted(set(target) | {key for c in cols for key in c})
        if not rows:
            level_res[g] = 0.0
            continue
        M = np.zeros((len(rows), len(cols)), dtype=complex)
        for jc, c in enumerate(cols):
            for ir, key in enumerate(rows):
                M[ir, jc] = c.get(key, 0.0)
        b = np.array([target.get(key, 0.0) for key in rows], dtype=complex)
        z, *_ = np.linalg.lstsq(M, b, rcond=1e-13)
        post = np.max(np.abs(M @ z - b)) if len(rows) else 0.0
        scale = max(np.max(np.abs(b)) if len(b) else 0.0, rhs.max_abs(), 1e-300)
        level_res[g] = float(post / scale)
        if post > 1e-8 * scale:
            raise SolutionInvalidError(
                f"induced transfer is not in the h_q basis at grade {g} "
                f"(residual {post:.2e})")
        for (kb, i, j), val in zip(unks, z):
            if abs(val) > 1e-13 * scale:
                coeffs[kb] = coeffs[kb] + GradedSeries.monomial(val, i, j, 0)
    # verify coefficient symmetry t_{N-k} = t_k (emergent)
    dev = 0.0
    scale = max(max((c.max_abs() for c in coeffs), default=0.0), 1e-300)
    for k in range(1, N):
        diff = coeffs[k] - coeffs[N - k]
        dev = max(dev, diff.max_abs() / scale)
    return GradedTransfer(N=N, coeffs=coeffs, residual_norms=level_res,
                          symmetry_deviation=dev)


def tq_p_form_residual(sol: PerturbativeSolution, t_q: GradedTransfer, cap=None):
    """Residual of the p-form TQ equation with the same chi and
    t_p := (p<->q image of t_q), through the cap grade (relative)."""
    N, v = sol.N, sol.v
    cap = sol.D if cap is None else cap
    chi = sol.chi_graded(cap)
    w = _omega(N)
    # t_p basis: h_p(w^k u)^N; coefficients swapped in (p, q)
    rhs = (hp_uv_graded(v, N, cap).mul(chi.subs_u_scale(0, 1), cap)
           + hp_uv_graded(v, N, cap, inv_v=True).mul(chi.subs_u_scale(0, -1), cap)
           .scale(v ** N))
    lhs = GradedSeries()
    for k in range(N):
        c = w ** k
        s = graded_qpoch_single(c, 0, 0, 1, 1, 0, cap, power=N)
        s = s.mul(graded_qpoch_single(1 / c, 1, 0, -1, 1, 0, cap, power=N), cap)
        lhs = lhs + t_q.coeffs[k].swap_pq().mul(s.mul(chi, cap), cap)
    E = lhs - rhs
    scale = max(rhs.max_abs(), 1e-300)
    return E.max_abs() / scale


def conjecture_scaling(sol: PerturbativeSolution):
    """Leading order of chi/sqrt(R0): detected order (total degree in (p,q))
    and the same expressed in degree pairs.  For the m-excited state the
    detected order is m (i.e. m/2 pairs) relative to the ground state."""
    g_chi = sol.chi_graded(sol.D).min_grade()
    g_r0 = sol.R0.min_grade()
    detected = g_chi - g_r0 / 2
    return {
        "chi_leading_order": g_chi,
        "r0_leading_order": g_r0,
        "q_scaling_order": detected,
        "q_scaling_order_pairs": detected / 2,
        "expected_pairs": sol.m / 2,
    }
