"""Graded trivariate series: finite sums  sum c_{ijk} p^i q^j u^k  with the
grading deg(p^i q^j u^k) = i + j (the bookkeeping image of p -> eps*p,
q -> eps*q).  Exponents i, j may be negative in intermediate expressions
(substitutions u -> p^a q^b u shift them); u-modes are plain integers.

All products truncate at a grade cap; everything below the cap is exact.
Coefficients are complex numbers at a fixed numeric v.
"""

from __future__ import annotations

from collections import defaultdict


class GradedSeries:
    """Sparse dict {(i, j, k): coeff} with grade(i,j,k) = i + j."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): complex(c)}) if c != 0 else cls()

    @classmethod
    def monomial(cls, c, i, j, k):
        return cls({(int(i), int(j), int(k)): complex(c)})

    @classmethod
    def from_u_poly(cls, coeffs):
        """coeffs: dict {u-mode: value} at grade zero."""
        return cls({(0, 0, int(k)): complex(c) for k, c in coeffs.items() if c != 0})

    def copy(self):
        return GradedSeries(self.terms)

    # -- inspection ---------------------------------------------------
    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def coeff(self, i, j, k):
        return self.terms.get((i, j, k), 0j)

    def grade_slice(self, g):
        return {key: c for key, c in self.terms.items() if key[0] + key[1] == g}

    def grades(self):
        return sorted({i + j for (i, j, _k) in self.terms})

    def min_grade(self):
        return min((i + j for (i, j, _k) in self.terms), default=None)

    def max_abs(self, grade=None):
        vals = [abs(c) for (i, j, _k), c in self.terms.items()
                if grade is None or i + j == grade]
        return max(vals, default=0.0)

    def chop(self, tol):
        scale = self.max_abs()
        if scale == 0:
            return self
        return GradedSeries({key: c for key, c in self.terms.items()
                             if abs(c) > tol * scale})

    # -- linear structure ----------------------------------------------
    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            new = out.get(key, 0j) + c
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        return GradedSeries(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = complex(c)
        if c == 0:
            return GradedSeries()
        return GradedSeries({key: val * c for key, val in self.terms.items()})

    # -- multiplicative structure ---------------------------------------
    def mul(self, other, grade_cap):
        """Product truncated to grades <= grade_cap."""
        if len(self.terms) > len(other.terms):
            self, other = other, self
        by_grade = defaultdict(list)
        for (i, j, k), c in other.terms.items():
            by_grade[i + j].append((i, j, k, c))
        other_grades = sorted(by_grade)
        out = defaultdict(complex)
        for (i1, j1, k1), c1 in self.terms.items():
            g1 = i1 + j1
            for g2 in other_grades:
                if g1 + g2 > grade_cap:
                    break
                for (i2, j2, k2, c2) in by_grade[g2]:
                    out[(i1 + i2, j1 + j2, k1 + k2)] += c1 * c2
        return GradedSeries({key: c for key, c in out.items() if c != 0})

    def power(self, n, grade_cap):
        result = GradedSeries.constant(1)
        base = self
        while n > 0:
            if n & 1:
                result = result.mul(base, grade_cap)
            n >>= 1
            if n:
                base = base.mul(base, grade_cap)
        return result

    def subs_u_scale(self, sp, sq):
        """u -> p^{sp} q^{sq} u:  (i,j,k) -> (i + sp*k, j + sq*k, k)."""
        return GradedSeries({(i + sp * k, j + sq * k, k): c
                             for (i, j, k), c in self.terms.items()})

    def swap_pq(self):
        return GradedSeries({(j, i, k): c for (i, j, k), c in self.terms.items()})

    def swap_u_inverse(self):
        return GradedSeries({(i, j, -k): c for (i, j, k), c in self.terms.items()})

    def drop_above(self, grade_cap):
        return GradedSeries({key: c for key, c in self.terms.items()
                             if key[0] + key[1] <= grade_cap})

    # -- evaluation -----------------------------------------------------
    def eval(self, p, q, u, eps=1.0):
        p, q, u = complex(p), complex(q), complex(u)
        tot = 0j
        for (i, j, k), c in self.terms.items():
            tot += c * eps ** (i + j) * p ** i * q ** j * u ** k
        return tot

    def eval_u_func(self, p, q):
        """Collapse (p,q): returns dict {u-mode: coefficient}."""
        p, q = complex(p), complex(q)
        out = defaultdict(complex)
        for (i, j, k), c in self.terms.items():
            out[k] += c * p ** i * q ** j
        return dict(out)

    def leading(self):
        """(grade, {(i,j,k): c}) of the lowest nonvanishing grade."""
        g = self.min_grade()
        if g is None:
            return None, {}
        return g, self.grade_slice(g)


def graded_qpoch(c, i0, j0, k0, step_p, step_q, grade_cap, power=1):
    """(c p^{i0} q^{j0} u^{k0}; p^{step_p} q^{step_q})-style double product:

        prod_{m,n>=0} (1 - c p^{i0 + m*step_p} q^{j0 + n*step_q} u^{k0}) ^ power

    truncated at grades <= grade_cap.  For the usual (a; p, q)_inf take
    step_p = step_q = 1; for nome p^2 q^2 products use steps (2, 2) with a
    single index (pass step via two loops collapsing to the diagonal) --
    see graded_qpoch_single.
    """
    result = GradedSeries.constant(1)
    m = 0
    while i0 + m * step_p + j0 <= grade_cap:
        n = 0
        while i0 + m * step_p + j0 + n * step_q <= grade_cap:
            fac = GradedSeries.constant(1) - GradedSeries.monomial(
                c, i0 + m * step_p, j0 + n * step_q, k0)
            result = result.mul(fac.power(power, grade_cap), grade_cap)
            n += 1
        m += 1
    return result


def graded_inverse(series: GradedSeries, grade_cap):
    """1/series for a series with leading term 1*u^0 at grade 0 (Neumann sum)."""
    lead = series.coeff(0, 0, 0)
    if abs(lead - 1) > 1e-13 or (series.min_grade() or 0) < 0:
        raise ValueError("graded_inverse needs leading coefficient 1 at grade 0")
    X = GradedSeries.constant(1) - series      # grades >= 1
    if X.min_grade() is not None and X.min_grade() < 1:
        low = GradedSeries({k: c for k, c in X.terms.items() if k[0] + k[1] < 1})
        if low.max_abs() > 1e-13 * max(1.0, series.max_abs()):
            raise ValueError("graded_inverse needs unit leading grade-0 part")
        X = GradedSeries({k: c for k, c in X.terms.items() if k[0] + k[1] >= 1})
    out = GradedSeries.constant(1)
    term = GradedSeries.constant(1)
    while True:
        term = term.mul(X, grade_cap)
        if not term.terms:
            break
        out = out + term
    return out


def graded_qpoch_single(c, i0, j0, k0, step_i, step_j, grade_cap, power=1):
    """Single product prod_{n>=0} (1 - c p^{i0+n*step_i} q^{j0+n*step_j} u^{k0})^power."""
    result = GradedSeries.constant(1)
    n = 0
    while i0 + j0 + n * (step_i + step_j) <= grade_cap:
        fac = GradedSeries.constant(1) - GradedSeries.monomial(
            c, i0 + n * step_i, j0 + n * step_j, k0)
        result = result.mul(fac.power(power, grade_cap), grade_cap)
        n += 1
    return result
