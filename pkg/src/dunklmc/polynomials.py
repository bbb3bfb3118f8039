"""Multivariate polynomials with exact rational coefficients.

Terms are stored as a map from exponent multi-index to coefficient.
Coefficients are ``fractions.Fraction`` on the exact route; a polynomial
whose construction had to pass through irrational reflection matrices
carries float coefficients and ``exact=False``.

Monomials compare lexicographically (plain tuple order), which is the
monomial order the division-by-linear-form routine uses.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import InternalInvariantError

_FLOAT_DIV_TOL = 1e-9


def _is_zero(c):
    return c == 0


class MultivariatePolynomial:
    __slots__ = ("dim", "terms", "exact")

    def __init__(self, dim, terms=None, exact=True):
        self.dim = int(dim)
        self.terms = {}
        self.exact = bool(exact)
        if terms:
            for mono, c in terms.items():
                if len(mono) != self.dim:
                    raise ValueError("monomial arity mismatch")
                if not _is_zero(c):
                    self.terms[tuple(mono)] = c

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, dim, c):
        c = Fraction(c) if not isinstance(c, float) else c
        exact = not isinstance(c, float)
        return cls(dim, {(0,) * dim: c} if c != 0 else {}, exact=exact)

    @classmethod
    def variable(cls, i, dim):
        mono = tuple(1 if j == i else 0 for j in range(dim))
        return cls(dim, {mono: Fraction(1)})

    @classmethod
    def squared_norm(cls, dim):
        terms = {}
        for i in range(dim):
            mono = tuple(2 if j == i else 0 for j in range(dim))
            terms[mono] = Fraction(1)
        return cls(dim, terms)

    @classmethod
    def from_monomials(cls, dim, items):
        """items: iterable of (exponent tuple, coefficient)."""
        terms = {}
        exact = True
        for mono, c in items:
            if isinstance(c, float):
                exact = False
            else:
                c = Fraction(c)
            terms[tuple(mono)] = terms.get(tuple(mono), 0) + c
        return cls(dim, terms, exact=exact)

    # -- ring operations --------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MultivariatePolynomial):
            return other
        return MultivariatePolynomial.constant(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            s = terms.get(mono, 0) + c
            if _is_zero(s):
                terms.pop(mono, None)
            else:
                terms[mono] = s
        return MultivariatePolynomial(self.dim, terms,
                                      exact=self.exact and other.exact)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return MultivariatePolynomial(
            self.dim, {m: -c for m, c in self.terms.items()}, exact=self.exact)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if not isinstance(other, MultivariatePolynomial):
            if _is_zero(other):
                return MultivariatePolynomial(self.dim, {}, exact=self.exact)
            scal = other if isinstance(other, float) else Fraction(other)
            return MultivariatePolynomial(
                self.dim, {m: c * scal for m, c in self.terms.items()},
                exact=self.exact and not isinstance(other, float))
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                s = terms.get(mono, 0) + c1 * c2
                if _is_zero(s):
                    terms.pop(mono, None)
                else:
                    terms[mono] = s
        return MultivariatePolynomial(self.dim, terms,
                                      exact=self.exact and other.exact)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __eq__(self, other):
        if not isinstance(other, MultivariatePolynomial):
            other = self._coerce(other)
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def max_abs_coeff(self):
        if not self.terms:
            return 0.0
        return max(abs(float(c)) for c in self.terms.values())

    def degree(self):
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def is_homogeneous(self):
        degs = {sum(m) for m in self.terms}
        return len(degs) <= 1

    # -- calculus ----------------------------------------------------------

    def partial(self, i):
        terms = {}
        for mono, c in self.terms.items():
            e = mono[i]
            if e == 0:
                continue
            m2 = list(mono)
            m2[i] = e - 1
            terms[tuple(m2)] = terms.get(tuple(m2), 0) + c * e
        return MultivariatePolynomial(self.dim, terms, exact=self.exact)

    def compose_linear(self, matrix):
        """p(M x): substitute x_j -> sum_l M[j][l] x_l.

        ``matrix`` is a d x d nested sequence; Fractions keep the result
        exact, floats force the inexact route.
        """
        d = self.dim
        rows = [list(row) for row in matrix]
        exact = self.exact and all(
            not isinstance(v, float) for row in rows for v in row)
        lin = []
        for j in range(d):
            t = {}
            for l in range(d):
                v = rows[j][l]
                if _is_zero(v):
                    continue
                mono = tuple(1 if q == l else 0 for q in range(d))
                t[mono] = v if isinstance(v, float) else Fraction(v)
            lin.append(MultivariatePolynomial(d, t, exact=exact))

        one = MultivariatePolynomial.constant(d, 1)
        power_cache = {}

        def power(j, e):
            if e == 0:
                return one
            if (j, e) not in power_cache:
                power_cache[(j, e)] = power(j, e - 1) * lin[j]
            return power_cache[(j, e)]

        out = MultivariatePolynomial(d, {}, exact=exact)
        for mono, c in self.terms.items():
            term = MultivariatePolynomial.constant(d, c)
            for j, e in enumerate(mono):
                if e:
                    term = term * power(j, e)
            out = out + term
        return out

    def divide_by_linear(self, coeffs):
        """Exact division by the linear form L = sum coeffs[j] x_j.

        Returns the quotient q with self = q * L; raises if a remainder
        is left (the callers' difference polynomials are always divisible
        when the reflection arithmetic is correct).
        """
        d = self.dim
        coeffs = list(coeffs)
        lead = next((j for j in range(d) if not _is_zero(coeffs[j])), None)
        if lead is None:
            raise InternalInvariantError("division by the zero form")
        c_lead = coeffs[lead]
        work = dict(self.terms)
        q = {}
        scale = max(self.max_abs_coeff(), 1.0)
        while work:
            mono = max(work)
            c = work.pop(mono)
            if mono[lead] == 0:
                if self.exact or abs(float(c)) > _FLOAT_DIV_TOL * scale:
                    raise InternalInvariantError(
                        "polynomial is not divisible by the linear form "
                        "(broken reflection arithmetic?)")
                continue  # float dust
            qm = list(mono)
            qm[lead] -= 1
            qm = tuple(qm)
            qc = c / c_lead
            q[qm] = q.get(qm, 0) + qc
            # subtract qc * x^qm * L; the lead term cancelled with the pop
            for j in range(d):
                if j == lead or _is_zero(coeffs[j]):
                    continue
                mm = list(qm)
                mm[j] += 1
                mm = tuple(mm)
                s = work.get(mm, 0) - qc * coeffs[j]
                if _is_zero(s):
                    work.pop(mm, None)
                else:
                    work[mm] = s
        return MultivariatePolynomial(d, q, exact=self.exact)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        out = np.zeros(pts.shape[0])
        for mono, c in self.terms.items():
            t = np.full(pts.shape[0], float(c))
            for j, e in enumerate(mono):
                if e:
                    t = t * pts[:, j] ** e
            out += t
        return float(out[0]) if single else out

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for mono in sorted(self.terms, reverse=True):
            c = self.terms[mono]
            v = "*".join(f"x{j+1}^{e}" if e > 1 else f"x{j+1}"
                         for j, e in enumerate(mono) if e)
            parts.append(f"{c}" + (f"*{v}" if v else ""))
        tag = "" if self.exact else ", inexact"
        return f"Poly({' + '.join(parts)}{tag})"
