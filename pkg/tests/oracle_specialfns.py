"""Brute-force arbitrary-precision oracle for the scalar special functions.

Plain partial sums in 50-digit arithmetic (precision raised further for
huge arguments, where the alternating raw series needs extra digits).
This module is the provenance source for every frozen special-function
value asserted in the tests; it deliberately shares no code with the
package implementations.
"""

import mpmath
from mpmath import mp, mpf


def kummer_oracle(a, b, s, dps=50, max_terms=20000):
    """M(a, b, s) by raw partial summation at >= dps digits."""
    with mpmath.workdps(int(dps + 0.46 * abs(s))):
        a, b, s = mpf(a), mpf(b), mpf(s)
        term = mpf(1)
        total = mpf(1)
        for n in range(max_terms):
            term = term * (a + n) / (b + n) * s / (n + 1)
            total += term
            if n > 5 and abs(term) < mpf(10) ** (-dps - 10) * abs(total):
                return total
    raise RuntimeError("oracle did not converge")


def bessel_oracle(lam, z, dps=50, max_terms=20000):
    """j_lam(z) by raw partial summation at >= dps digits."""
    with mpmath.workdps(int(dps + 0.9 * abs(z))):
        lam, z = mpf(lam), mpf(z)
        q = -z * z / 4
        term = mpf(1)
        total = mpf(1)
        for n in range(max_terms):
            term = term * q / ((n + 1) * (n + 1 + lam))
            total += term
            if n > 5 and abs(term) < mpf(10) ** (-dps - 10) * max(abs(total), mpf(10) ** (-dps)):
                return total
    raise RuntimeError("oracle did not converge")


def gamma_oracle(x, dps=50):
    with mpmath.workdps(dps):
        return mpmath.gamma(mpf(x))


def log_kummer_oracle(a, b, s, dps=50):
    """log M(a, b, s), via the positive-series transformation when the
    raw alternating sum would need excessive precision."""
    with mpmath.workdps(int(dps + 0.46 * abs(s))):
        if s >= 0:
            return mpmath.log(kummer_oracle(a, b, s, dps=dps))
        return mpf(s) + mpmath.log(kummer_oracle(b - a, b, -s, dps=dps))
