"""Kendall (complete Bell) polynomials linking moments and cumulants.

``gamma(n)`` is the polynomial with ``mu_n = gamma(n)(kappa_1, ..., kappa_n)``;
variable ``x_i`` stands for the cumulant of order ``i``.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from math import comb

from .polynomial import ExactPolynomial

__all__ = [
    "GAMMA_ORDER_CAP",
    "ORACLE_ORDER_CAP",
    "OrderTooLargeError",
    "OracleCapError",
    "gamma",
    "gamma_partition_oracle",
    "iter_set_partitions",
    "moments_from_cumulants",
    "cumulants_from_moments",
    "gamma_partial",
    "gamma_shift_expand",
    "gamma_x1_coefficients",
    "check_recurrence",
]

GAMMA_ORDER_CAP = 24
ORACLE_ORDER_CAP = 12


class OrderTooLargeError(ValueError):
    pass


class OracleCapError(ValueError):
    pass


_cache = {0: ExactPolynomial.constant(1)}
_lock = threading.Lock()


def gamma(n, cap=None):
    """Kendall polynomial of order ``n``, built by the binomial recurrence.

    ``gamma(n + 1) = sum_j C(n, j) gamma(j) x_{n+1-j}``, memoized.

    >>> str(gamma(3))
    'x1^3 + 3 x1 x2 + x3'
    """
    cap = GAMMA_ORDER_CAP if cap is None else cap
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"order must be a non-negative int, got {n!r}")
    if n > cap:
        raise OrderTooLargeError(f"order too large: {n} exceeds the cap of {cap}")
    poly = _cache.get(n)
    if poly is not None:
        return poly
    with _lock:
        top = max(_cache)
        for m in range(top, n):
            nxt = ExactPolynomial()
            for j in range(m + 1):
                nxt = nxt + _cache[j].times_variable(m + 1 - j) * comb(m, j)
            _cache[m + 1] = nxt
    return _cache[n]


def check_recurrence(n):
    """True if ``gamma(n+1)`` equals the binomial recurrence rebuilt from scratch."""
    rhs = ExactPolynomial()
    for j in range(n + 1):
        rhs = rhs + gamma(j) * ExactPolynomial.variable(n + 1 - j) * comb(n, j)
    return gamma(n + 1) == rhs


# ------------------------------------------------------------------ oracles
def iter_set_partitions(n):
    """Yield every set partition of ``{0, ..., n-1}`` as a list of blocks."""
    if n == 0:
        yield []
        return

    def rec(i, blocks):
        if i == n:
            yield [list(b) for b in blocks]
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def _block_size_counts(n):
    # Insert elements one at a time into a growing set partition, merging
    # partial partitions that share the same multiset of block sizes.
    states = {(): 1}
    for _ in range(n):
        nxt = {}
        for sizes, count in states.items():
            seen = {}
            for s in sizes:
                seen[s] = seen.get(s, 0) + 1
            for s, mult in seen.items():
                lst = list(sizes)
                lst.remove(s)
                lst.append(s + 1)
                key = tuple(sorted(lst))
                nxt[key] = nxt.get(key, 0) + count * mult
            key = tuple(sorted(sizes + (1,)))
            nxt[key] = nxt.get(key, 0) + count
        states = nxt
    return states


def gamma_partition_oracle(n, cap=None, brute_force=False):
    """``sum over set partitions of {1..n} of prod_B x_|B|``.

    The default walks partitions by element insertion with merging of
    identical block-size states; ``brute_force=True`` lists every partition
    (Bell-number cost, use for small n only).
    """
    cap = ORACLE_ORDER_CAP if cap is None else cap
    if n < 0:
        raise ValueError("order must be non-negative")
    if n > cap:
        raise OracleCapError(f"oracle cap exceeded: {n} > {cap}")
    terms = {}
    if brute_force:
        for part in iter_set_partitions(n):
            exp = [0] * n
            for b in part:
                exp[len(b) - 1] += 1
            key = tuple(exp)
            terms[key] = terms.get(key, 0) + 1
    else:
        for sizes, count in _block_size_counts(n).items():
            exp = [0] * n
            for s in sizes:
                exp[s - 1] += 1
            terms[tuple(exp)] = count
    return ExactPolynomial(terms)


# ---------------------------------------------------- moment <-> cumulant
def _exact(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def moments_from_cumulants(kappa):
    """Raw moments ``mu_1..mu_n`` from cumulants ``kappa_1..kappa_n``."""
    kappa = [_exact(k) for k in kappa]
    if not kappa:
        raise ValueError("empty cumulant sequence")
    return [gamma(i).evaluate(kappa[:i]) for i in range(1, len(kappa) + 1)]


def cumulants_from_moments(mu):
    """Inverse of :func:`moments_from_cumulants` by triangular solve."""
    mu = [_exact(m) for m in mu]
    if not mu:
        raise ValueError("empty moment sequence")
    m = [1] + mu
    k = [0]
    for n in range(len(mu)):
        acc = m[n + 1]
        for j in range(1, n + 1):
            acc = acc - comb(n, j) * m[j] * k[n + 1 - j]
        k.append(acc)
    return k[1:]


# ------------------------------------------------------------- identities
def gamma_partial(n, j):
    """Symbolic derivative of ``gamma(n)`` with respect to ``x_j``."""
    if not 1 <= j <= n:
        raise ValueError(f"j must lie in 1..{n}, got {j}")
    return gamma(n).partial(j)


def gamma_shift_expand(n):
    """``gamma(n)`` with ``x_1 -> x_1 + y``, where ``y`` is variable ``n + 1``.

    The substituted polynomial is checked against the binomial sum
    ``sum_j C(n, j) gamma(n - j) y^j``; a mismatch raises ``AssertionError``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    y = ExactPolynomial.variable(n + 1)
    lhs = gamma(n).substitute({1: ExactPolynomial.variable(1) + y})
    rhs = ExactPolynomial()
    for j in range(n + 1):
        rhs = rhs + gamma(n - j).times_variable(n + 1, j) * comb(n, j)
    if lhs != rhs:
        raise AssertionError(f"shift expansion mismatch at order {n}")
    return lhs


def gamma_x1_coefficients(n):
    """``[c_0, ..., c_n]`` with ``gamma(n) = sum_j c_j x_1^j``.

    ``c_j = C(n, j) gamma(n - j)(0, x_2, ...)``; the returned list is built
    from that formula, not by reading off ``gamma(n)``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return [gamma(n - j).substitute({1: 0}) * comb(n, j) for j in range(n + 1)]
