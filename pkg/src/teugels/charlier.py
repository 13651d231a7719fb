"""Cox-process example: monic Charlier polynomials and the lambda coefficients.

Charlier polynomials here are monic, defined through
``exp(-w a) (1 + w)^y = sum_n C_n(y, a) w^n / n!``; variable 1 is ``y`` and
variable 2 is ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .cumulant_poly import gamma
from .polynomial import ExactPolynomial
from .process_model import cumulant_fn
from .kernels import poly_eval
from .martingale_lab import DEFAULT_TESTS, THRESHOLD, pair_batch, increment_test

__all__ = [
    "CONVENTIONS",
    "LambdaTable",
    "ExpansionReport",
    "lambda_table",
    "charlier_poly",
    "charlier_values",
    "harmonic_in_a",
    "expansion_check",
    "charlier_martingale_test",
]

CONVENTIONS = ("compensated-unweighted", "raw-argument-weighted")

_Y = ExactPolynomial.variable(1)
_A = ExactPolynomial.variable(2)


@dataclass(frozen=True)
class LambdaTable:
    order: int
    entries: tuple

    def to_dict(self):
        return {"order": self.order, "entries": [str(e) for e in self.entries]}


_lambda_cache = {}


def _lam(n):
    if n not in _lambda_cache:
        row = [1]
        for k in range(1, n):
            row.append(sum(comb(n, j) * _lam(j)[k - 1] for j in range(k, n)))
        _lambda_cache[n] = tuple(row)
    return _lambda_cache[n]


def lambda_table(n):
    """``lambda^(n)_1..n``: ``lambda_1 = 1``, ``lambda_{k+1} = sum_{j=k}^{n-1} C(n,j) lambda^(j)_k``."""
    if n < 1:
        raise ValueError("order must be >= 1")
    return LambdaTable(n, _lam(n))


_charlier_cache = {0: ExactPolynomial.constant(1), 1: _Y - _A}


def charlier_poly(n):
    """Monic Charlier ``C_n(y, a)`` via ``C_{n+1} = (y - n - a) C_n - n a C_{n-1}``."""
    if n < 0:
        raise ValueError("order must be >= 0")
    for m in range(max(_charlier_cache), n):
        _charlier_cache[m + 1] = (_Y - m - _A) * _charlier_cache[m] - _A * _charlier_cache[m - 1] * m
    return _charlier_cache[n]


def charlier_values(n, y, a):
    """Numeric ``C_n(y, a)`` elementwise."""
    y, a = np.broadcast_arrays(np.asarray(y, dtype=np.float64), np.asarray(a, dtype=np.float64))
    exps, coefs = charlier_poly(n).to_arrays(2)
    pts = np.column_stack([y.reshape(-1), a.reshape(-1)])
    return poly_eval(exps, coefs, pts).reshape(y.shape)


def harmonic_in_a(n):
    """``gamma(n)(x, -a, ..., -a)`` as a polynomial in ``x`` (var 1) and ``a`` (var 2)."""
    return gamma(n).substitute({k: -_A for k in range(2, n + 1)})


@dataclass(frozen=True)
class ExpansionReport:
    order: int
    convention: str
    holds: bool
    lhs: ExactPolynomial
    rhs: ExactPolynomial

    def to_dict(self):
        return {
            "order": self.order,
            "convention": self.convention,
            "holds": self.holds,
            "lhs": self.lhs.format({1: "x", 2: "a"}),
            "rhs": self.rhs.format({1: "x", 2: "a"}),
        }


def expansion_check(n, convention):
    """Compare ``g_n(x, a)`` with ``sum_j lambda^(n)_j w_j C_j(arg, a)``.

    ``compensated-unweighted``: ``arg = x``, ``w_j = 1``.
    ``raw-argument-weighted``: ``arg = x + a`` (the uncompensated count),
    ``w_j = 1 / j!``.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    if convention == "compensated-unweighted":
        arg, weight = _Y, lambda j: 1
    elif convention == "raw-argument-weighted":
        arg, weight = _Y + _A, lambda j: Fraction(1, factorial(j))
    else:
        raise ValueError(f"unknown convention {convention!r}; use one of {CONVENTIONS}")
    lam = lambda_table(n).entries
    rhs = ExactPolynomial()
    for j in range(1, n + 1):
        rhs = rhs + charlier_poly(j).substitute({1: arg}) * (lam[j - 1] * weight(j))
    lhs = harmonic_in_a(n)
    return ExpansionReport(n, convention, lhs == rhs, lhs, rhs)


def charlier_martingale_test(
    spec, n, pairs, num_paths, seed, tests=DEFAULT_TESTS, threshold=THRESHOLD, batch=None, workers=1
):
    """Martingale check of ``C_n(N_t, Lambda(t))`` on a Cox spec.

    ``N_t = X_t + Lambda(t)`` is the raw jump count and ``Lambda = F_2``.
    """
    if len(spec.atoms) != 1 or spec.atoms[0].size != 1.0 or not spec.pure_jump:
        raise ValueError("the Charlier cross-check needs a Cox spec (one unit atom, no Gaussian part)")
    b = pair_batch(spec, pairs, num_paths, seed, batch, workers)
    lam = cumulant_fn(spec, 2, b.grid)[None, :]
    values = charlier_values(n, b.x_values + lam, lam)
    return increment_test("charlier", n, values, b.x_values, b.grid, pairs, b.seed, tests, threshold)
