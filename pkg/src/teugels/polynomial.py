"""Sparse multivariate polynomials with exact coefficients.

Variables are 1-based: exponent tuple position ``i - 1`` holds the power of
``x_i``. Coefficients are Python ints, or ``Fraction`` where a division is
unavoidable. Trailing zero exponents are trimmed so that two equal
polynomials always have identical term maps.
"""
from __future__ import annotations

import json
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType

import numpy as np

__all__ = ["ExactPolynomial"]


def _trim(exp):
    exp = tuple(int(e) for e in exp)
    end = len(exp)
    while end and exp[end - 1] == 0:
        end -= 1
    return exp[:end]


def _add_exp(a, b):
    if len(a) < len(b):
        a, b = b, a
    return tuple(a[i] + (b[i] if i < len(b) else 0) for i in range(len(a)))


def _norm_coef(c):
    if isinstance(c, Fraction):
        return int(c.numerator) if c.denominator == 1 else c
    if isinstance(c, (bool, np.bool_)):
        raise TypeError("boolean coefficient")
    if isinstance(c, (int, np.integer)):
        return int(c)
    if isinstance(c, Rational):
        return _norm_coef(Fraction(c.numerator, c.denominator))
    raise TypeError(f"coefficient must be exact (int or Fraction), got {type(c).__name__}")


class ExactPolynomial:
    """Immutable polynomial ``sum coef * prod x_i**e_i``.

    Build with :meth:`constant`, :meth:`variable` or from a term mapping
    ``{exponent_tuple: coefficient}``; zero coefficients are dropped.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        acc = {}
        for exp, coef in (terms or {}).items():
            exp = _trim(exp)
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            acc[exp] = acc.get(exp, 0) + _norm_coef(coef)
        self._terms = MappingProxyType({e: c for e, c in acc.items() if c != 0})
        self._hash = None

    @classmethod
    def _raw(cls, terms):
        # terms already canonical and zero-free
        obj = cls.__new__(cls)
        obj._terms = MappingProxyType(terms)
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, c):
        return cls({(): c})

    @classmethod
    def variable(cls, i, power=1):
        if i < 1:
            raise ValueError("variables are 1-based")
        exp = [0] * i
        exp[i - 1] = power
        return cls({tuple(exp): 1})

    # ----------------------------------------------------------------- access
    @property
    def terms(self):
        return self._terms

    @property
    def nvars(self):
        """Highest variable index that appears (0 for constants)."""
        return max((len(e) for e in self._terms), default=0)

    def is_zero(self):
        return not self._terms

    def coefficients(self):
        return list(self._terms.values())

    def total_degree(self):
        return max((sum(e) for e in self._terms), default=0)

    def weighted_degrees(self):
        """Set of isobaric weights ``sum i * e_i`` over the monomials."""
        return {sum((i + 1) * e for i, e in enumerate(exp)) for exp in self._terms}

    # ------------------------------------------------------------- arithmetic
    @staticmethod
    def _coerce(other):
        if isinstance(other, ExactPolynomial):
            return other
        return ExactPolynomial.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = _norm_coef(v)
            else:
                out.pop(e, None)
        return ExactPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactPolynomial._raw({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ExactPolynomial):
            c = _norm_coef(other)
            if c == 0:
                return ExactPolynomial()
            return ExactPolynomial._raw({e: _norm_coef(v * c) for e, v in self._terms.items()})
        out = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = _add_exp(e1, e2)
                out[e] = out.get(e, 0) + c1 * c2
        return ExactPolynomial({e: c for e, c in out.items()})

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a non-negative int")
        result = ExactPolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def times_variable(self, i, power=1):
        """Multiply by ``x_i**power`` (cheap exponent shift)."""
        if power == 0:
            return self
        out = {}
        for e, c in self._terms.items():
            exp = list(e) + [0] * max(0, i - len(e))
            exp[i - 1] += power
            out[tuple(exp)] = c
        return ExactPolynomial._raw(out)

    def __eq__(self, other):
        if not isinstance(other, ExactPolynomial):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # --------------------------------------------------------------- calculus
    def partial(self, i):
        """Partial derivative with respect to ``x_i``."""
        out = {}
        for e, c in self._terms.items():
            if len(e) >= i and e[i - 1] > 0:
                exp = list(e)
                exp[i - 1] -= 1
                exp = _trim(exp)
                out[exp] = out.get(exp, 0) + c * e[i - 1]
        return ExactPolynomial(out)

    def substitute(self, mapping):
        """Replace ``x_i`` by ``mapping[i]`` (a polynomial or exact number).

        Variables absent from ``mapping`` are left alone. Substitution is
        simultaneous.
        """
        mapping = {i: self._coerce(p) for i, p in mapping.items()}
        cache = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = mapping[i] ** k
            return cache[key]

        result = ExactPolynomial()
        for e, c in self._terms.items():
            kept = [0 if (j + 1) in mapping else p for j, p in enumerate(e)]
            term = ExactPolynomial({tuple(kept): c})
            for j, p in enumerate(e):
                if p and (j + 1) in mapping:
                    term = term * power(j + 1, p)
            result = result + term
        return result

    def collect(self, i):
        """Coefficients of ``self`` viewed as a polynomial in ``x_i``.

        Returns a list ``c`` with ``self == sum(c[k] * x_i**k)``; each
        ``c[k]`` is free of ``x_i``.
        """
        buckets = {}
        for e, c in self._terms.items():
            k = e[i - 1] if len(e) >= i else 0
            exp = list(e)
            if k:
                exp[i - 1] = 0
            buckets.setdefault(k, {})[tuple(exp)] = c
        top = max(buckets, default=0)
        return [ExactPolynomial(buckets.get(k, {})) for k in range(top + 1)]

    # ------------------------------------------------------------- evaluation
    def __call__(self, *values):
        return self.evaluate(values)

    def evaluate(self, values):
        """Evaluate at ``values[i-1]`` for ``x_i``.

        Exact when the inputs are ints/Fractions; works with floats or
        broadcastable numpy arrays too. Missing trailing values count as 0.
        """
        values = list(values)
        total = 0
        for e, c in self._terms.items():
            term = c
            for j, p in enumerate(e):
                if p:
                    v = values[j] if j < len(values) else 0
                    term = term * v**p
            total = total + term
        return total

    def to_arrays(self, nvars=None):
        """Dense ``(exponents, float coefficients)`` for the numeric kernels."""
        k = self.nvars if nvars is None else nvars
        if k < self.nvars:
            raise ValueError("nvars smaller than the polynomial's variable count")
        items = sorted(self._terms.items())
        exps = np.zeros((len(items), k), dtype=np.int64)
        coefs = np.zeros(len(items), dtype=np.float64)
        for row, (e, c) in enumerate(items):
            exps[row, : len(e)] = e
            coefs[row] = float(c)
        return exps, coefs

    # ---------------------------------------------------------- serialization
    def to_json_dict(self):
        k = self.nvars
        terms = []
        for e in sorted(tuple(e) + (0,) * (k - len(e)) for e in self._terms):
            coef = self._terms[_trim(e)]
            terms.append({"exp": list(e), "coef": str(coef)})
        return {"vars": k, "terms": terms}

    def to_json(self):
        return json.dumps(self.to_json_dict(), separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data):
        terms = {}
        for t in data["terms"]:
            if len(t["exp"]) != data["vars"]:
                raise ValueError("exponent length does not match 'vars'")
            terms[tuple(t["exp"])] = Fraction(t["coef"])
        return cls(terms)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))

    def format(self, names=None):
        """Human form such as ``x1^3 + 3 x1 x2 + x3``.

        Terms are ordered by descending exponent vector. ``names`` maps
        variable index to display name (default ``x<i>``).
        """
        if not self._terms:
            return "0"

        def name(i):
            return names[i] if names and i in names else f"x{i}"

        pieces = []
        for e in sorted(self._terms, reverse=True):
            c = self._terms[e]
            factors = []
            for j, p in enumerate(e):
                if p == 1:
                    factors.append(name(j + 1))
                elif p > 1:
                    factors.append(f"{name(j + 1)}^{p}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = " ".join(factors)
            else:
                body = f"{mag} " + " ".join(factors)
            pieces.append((c < 0, body))
        neg, body = pieces[0]
        out = ("-" if neg else "") + body
        for neg, body in pieces[1:]:
            out += (" - " if neg else " + ") + body
        return out

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"ExactPolynomial({self.format()!r})"
