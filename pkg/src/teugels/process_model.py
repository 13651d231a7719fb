"""Centered additive processes with a Gaussian part and finitely many jump atoms.

A :class:`ProcessSpec` holds the Gaussian variance function ``sigma2(t)`` and
a list of :class:`JumpAtom` (size ``x_i``, cumulative intensity ``Lambda_i``),
so the Levy measure at time ``t`` is ``sum_i Lambda_i(t) delta_{x_i}``. The
jumps are compensated, so ``E[X_t] = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cumulant_poly import gamma_x1_coefficients
from .kernels import poly_eval

__all__ = [
    "SpecError",
    "MonotoneFunction",
    "Zero",
    "Linear",
    "Power",
    "PiecewiseLinear",
    "Step",
    "JumpAtom",
    "ProcessSpec",
    "cumulant_fn",
    "drift_fn",
    "harmonic_coefficients",
    "Issue",
    "ValidationReport",
    "validate",
    "function_from_dict",
    "spec_from_dict",
    "load_spec",
    "cox_spec",
    "symmetric_spec",
    "gaussian_spec",
]


class SpecError(ValueError):
    """Malformed process description."""


# ------------------------------------------------------------- functions
class MonotoneFunction:
    """Nondecreasing ``t -> value`` with ``value(0) = 0``; vectorized over t.

    Subclasses provide ``__call__``, ``to_dict`` and optionally a closed-form
    ``inverse``. The default inverse is monotone bisection for
    ``inf{t : f(t) >= v}``.
    """

    kind = "abstract"

    def __call__(self, t):  # pragma: no cover
        raise NotImplementedError

    def inverse(self, v, hi=None, iters=200):
        v = np.asarray(v, dtype=np.float64)
        hi = 1.0 if hi is None else float(hi)
        while np.any(self(hi) < v):
            hi *= 2.0
            if hi > 1e12:
                raise SpecError(f"{self.describe()} never reaches level {v.max()}")
        lo = np.zeros_like(v)
        up = np.full_like(v, hi)
        for _ in range(iters):
            mid = 0.5 * (lo + up)
            reached = self(mid) >= v
            up = np.where(reached, mid, up)
            lo = np.where(reached, lo, mid)
        return up

    def is_zero(self):
        return False

    def describe(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self):  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(MonotoneFunction):
    kind = "zero"

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=np.float64))

    def is_zero(self):
        return True

    def inverse(self, v, hi=None, iters=200):
        raise SpecError("the zero function has no inverse")

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class Linear(MonotoneFunction):
    """``a * t``."""

    a: float
    kind = "linear"

    def __call__(self, t):
        return self.a * np.asarray(t, dtype=np.float64)

    def is_zero(self):
        return self.a == 0

    def inverse(self, v, hi=None, iters=200):
        if self.a <= 0:
            raise SpecError("linear function with a <= 0 is not invertible")
        return np.asarray(v, dtype=np.float64) / self.a

    def to_dict(self):
        return {"kind": "linear", "a": self.a}


@dataclass(frozen=True)
class Power(MonotoneFunction):
    """``a * t**p`` with ``p >= 1``."""

    a: float
    p: float
    kind = "power"

    def __post_init__(self):
        if self.p < 1:
            raise SpecError(f"power function needs p >= 1, got {self.p}")

    def __call__(self, t):
        return self.a * np.asarray(t, dtype=np.float64) ** self.p

    def is_zero(self):
        return self.a == 0

    def inverse(self, v, hi=None, iters=200):
        if self.a <= 0:
            raise SpecError("power function with a <= 0 is not invertible")
        return (np.asarray(v, dtype=np.float64) / self.a) ** (1.0 / self.p)

    def to_dict(self):
        return {"kind": "power", "a": self.a, "p": self.p}


@dataclass(frozen=True)
class PiecewiseLinear(MonotoneFunction):
    """Linear interpolation of a table; constant after the last knot."""

    times: tuple
    values: tuple
    kind = "piecewise_linear"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or len(t) < 2 or len(t) != len(self.values):
            raise SpecError("piecewise_linear needs matching times/values of length >= 2")
        if np.any(np.diff(t) <= 0):
            raise SpecError("piecewise_linear times must be strictly increasing")
        object.__setattr__(self, "times", tuple(float(x) for x in self.times))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=np.float64), self.times, self.values)

    def is_zero(self):
        return not any(self.values)

    def inverse(self, v, hi=None, iters=200):
        vals = np.asarray(self.values)
        if np.all(np.diff(vals) > 0):
            return np.interp(np.asarray(v, dtype=np.float64), vals, self.times)
        if np.any(np.diff(vals) < 0):
            raise SpecError("decreasing piecewise_linear table is not invertible")
        return super().inverse(v, hi=self.times[-1], iters=iters)

    def to_dict(self):
        return {"kind": "piecewise_linear", "times": list(self.times), "values": list(self.values)}


@dataclass(frozen=True)
class Step(MonotoneFunction):
    """``height * 1[t >= at]``; discontinuous, kept so validation can reject it."""

    at: float
    height: float
    kind = "step"

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= self.at, self.height, 0.0)

    def to_dict(self):
        return {"kind": "step", "at": self.at, "height": self.height}


# ----------------------------------------------------------------- specs
@dataclass(frozen=True)
class JumpAtom:
    size: float
    intensity: MonotoneFunction

    def __post_init__(self):
        if self.size == 0 or not np.isfinite(self.size):
            raise SpecError(f"jump size must be finite and nonzero, got {self.size}")

    def to_dict(self):
        return {"size": self.size, "intensity": self.intensity.to_dict()}


@dataclass(frozen=True)
class ProcessSpec:
    sigma2: MonotoneFunction = field(default_factory=Zero)
    atoms: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if self.sigma2.is_zero() and not self.atoms:
            raise SpecError("spec needs a nonzero Gaussian variance or at least one jump atom")

    @property
    def pure_jump(self):
        return self.sigma2.is_zero()

    @property
    def sizes(self):
        return np.array([a.size for a in self.atoms], dtype=np.float64)

    def to_dict(self):
        out = {"sigma2": self.sigma2.to_dict(), "atoms": [a.to_dict() for a in self.atoms]}
        if self.name:
            out["name"] = self.name
        return out


def cumulant_fn(spec, n, t):
    """Cumulant of order ``n >= 2`` of ``X_t``.

    ``F_2 = sigma2 + sum x_i^2 Lambda_i`` and ``F_n = sum x_i^n Lambda_i``.
    """
    if n < 2:
        raise ValueError(f"cumulant functions start at order 2, got {n}")
    t = np.asarray(t, dtype=np.float64)
    out = spec.sigma2(t) if n == 2 else np.zeros_like(t)
    for atom in spec.atoms:
        out = out + atom.size**n * atom.intensity(t)
    return out


def drift_fn(spec, t):
    """Compensator of the jump sum: ``sum_i x_i Lambda_i(t)``."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    for atom in spec.atoms:
        out = out + atom.size * atom.intensity(t)
    return out


def harmonic_coefficients(spec, n, t):
    """Coefficients ``[c_0, ..., c_n]`` of ``g_n(x, t)`` in powers of ``x``.

    ``g_n(x, t) = gamma(n)(x, -F_2(t), ..., -F_n(t))``. For array ``t`` the
    result has shape ``(n + 1,) + t.shape``.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    t = np.asarray(t, dtype=np.float64)
    flat = t.reshape(-1)
    pts = np.zeros((flat.size, max(n, 1)))
    for k in range(2, n + 1):
        pts[:, k - 1] = -cumulant_fn(spec, k, flat)
    coefs = []
    for c in gamma_x1_coefficients(n):
        exps, cf = c.to_arrays(max(n, 1))
        coefs.append(poly_eval(exps, cf, pts) if len(cf) else np.zeros(flat.size))
    return np.stack(coefs).reshape((n + 1,) + t.shape)


# ------------------------------------------------------------- validation
@dataclass(frozen=True)
class Issue:
    function: str
    kind: str
    index: int
    time: float
    increment: float

    def __str__(self):
        return (
            f"{self.kind} in {self.function} at grid index {self.index} "
            f"(t={self.time:.17g}, increment={self.increment:.17g})"
        )


@dataclass
class ValidationReport:
    horizon: float
    grid_points: int
    issues: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.issues

    def to_dict(self):
        return {
            "ok": self.ok,
            "horizon": self.horizon,
            "grid_points": self.grid_points,
            "issues": [
                {"function": i.function, "kind": i.kind, "index": i.index, "time": i.time, "increment": i.increment}
                for i in self.issues
            ],
            "notes": list(self.notes),
        }


def _check_function(name, values, grid, issues):
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    if abs(values[0]) > 1e-12 * max(scale, 1.0):
        issues.append(Issue(name, "nonzero at t=0", 0, float(grid[0]), float(values[0])))
    inc = np.diff(values)
    neg = np.flatnonzero(inc < -1e-12 * max(scale, 1.0))
    if neg.size:
        k = int(neg[0])
        issues.append(Issue(name, "monotonicity violation", k + 1, float(grid[k + 1]), float(inc[k])))
    tol = 10.0 * scale / len(grid)
    if inc.size:
        k = int(np.argmax(inc))
        if inc[k] > tol:
            issues.append(Issue(name, "continuity violation", k + 1, float(grid[k + 1]), float(inc[k])))


def validate(spec, horizon, grid_points, max_order=4):
    """Grid checks of the hypotheses the martingale results rely on.

    ``sigma2`` and each intensity must start at 0, be nondecreasing and have
    no cell increment above ``10 * max / grid_points``. Even cumulant
    functions up to order ``2 * max_order`` must be nondecreasing.
    """
    if horizon <= 0 or grid_points < 2:
        raise ValueError("need horizon > 0 and grid_points >= 2")
    grid = np.linspace(0.0, horizon, grid_points)
    rep = ValidationReport(float(horizon), int(grid_points))
    if not spec.sigma2.is_zero():
        _check_function("sigma2", spec.sigma2(grid), grid, rep.issues)
    for i, atom in enumerate(spec.atoms):
        _check_function(f"atoms[{i}].intensity", atom.intensity(grid), grid, rep.issues)
    if rep.issues:
        return rep
    for n in range(2, 2 * max_order + 1):
        f = cumulant_fn(spec, n, grid)
        if not np.any(f):
            rep.notes.append(f"F_{n} identically 0 on the grid")
            continue
        if n % 2 == 0:
            inc = np.diff(f)
            bad = np.flatnonzero(inc < -1e-12 * max(1.0, float(np.abs(f).max())))
            if bad.size:
                k = int(bad[0])
                rep.issues.append(Issue(f"F_{n}", "monotonicity violation", k + 1, float(grid[k + 1]), float(inc[k])))
            else:
                rep.notes.append(f"F_{n} nondecreasing")
    return rep


# ---------------------------------------------------------------- JSON I/O
_KINDS = {
    "zero": lambda d: Zero(),
    "linear": lambda d: Linear(float(d["a"])),
    "power": lambda d: Power(float(d["a"]), float(d["p"])),
    "piecewise_linear": lambda d: PiecewiseLinear(tuple(d["times"]), tuple(d["values"])),
    "step": lambda d: Step(float(d["at"]), float(d["height"])),
}


def function_from_dict(d):
    try:
        return _KINDS[d["kind"]](d)
    except KeyError as exc:
        raise SpecError(f"bad function description {d!r}: missing {exc}") from None


def spec_from_dict(d):
    sigma2 = function_from_dict(d.get("sigma2", {"kind": "zero"}))
    atoms = tuple(JumpAtom(float(a["size"]), function_from_dict(a["intensity"])) for a in d.get("atoms", []))
    return ProcessSpec(sigma2, atoms, d.get("name", ""))


def load_spec(path):
    """Load a spec from a JSON file, or a bundled spec by name (e.g. ``cox_t2``)."""
    p = Path(path)
    if not p.exists():
        bundled = Path(__file__).parent / "specs" / f"{path}.json"
        if bundled.exists():
            p = bundled
        else:
            raise SpecError(f"no spec file {path!r}")
    with open(p) as fh:
        return spec_from_dict(json.load(fh))


# ---------------------------------------------------------- built-in specs
def cox_spec(intensity=None):
    """Compensated Cox process: one unit atom with cumulative intensity ``intensity``."""
    intensity = Power(1.0, 2.0) if intensity is None else intensity
    return ProcessSpec(Zero(), (JumpAtom(1.0, intensity),), "cox")


def symmetric_spec(rate=1.0, sigma2=None):
    """Jumps of size +1 and -1, each with cumulative intensity ``rate * t / 2``."""
    lam = Linear(rate / 2.0)
    return ProcessSpec(Zero() if sigma2 is None else sigma2, (JumpAtom(1.0, lam), JumpAtom(-1.0, lam)), "symmetric")


def gaussian_spec(sigma2=None):
    return ProcessSpec(Linear(1.0) if sigma2 is None else sigma2, (), "gaussian")

