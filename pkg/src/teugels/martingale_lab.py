"""Martingales ``M^(n)_t = gamma(n)(X_t, -F_2(t), ..., -F_n(t))`` on simulated paths.

Martingality is certified statistically: for pairs ``s < t`` and test
functions ``h`` of ``X_s`` the sample mean of ``(M_t - M_s) h(X_s)`` must lie
within ``threshold`` standard errors of zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .cumulant_poly import gamma
from .kernels import poly_eval
from .process_model import cumulant_fn, drift_fn
from .simulator import simulate_batch, variations, x_at

__all__ = [
    "DEFAULT_TESTS",
    "THRESHOLD",
    "DecompositionError",
    "TestEntry",
    "MartingaleReport",
    "gamma_values",
    "martingale_path",
    "decomposition_residual",
    "increment_test",
    "martingale_test",
    "compensator_test",
    "negative_control_test",
    "pair_grid",
    "pair_batch",
]

THRESHOLD = 4.0
TEST_FUNCTIONS = {
    "1": lambda x: np.ones_like(x),
    "x": lambda x: x,
    "x^2": lambda x: x * x,
}
DEFAULT_TESTS = ("1", "x", "x^2")


class DecompositionError(ValueError):
    pass


@lru_cache(maxsize=None)
def _compiled(n):
    return gamma(n).to_arrays(max(n, 1))


def gamma_values(spec, n, x, t):
    """``gamma(n)(x, -F_2(t), ..., -F_n(t))`` elementwise over broadcast ``x, t``."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=np.float64), np.asarray(t, dtype=np.float64))
    if n == 0:
        return np.ones(x.shape)
    pts = np.empty((x.size, n))
    pts[:, 0] = x.reshape(-1)
    flat_t = t.reshape(-1)
    for k in range(2, n + 1):
        pts[:, k - 1] = -cumulant_fn(spec, k, flat_t)
    exps, coefs = _compiled(n)
    return poly_eval(exps, coefs, pts).reshape(x.shape)


def martingale_path(spec, path, n):
    """``M^(n)`` on the grid of ``path`` (a PathRecord or PathBatch)."""
    if n < 1:
        raise ValueError("order must be >= 1")
    return gamma_values(spec, n, path.x_values, path.grid)


# ---------------------------------------------------------- decomposition
def decomposition_residual(spec, path, n, refinement_level=0):
    """``|M^(n)_t - sum_j C(n,j) int_0^t M^(n-j)_{s-} dY^(j)_s|`` per grid point.

    The grid is the path's grid refined ``2**refinement_level`` times. Jump
    terms use the exact pre-jump value of ``X``; compensator terms are
    left-point Riemann-Stieltjes sums over the grid merged with the jump
    times.
    """
    if not spec.pure_jump:
        raise DecompositionError("decomposition check requires pure-jump spec")
    if n < 1:
        raise ValueError("order must be >= 1")
    cells = (len(path.grid) - 1) * 2**refinement_level
    grid = np.linspace(0.0, path.grid[-1], cells + 1)
    nodes = np.union1d(grid, path.jump_times)
    x_nodes = x_at(path, spec, nodes)
    grid_pos = np.searchsorted(nodes, grid)

    integral = np.zeros(nodes.size)
    for j in range(1, n + 1):
        comp = drift_fn(spec, nodes) if j == 1 else cumulant_fn(spec, j, nodes)
        integrand = gamma_values(spec, n - j, x_nodes[:-1], nodes[:-1])
        integral[1:] += comb(n, j) * np.cumsum(integrand * np.diff(comp))

    s = path.jump_times
    z = path.jump_sizes
    x_before = np.concatenate([[0.0], np.cumsum(z)[:-1]])[: s.size] - drift_fn(spec, s)
    jump_terms = np.zeros(s.size)
    for j in range(1, n + 1):
        jump_terms += comb(n, j) * gamma_values(spec, n - j, x_before, s) * z**j
    jump_cum = np.concatenate([[0.0], np.cumsum(jump_terms)])
    rhs = jump_cum[np.searchsorted(s, grid, side="right")] - integral[grid_pos]

    m = gamma_values(spec, n, x_nodes[grid_pos], grid)
    return np.abs(m - rhs)


# ------------------------------------------------------------------ tests
@dataclass(frozen=True)
class TestEntry:
    __test__ = False

    order: int
    s: float
    t: float
    h: str
    estimate: float
    stderr: float
    verdict: str

    def to_dict(self):
        return {
            "order": self.order,
            "s": self.s,
            "t": self.t,
            "h": self.h,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "verdict": self.verdict,
        }


@dataclass
class MartingaleReport:
    name: str
    order: int
    seed: int
    num_paths: int
    threshold: float
    entries: list = field(default_factory=list)
    negative_control: bool = False

    @property
    def passed(self):
        return all(e.verdict == "pass" for e in self.entries)

    @property
    def ok(self):
        """Pass for ordinary tests; for a negative control, every h=1 test must fail."""
        if self.negative_control:
            ones = [e for e in self.entries if e.h == "1"]
            return bool(ones) and all(e.verdict == "fail" for e in ones)
        return self.passed

    def entry(self, s, t, h):
        for e in self.entries:
            if e.s == s and e.t == t and e.h == h:
                return e
        raise KeyError((s, t, h))

    def to_dict(self):
        return {
            "name": self.name,
            "order": self.order,
            "seed": self.seed,
            "num_paths": self.num_paths,
            "threshold": self.threshold,
            "negative_control": self.negative_control,
            "ok": self.ok,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        head = f"{self.name} n={self.order} paths={self.num_paths} seed={self.seed}"
        if self.negative_control:
            head += " [negative control]"
        lines = [head, f"{'s':>8} {'t':>8} {'h':>4} {'estimate':>25} {'stderr':>25} {'|z|':>8}  verdict"]
        for e in self.entries:
            z = abs(e.estimate) / e.stderr if e.stderr > 0 else float("nan")
            lines.append(
                f"{e.s:>8.4g} {e.t:>8.4g} {e.h:>4} {e.estimate:>25.17g} {e.stderr:>25.17g} {z:>8.3f}  {e.verdict}"
            )
        return "\n".join(lines)


def increment_test(name, order, values, x, grid, pairs, seed, tests=DEFAULT_TESTS, threshold=THRESHOLD):
    """Zero-mean checks of ``(V_t - V_s) h(X_s)`` for a process sampled on ``grid``.

    ``values`` and ``x`` are ``(num_paths, len(grid))`` arrays.
    """
    grid = np.asarray(grid)
    entries = []
    for s, t in sorted(pairs):
        if not 0 <= s < t:
            raise ValueError(f"bad pair ({s}, {t})")
        i = int(np.flatnonzero(np.isclose(grid, s, rtol=0, atol=1e-12))[0])
        k = int(np.flatnonzero(np.isclose(grid, t, rtol=0, atol=1e-12))[0])
        inc = values[:, k] - values[:, i]
        for h in tests:
            z = inc * TEST_FUNCTIONS[h](x[:, i])
            est = float(np.mean(z))
            se = float(np.std(z, ddof=1) / np.sqrt(z.size))
            if not np.isfinite(se) or se == 0.0:
                verdict = "inconclusive"
            else:
                verdict = "pass" if abs(est) <= threshold * se else "fail"
            entries.append(TestEntry(order, float(s), float(t), h, est, se, verdict))
    return MartingaleReport(name, order, int(seed), int(values.shape[0]), threshold, entries)


def pair_grid(pairs):
    pts = {0.0}
    for s, t in pairs:
        pts.update((float(s), float(t)))
    return np.array(sorted(pts))


def pair_batch(spec, pairs, num_paths, seed, batch=None, workers=1):
    """``batch`` if given, else a fresh batch on the grid of pair endpoints."""
    if batch is not None:
        return batch
    if num_paths < 2:
        raise ValueError("need at least 2 paths")
    return simulate_batch(spec, pair_grid(pairs), seed, num_paths, workers=workers)


def martingale_test(spec, n, pairs, num_paths, seed, tests=DEFAULT_TESTS, threshold=THRESHOLD, batch=None, workers=1):
    """Monte Carlo check that ``M^(n)`` has increments orthogonal to ``h(X_s)``.

    Paths are simulated on the grid of pair endpoints unless a ``batch``
    whose grid contains them is supplied.
    """
    b = pair_batch(spec, pairs, num_paths, seed, batch, workers)
    values = martingale_path(spec, b, n)
    return increment_test("martingale", n, values, b.x_values, b.grid, pairs, b.seed, tests, threshold)


def compensator_test(spec, n, pairs, num_paths, seed, tests=DEFAULT_TESTS, threshold=THRESHOLD, batch=None, workers=1):
    """Same check for ``(Y^(n)_t)^2 - F_{2n}(t)``."""
    b = pair_batch(spec, pairs, num_paths, seed, batch, workers)
    y = variations(b, spec, n).teugels_values
    values = y * y - cumulant_fn(spec, 2 * n, b.grid)[None, :]
    return increment_test("compensator", n, values, b.x_values, b.grid, pairs, b.seed, tests, threshold)


def negative_control_test(
    spec, pairs, num_paths, seed, n=2, kind="variation", tests=("1",), threshold=THRESHOLD, batch=None, workers=1
):
    """Planted non-martingale that the harness must reject.

    ``kind="variation"`` uses the uncompensated ``X^(n)``; ``kind="power"``
    uses ``X_t^n``. Both drift by ``F_n(t) - F_n(s)`` (for n = 2).
    """
    b = pair_batch(spec, pairs, num_paths, seed, batch, workers)
    if kind == "variation":
        values = variations(b, spec, n).variation_values
    elif kind == "power":
        values = b.x_values**n
    else:
        raise ValueError(f"unknown negative control kind {kind!r}")
    rep = increment_test(f"negative_control_{kind}", n, values, b.x_values, b.grid, pairs, b.seed, tests, threshold)
    rep.negative_control = True
    return rep

