import json

import numpy as np
import pytest

from teugels.martingale_lab import (
    DecompositionError,
    compensator_test,
    decomposition_residual,
    gamma_values,
    increment_test,
    martingale_path,
    martingale_test,
    negative_control_test,
    pair_grid,
)
from teugels.process_model import (
    JumpAtom,
    Linear,
    Power,
    ProcessSpec,
    Zero,
    cox_spec,
    cumulant_fn,
    gaussian_spec,
    harmonic_coefficients,
    symmetric_spec,
)
from teugels.simulator import simulate_batch, simulate_path, uniform_grid

PAIRS = [(0.25, 0.5), (0.5, 1.0)]
COX = cox_spec(Power(1.0, 2.0))
SYM = symmetric_spec()
ASYM = ProcessSpec(Zero(), (JumpAtom(1.0, Linear(1.0)), JumpAtom(-0.5, Power(2.0, 1.5))))
GRID = uniform_grid(1.0, cells=32)


# ------------------------------------------------------------ examples
def test_low_order_closed_forms():
    b = simulate_batch(COX, GRID, 1, 30)
    x, t = b.x_values, b.grid[None, :]
    lam = t**2
    np.testing.assert_array_equal(martingale_path(COX, b, 1), x)
    np.testing.assert_allclose(martingale_path(COX, b, 2), x**2 - lam, atol=1e-12)
    np.testing.assert_allclose(martingale_path(COX, b, 3), x**3 - 3 * lam * x - lam, atol=1e-11)


@pytest.mark.parametrize("spec", [COX, SYM, ASYM, symmetric_spec(sigma2=Linear(0.5))])
@pytest.mark.parametrize("n", range(1, 7))
def test_harmonic_route_matches_direct(spec, n):
    b = simulate_batch(spec, GRID, 2, 20)
    direct = martingale_path(spec, b, n)
    c = harmonic_coefficients(spec, n, b.grid)
    via = sum(c[k][None, :] * b.x_values**k for k in range(n + 1))
    scale = 1 + np.abs(direct).max()
    np.testing.assert_allclose(via, direct, rtol=0, atol=1e-10 * scale)


def test_martingales_start_at_zero():
    b = simulate_batch(ASYM, GRID, 3, 10)
    for n in range(1, 7):
        assert not np.any(martingale_path(ASYM, b, n)[:, 0])


def test_gamma_values_order_zero():
    assert gamma_values(COX, 0, np.array([1.0, 2.0]), 0.5).tolist() == [1.0, 1.0]


# --------------------------------------------------------- decomposition
def test_decomposition_order_one_is_exact():
    rec = simulate_path(COX, uniform_grid(1.0, cells=256), 4, 0)
    assert np.max(decomposition_residual(COX, rec, 1)) < 1e-12


@pytest.mark.parametrize("spec", [COX, ASYM])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_decomposition_residual_halves_under_refinement(spec, n):
    ratios = []
    for p in range(20):
        rec = simulate_path(spec, uniform_grid(1.0, cells=512), 5, p)
        r0 = decomposition_residual(spec, rec, n, 0).max()
        r1 = decomposition_residual(spec, rec, n, 1).max()
        if r0 > 1e-9:
            ratios.append(r1 / r0)
    assert ratios
    assert 0.3 <= np.median(ratios) <= 0.7


def test_decomposition_rejects_gaussian_part():
    spec = gaussian_spec()
    rec = simulate_path(spec, GRID, 1, 0)
    with pytest.raises(DecompositionError, match="pure-jump"):
        decomposition_residual(spec, rec, 2)


# --------------------------------------------------------- Monte Carlo
@pytest.mark.parametrize("spec", [COX, SYM, ASYM])
def test_martingale_test_passes(spec):
    for n in (1, 2, 3, 4):
        rep = martingale_test(spec, n, PAIRS, 20_000, 7)
        assert rep.ok, rep.to_text()
        assert len(rep.entries) == 6


def test_shared_batch():
    b = simulate_batch(SYM, pair_grid(PAIRS), 9, 5000)
    a = martingale_test(SYM, 2, PAIRS, None, None, batch=b)
    c = martingale_test(SYM, 2, PAIRS, 5000, 9)
    assert a.to_dict() == c.to_dict()


def test_compensator_test_passes():
    for spec in (COX, SYM):
        for n in (1, 2):
            rep = compensator_test(spec, n, PAIRS, 20_000, 11)
            assert rep.ok, rep.to_text()


@pytest.mark.parametrize("kind", ["variation", "power"])
def test_negative_control_fails_loudly(kind):
    rep = negative_control_test(COX, PAIRS, 20_000, 3, kind=kind)
    assert rep.negative_control
    assert not rep.passed
    assert rep.ok
    for e in rep.entries:
        assert abs(e.estimate) > 10 * e.stderr


def test_negative_control_with_more_tests_still_needs_h1_failure():
    rep = negative_control_test(COX, PAIRS, 5000, 3, tests=("1", "x"))
    assert all(e.verdict == "fail" for e in rep.entries if e.h == "1")
    assert rep.ok
    with pytest.raises(ValueError):
        negative_control_test(COX, PAIRS, 100, 3, kind="other")


def test_zero_variance_is_inconclusive():
    grid = np.array([0.0, 0.5, 1.0])
    vals = np.zeros((10, 3))
    rep = increment_test("const", 1, vals, vals, grid, [(0.5, 1.0)], 0)
    assert [e.verdict for e in rep.entries] == ["inconclusive"] * 3
    assert not rep.ok
    # h = x is degenerate when X_0 = 0
    rep = martingale_test(COX, 1, [(0.0, 1.0)], 1000, 1)
    assert rep.entry(0.0, 1.0, "x").verdict == "inconclusive"
    assert rep.entry(0.0, 1.0, "1").verdict == "pass"


def test_bad_pair():
    with pytest.raises(ValueError):
        martingale_test(COX, 1, [(0.5, 0.25)], 100, 1)


def test_report_serialisation():
    rep = martingale_test(COX, 2, PAIRS, 2000, 5)
    d = json.loads(rep.to_json())
    assert d["order"] == 2 and d["num_paths"] == 2000 and len(d["entries"]) == 6
    text = rep.to_text()
    assert text.splitlines()[0] == "martingale n=2 paths=2000 seed=5"
    assert len(text.splitlines()) == 8


@pytest.mark.parametrize("n", range(1, 7))
def test_terminal_mean_is_zero(n):
    # E[M_t] = 0 for every order; checked against its own standard error
    num = 40_000
    b = simulate_batch(ASYM, np.array([0.0, 1.0]), 21, num)
    m = martingale_path(ASYM, b, n)[:, -1]
    assert abs(m.mean()) <= 4 * m.std(ddof=1) / np.sqrt(num)


def test_order_two_variance_formula():
    # Var(M^(2)_t) = E[(X_t^2 - F_2)^2] = F_4 + 2 F_2^2 for a compound Poisson process
    num = 100_000
    b = simulate_batch(ASYM, np.array([0.0, 1.0]), 22, num)
    m = martingale_path(ASYM, b, 2)[:, -1]
    f2, f4 = float(cumulant_fn(ASYM, 2, 1.0)), float(cumulant_fn(ASYM, 4, 1.0))
    expected = f4 + 2 * f2**2
    assert m.var() == pytest.approx(expected, rel=0.05)
