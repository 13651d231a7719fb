import json

import numpy as np
import pytest

from teugels.cumulant_poly import gamma
from teugels.process_model import (
    JumpAtom,
    Linear,
    PiecewiseLinear,
    Power,
    ProcessSpec,
    SpecError,
    Step,
    Zero,
    cox_spec,
    cumulant_fn,
    gaussian_spec,
    harmonic_coefficients,
    load_spec,
    spec_from_dict,
    symmetric_spec,
    validate,
)

T = np.linspace(0, 2, 41)
SPECS = {
    "cox_t": cox_spec(Linear(1.0)),
    "cox_t2": cox_spec(Power(1.0, 2.0)),
    "symmetric": symmetric_spec(),
    "symmetric_gauss": symmetric_spec(sigma2=Linear(0.5)),
    "gaussian": gaussian_spec(),
    "mixed": ProcessSpec(Power(0.3, 1.5), (JumpAtom(0.5, Linear(2.0)), JumpAtom(-1.5, Power(1.0, 2.0)))),
}


def test_cox_cumulants_all_equal_lambda():
    spec = cox_spec(Power(1.0, 2.0))
    for n in range(2, 9):
        np.testing.assert_array_equal(cumulant_fn(spec, n, T), T**2)


def test_gaussian_cumulants():
    spec = gaussian_spec()
    np.testing.assert_array_equal(cumulant_fn(spec, 2, T), T)
    for n in range(3, 7):
        assert not np.any(cumulant_fn(spec, n, T))


def test_symmetric_cumulants():
    spec = symmetric_spec(sigma2=Linear(0.5))
    np.testing.assert_allclose(cumulant_fn(spec, 2, T), T + 0.5 * T)
    assert not np.any(cumulant_fn(spec, 3, T))
    np.testing.assert_allclose(cumulant_fn(spec, 4, T), T)


def test_order_one_is_undefined():
    with pytest.raises(ValueError):
        cumulant_fn(cox_spec(), 1, 0.5)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_cumulants_vanish_at_zero_and_even_orders_increase(name):
    spec = SPECS[name]
    for n in range(2, 9):
        assert cumulant_fn(spec, n, 0.0) == 0.0
        if n % 2 == 0:
            assert np.all(np.diff(cumulant_fn(spec, n, T)) >= 0)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_cumulants_match_integration_against_atomic_measure(name):
    # integrate x^n against nu_t represented as a discrete measure on a support grid
    spec = SPECS[name]
    t = 1.3
    support = np.array(sorted({a.size for a in spec.atoms} | {-3.0, 0.25, 7.0}))
    mass = np.zeros_like(support)
    for a in spec.atoms:
        mass[np.searchsorted(support, a.size)] += a.intensity(t)
    for n in range(2, 7):
        integral = float(np.dot(support**n, mass)) + (float(spec.sigma2(t)) if n == 2 else 0.0)
        assert cumulant_fn(spec, n, t) == pytest.approx(integral, rel=1e-15, abs=1e-15)


def test_spec_requires_content():
    with pytest.raises(SpecError):
        ProcessSpec(Zero(), ())
    with pytest.raises(SpecError):
        JumpAtom(0.0, Linear(1.0))
    with pytest.raises(SpecError):
        Power(1.0, 0.5)


@pytest.mark.parametrize(
    "f",
    [Linear(2.0), Power(0.5, 2.5), PiecewiseLinear((0, 0.5, 1), (0, 0.2, 1.0)), PiecewiseLinear((0, 0.5, 1), (0, 0.0, 1.0))],
)
def test_inverses(f):
    v = np.array([0.05, 0.1, 0.5, 0.9])
    t = f.inverse(v)
    np.testing.assert_allclose(f(t), v, rtol=1e-12)


def test_bisection_inverse_of_step_returns_jump_time():
    assert Step(0.5, 1.0).inverse(np.array([0.3]))[0] == pytest.approx(0.5)


# ---------------------------------------------------------------- validate
def test_validate_polynomial_intensity_passes():
    rep = validate(cox_spec(Power(1.0, 2.0)), 1.0, 1000)
    assert rep.ok


def test_validate_step_is_continuity_violation():
    spec = cox_spec(Step(0.5, 1.0))
    rep = validate(spec, 1.0, 1000)
    assert not rep.ok
    issue = rep.issues[0]
    assert issue.kind == "continuity violation"
    assert issue.function == "atoms[0].intensity"
    assert issue.time == pytest.approx(0.5, abs=2e-3)
    assert issue.increment == 1.0


def test_validate_decreasing_table():
    spec = cox_spec(PiecewiseLinear((0, 0.5, 1), (0, 1.0, 0.5)))
    rep = validate(spec, 1.0, 101)
    assert [i.kind for i in rep.issues] == ["monotonicity violation"]
    assert "monotonicity violation in atoms[0].intensity" in str(rep.issues[0])


def test_validate_nonzero_start():
    spec = cox_spec(PiecewiseLinear((0, 1), (0.5, 1.0)))
    assert validate(spec, 1.0, 100).issues[0].kind == "nonzero at t=0"


def test_validate_symmetric_notes():
    rep = validate(symmetric_spec(), 1.0, 1000)
    assert rep.ok
    assert "F_4 nondecreasing" in rep.notes
    assert "F_3 identically 0 on the grid" in rep.notes


def test_validate_arguments():
    with pytest.raises(ValueError):
        validate(cox_spec(), 0.0, 10)
    with pytest.raises(ValueError):
        validate(cox_spec(), 1.0, 1)


# ------------------------------------------------------------- harmonic
@pytest.mark.parametrize("name", sorted(SPECS))
def test_harmonic_low_orders(name):
    spec = SPECS[name]
    t = 0.7
    f2, f3 = cumulant_fn(spec, 2, t), cumulant_fn(spec, 3, t)
    np.testing.assert_allclose(harmonic_coefficients(spec, 1, t), [0, 1])
    np.testing.assert_allclose(harmonic_coefficients(spec, 2, t), [-f2, 0, 1])
    np.testing.assert_allclose(harmonic_coefficients(spec, 3, t), [-f3, -3 * f2, 0, 1])


@pytest.mark.parametrize("name", sorted(SPECS))
@pytest.mark.parametrize("n", range(1, 8))
def test_harmonic_polynomial_reproduces_gamma(name, n):
    spec = SPECS[name]
    t = np.array([0.2, 0.9, 1.7])
    xs = np.array([-2.0, 0.3, 4.0])
    c = harmonic_coefficients(spec, n, t)
    g = gamma(n)
    for k in range(3):
        args = [xs[k]] + [-float(cumulant_fn(spec, j, t[k])) for j in range(2, n + 1)]
        direct = g.evaluate(args)
        via = np.polynomial.polynomial.polyval(xs[k], c[:, k])
        assert via == pytest.approx(direct, rel=1e-12, abs=1e-12 * (1 + abs(direct)))


def test_harmonic_at_zero_is_monomial():
    for n in range(1, 8):
        c = harmonic_coefficients(SPECS["mixed"], n, 0.0)
        expected = np.zeros(n + 1)
        expected[n] = 1.0
        np.testing.assert_array_equal(c, expected)


# ------------------------------------------------------------------- JSON
def test_spec_json_round_trip(tmp_path):
    spec = SPECS["mixed"]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(spec.to_dict()))
    again = load_spec(str(path))
    assert again == spec


def test_bundled_specs_load():
    for name in ["cox_t", "cox_t2", "cox_piecewise", "symmetric_pm1", "symmetric_pm1_gauss", "gaussian"]:
        spec = load_spec(name)
        assert validate(spec, 1.0, 1025).ok
    assert load_spec("cox_t2").atoms[0].intensity == Power(1.0, 2.0)


def test_bad_spec_files():
    with pytest.raises(SpecError):
        load_spec("/nonexistent/spec.json")
    with pytest.raises(SpecError):
        spec_from_dict({"atoms": [{"size": 1, "intensity": {"kind": "power", "a": 1}}]})
