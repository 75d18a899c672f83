import json
import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma

from fracconv.harness import (
    TABLE_COLUMNS,
    ConvergenceTable,
    Example1Spec,
    Example2Spec,
    TableRow,
    convergence_table,
    emit_table,
    example1_exact,
    example1_source,
    grid_couple,
    levy_smirnov,
    load_table_json,
    run_example1,
    run_example2,
    tol_from_rule,
)


def _v(x):
    return x**4 * (2 - x) ** 4


def _dv(x):
    return 4 * x**3 * (2 - x) ** 4 - 4 * x**4 * (2 - x) ** 3


def test_exact_solution_shape():
    assert example1_exact(0.0, 0.3) == 0.0 and example1_exact(2.0, 0.3) == 0.0
    x = np.linspace(0.1, 1.9, 7)
    np.testing.assert_allclose(example1_exact(x, 0.5), math.exp(-0.5) * _v(x), rtol=1e-13)
    coeffs = [16, -32, 24, -8, 1]
    poly = sum(c * x ** (4 + j) for j, c in enumerate(coeffs))
    np.testing.assert_allclose(example1_exact(x, 0.0), poly, rtol=1e-12, atol=1e-12)


def _rl_quadrature(alpha, beta, x, t):
    # R-L derivatives written as weakly singular integrals of v' (v vanishes at both ends)
    left, _ = integrate.quad(_dv, 0.0, x, weight="alg", wvar=(0.0, -alpha), epsabs=1e-13, epsrel=1e-13)
    right, _ = integrate.quad(lambda s: -_dv(s), x, 2.0, weight="alg", wvar=(-alpha, 0.0), epsabs=1e-13, epsrel=1e-13)
    frac = ((1 + beta) / 2 * left + (1 - beta) / 2 * right) / gamma(1 - alpha)
    return math.exp(-t) * (-_v(x) + frac)


@pytest.mark.parametrize("alpha, beta, x, t", [(0.5, 0.2, 1.0, 0.0), (0.1, 0.8, 0.3, 0.4), (0.9, -0.5, 1.7, 1.0)])
def test_source_against_quadrature(alpha, beta, x, t):
    assert float(example1_source(alpha, beta, x, t)) == pytest.approx(_rl_quadrature(alpha, beta, x, t), rel=1e-10, abs=1e-12)


def test_source_against_raw_definition():
    # d/dx of the Abel integral of v itself, by a central difference
    alpha, x, eps = 0.5, 1.0, 1e-4

    def abel(y):
        val, _ = integrate.quad(_v, 0.0, y, weight="alg", wvar=(0.0, -alpha), epsabs=1e-14, epsrel=1e-14)
        return val

    left = (abel(x + eps) - abel(x - eps)) / (2 * eps) / gamma(1 - alpha)
    frac = float(example1_source(alpha, 1.0, x, 0.0)) + _v(x)  # beta = 1, t = 0
    assert frac == pytest.approx(left, rel=1e-7)


def test_left_derivative_limit_alpha_to_one():
    x = np.array([0.3, 1.0, 1.6])
    q = example1_source(1 - 1e-7, 1.0, x, 0.0) + _v(x)
    np.testing.assert_allclose(q, _dv(x), rtol=1e-5, atol=1e-6)


def test_source_on_shifted_domain():
    x = np.array([0.4, 1.1, 1.8])
    a = example1_source(0.4, 0.3, x, 0.2)
    b = example1_source(0.4, 0.3, x + 3.0, 0.2, domain=(3.0, 5.0))
    np.testing.assert_allclose(a, b, rtol=1e-12)


def _exact_couple(M, alpha_num, alpha_den):
    # largest N with N^(3-alpha) <= M^2, alpha = alpha_num/alpha_den, exact integers
    p = 3 * alpha_den - alpha_num
    N = 1
    while (N + 1) ** p <= M ** (2 * alpha_den):
        N += 1
    return N


def test_grid_couple_examples():
    assert grid_couple("m1", 0.3, 512) == 512
    assert grid_couple("m2", 0.5, 512) == 147 == _exact_couple(512, 1, 2)
    assert grid_couple("m3", 0.1, 1024) == _exact_couple(1024, 1, 10)
    assert grid_couple("m2", 0.99, 2048) == _exact_couple(2048, 99, 100)
    with pytest.raises(ValueError):
        grid_couple("m2", 0.5, 3)


def test_tol_rules():
    assert tol_from_rule("tau3", 0.1) == pytest.approx(1e-3)
    assert tol_from_rule("10tau3", 0.1) == pytest.approx(1e-2)
    assert tol_from_rule("1e-9", 0.1) == 1e-9
    assert tol_from_rule(2e-5, 0.1) == 2e-5


def test_levy_smirnov_density():
    assert float(levy_smirnov(1.0)) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-15)
    assert float(levy_smirnov(0.0)) == 0.0 and float(levy_smirnov(-3.0)) == 0.0
    total, _ = integrate.quad(lambda x: float(levy_smirnov(x)), 0, np.inf, limit=200)
    assert total == pytest.approx(1.0, rel=1e-8)


def test_example1_rows_high_order():
    assert run_example1(Example1Spec(0.1, 0.2, 2**9), "m2", "direct").error_h2 == pytest.approx(6.50e-6, rel=0.05)
    assert run_example1(Example1Spec(0.1, 0.2, 2**9), "m3", "direct").error_h2 == pytest.approx(7.73e-6, rel=0.05)


def test_example2_high_order_direct_row():
    rep = run_example2(Example2Spec(2**11), "m2", "direct")
    assert rep.error_h2 == pytest.approx(2.36e-2, rel=0.02)


def test_levy_right_boundary_value():
    # the density is still 4.35e-3 at x = 20, and the numerical profile follows it there
    rep = run_example2(Example2Spec(2**10), "m1", "gmres")
    assert float(levy_smirnov(20.0)) == pytest.approx(4.3501e-3, rel=1e-4)
    assert rep.final_solution[-1] == pytest.approx(float(levy_smirnov(rep.x[-1])), rel=0.02)


def _table(errors):
    rows = [TableRow(M=2 ** (5 + i), N=2 ** (5 + i), E_direct=e, Time_direct=0.1, E_gmres=e,
                     Time_gmres=0.2, Iter=2.0) for i, e in enumerate(errors)]
    t = ConvergenceTable(rows, {"example": "test"})
    t.fill_rates()
    return t


def test_rates():
    t = _table([1e-3, 2.5e-4])
    assert t.rates()[0] is None
    assert t.rates()[1] == pytest.approx(2.0)


def test_emit_csv(tmp_path):
    path = emit_table(_table([1e-3]), tmp_path / "t.csv", "csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].split(",") == list(TABLE_COLUMNS)
    assert lines[1].split(",")[4] == "-"


def test_emit_json_round_trip(tmp_path):
    t = _table([1.234567890123e-3, 3.1e-4 / 3])
    path = emit_table(t, tmp_path / "t.json", "json")
    back = load_table_json(path)
    assert [r.E_gmres for r in back.rows] == [r.E_gmres for r in t.rows]
    assert [r.Rate for r in back.rows] == [r.Rate for r in t.rows]
    assert json.loads(path.read_text())["columns"] == list(TABLE_COLUMNS)


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_table(ConvergenceTable([]), tmp_path / "x.csv")
    with pytest.raises(ValueError):
        emit_table(_table([1.0]), tmp_path / "x.txt", "xml")
    missing = tmp_path / "nope" / "t.csv"
    with pytest.raises(OSError, match="nope"):
        emit_table(_table([1.0]), missing)


def test_convergence_table_caps():
    t = convergence_table("example1", "m1", [16, 32, 64], ("direct", "gmres"),
                          direct_cap=32, gmres_cap=64, alpha=0.3, beta=0.5)
    assert t.rows[2].E_direct is None and "direct" in t.rows[2].notes
    assert t.rows[2].E_gmres is not None and t.rows[2].Rate is not None
    with pytest.raises(ValueError):
        convergence_table("example3", "m1", [16])


@pytest.mark.slow
def test_rate_drop_only_for_unstable_scheme():
    import warnings

    m_list = [2**k for k in range(9, 14)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        unstable = convergence_table("example1", "m2", m_list, ("gmres",), alpha=0.99, beta=0.2)
    stable = convergence_table("example1", "m3", m_list, ("gmres",), alpha=0.995, beta=0.2)
    assert any(abs(r - 2.0) > 0.5 for r in unstable.rates()[1:])
    assert all(abs(r - 2.0) <= 0.1 for r in stable.rates()[1:])
