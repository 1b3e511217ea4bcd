import math

import pytest

import backpar


def test_eigenvalues_are_squares():
    assert backpar.eigenvalues(1, 4) == pytest.approx([1.0, 4.0, 9.0, 16.0])
    assert backpar.eigenvalues(2, 1) == pytest.approx([2.0])


def test_multipliers():
    assert backpar.q_beta(1.0, 0.1, 1.0, 1.0) == pytest.approx(math.log(1 + 0.1 * math.e))
    assert backpar.p_beta(1.0, 0.1, 1.0, 1.0) == pytest.approx(math.log(0.1 + math.exp(-1)))


def test_sources():
    assert backpar.source("ginzburg_landau", 2.0) == pytest.approx(-6.0)
    assert backpar.source("cube_root", 8.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        backpar.source("nope", 1.0)


def test_parameter_rules():
    p = backpar.truncation_params(1e-4, 1.0, 1.0, 1.0, 1, 0.5, 0.5)
    assert p.N == 100
    assert p.alpha == pytest.approx(0.5 * math.log(100))
    with pytest.raises(backpar.DomainError, match="not admissible"):
        backpar.qr_params(1e-4, 0.25, 0.5, 1.0, 1, 1.0, 1.0, 1.0)


def test_fit_rate():
    slope, _, r2, _ = backpar.fit_rate([(1e-1, 1e-2), (1e-2, 1e-4), (1e-3, 1e-6)])
    assert slope == pytest.approx(2.0)
    assert r2 == pytest.approx(1.0)


CONFIG = """
[case]
name = gl3
[method]
name = truncation
clip_radius = 0.5
a = 1
[noise]
delta = 1e-2, 1e-3, 1e-4
t = 0.5
"""


def test_mise_sweep_decreases_and_is_deterministic():
    rows = backpar.run_mise(CONFIG, trials=20, seed=3, threads=2)
    assert [r["delta"] for r in rows] == [1e-2, 1e-3, 1e-4]
    assert rows[2]["mise_mean"] < rows[0]["mise_mean"]
    a = backpar.report_csv(CONFIG, trials=20, seed=3, threads=1)
    b = backpar.report_csv(CONFIG, trials=20, seed=3, threads=3)
    assert a == b
    assert a.splitlines()[0] == "method,delta,t,trials,mise_mean,mise_stderr,envelope,slope,slope_ci"


def test_bad_config_names_key():
    with pytest.raises(backpar.ConfigError, match="method.bogus"):
        backpar.run_mise("[case]\nname = gl3\n[method]\nbogus = 1\n", trials=1)


def test_validate():
    assert all(passed for _, passed, _ in backpar.validate())
