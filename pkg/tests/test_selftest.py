from capbound.optimize import OptimizerConfig
from capbound.selftest import Check, ghz_state, run_selftest


def test_selftest_passes_and_is_deterministic():
    cfg = OptimizerConfig(restarts=8)
    a = run_selftest(trials=2, seed=5, cfg=cfg)
    b = run_selftest(trials=2, seed=5, cfg=cfg)
    assert a.passed
    assert a.text() == b.text()
    assert a.text().endswith("all checks passed")


def test_check_line_format():
    c = Check("demo", 2e-3, 1e-3, 4)
    assert not c.passed
    assert c.line().startswith("FAIL  demo")


def test_ghz_is_normalised():
    assert abs((abs(ghz_state()) ** 2).sum() - 1) < 1e-15
