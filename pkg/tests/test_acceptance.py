"""Acceptance gate.

Each test prints one ``[acceptance N] PASS|FAIL`` line with the measured
quantities, then asserts. Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import contextlib
import io
import json
import sys
import time

import numpy as np
import pytest

from capbound.bounds import (
    CapacityVerdict,
    holevo_chi_ensemble,
    holevo_chi_msw,
    max_capacity_certificate_classical,
    max_quantum_capacity_certificate,
)
from capbound.channels import amplitude_damping
from capbound.cli import main
from capbound.measures import eof_estimate, eof_two_qubit
from capbound.operators import random_density
from capbound.optimize import OptimizerConfig
from capbound.selftest import channel_residuals, duality_residuals, entropy_violations, product_correlations
from capbound.sweep import rows_to_csv, run_sweep

DEFAULT = OptimizerConfig()
SWEEP_P = np.round(np.linspace(0.0, 0.5, 11), 10)


@pytest.fixture
def gate(capsys):
    def report(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {n:>2}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail

    return report


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    rows = run_sweep("amplitude-damping", SWEEP_P, "fig2-x3", DEFAULT)
    return rows, time.perf_counter() - t0


def _cli_json(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_1_noiseless_limit(gate):
    t0 = time.perf_counter()
    code, out = _cli_json("bound", "--channel", "amplitude-damping:0", "--meas", "fig2-x3", "--json")
    value = json.loads(out)["value"]
    T = amplitude_damping(0.0)
    classical = max_capacity_certificate_classical(T, DEFAULT).verdict
    quantum = max_quantum_capacity_certificate(T, DEFAULT).verdict
    elapsed = time.perf_counter() - t0
    ok = (
        code == 0
        and abs(value - 1.0) <= 1e-6
        and classical is CapacityVerdict.MAXIMUM_CAPACITY_POSSIBLE
        and quantum is CapacityVerdict.MAXIMUM_CAPACITY_POSSIBLE
        and elapsed < 60
    )
    gate(1, "noiseless limit", ok, f"bound={value:.9f}, certificates={classical.value}/{quantum.value}, {elapsed:.1f}s")


def test_2_bound_is_nontrivial(gate, sweep):
    rows, elapsed = sweep
    noisy = [r for r in rows if r.p >= 0.05 - 1e-12]
    worst = max(r.c_bound for r in noisy)
    ok = len(noisy) == 10 and worst < 1 - 1e-3 and all(r.certified for r in noisy) and elapsed < 1800
    gate(2, "bound below 1 - 1e-3 on p = 0.05..0.50", ok, f"max c_bound={worst:.9f}, all certified={all(r.certified for r in noisy)}, sweep {elapsed:.0f}s")


def test_3_sandwich(gate, sweep):
    rows, _ = sweep
    chi_gap = max(r.chi_lower - r.c_bound for r in rows)
    q_gap = max(r.q1_lower - r.chi_lower for r in rows)
    cross = max(abs(holevo_chi_msw(amplitude_damping(p), DEFAULT) - holevo_chi_ensemble(amplitude_damping(p), 2, DEFAULT)) for p in (0.1, 0.25, 0.4))
    ok = chi_gap <= 1e-6 and q_gap <= 1e-6 and cross <= 1e-3
    gate(3, "chi <= bound, Q1 <= chi, MSW vs ensemble", ok, f"max(chi-bound)={chi_gap:.3e}, max(Q1-chi)={q_gap:.3e}, |MSW-ensemble|={cross:.2e}")


def test_4_s_max_plateau(gate, sweep):
    rows, _ = sweep
    dev = max(abs(r.s_max - 1.0) for r in rows)
    gate(4, "S_max = 1 on p in [0, 0.5]", dev <= 1e-6, f"max |s_max - 1|={dev:.2e} over {len(rows)} points")


def test_5_entanglement_assisted_exceeds_one(gate, sweep):
    rows, _ = sweep
    mid = [r for r in rows if 0.05 - 1e-12 <= r.p <= 0.45 + 1e-12]
    low = min(r.cea for r in mid)
    gate(5, "C_E > 1 + 1e-3 on p = 0.05..0.45", len(mid) == 9 and low > 1 + 1e-3, f"min cea={low:.6f}")


def test_6_gap_certificates(gate):
    parts, ok = [], True
    for p in (0.1, 0.25, 0.4):
        T = amplitude_damping(p)
        c = max_capacity_certificate_classical(T, DEFAULT)
        q = max_quantum_capacity_certificate(T, DEFAULT)
        ok &= c.verdict is CapacityVerdict.GAP_CERTIFIED and c.separability.witness < -1e-3
        ok &= q.verdict is CapacityVerdict.GAP_CERTIFIED and q.details["certified_global"]
        parts.append(f"p={p}: witness={c.separability.witness:.4f}, defect={q.details['min_defect']:.4f}")
    gate(6, "gap certificates", bool(ok), "; ".join(parts))


def test_7_duality_battery(gate):
    t0 = time.perf_counter()
    rand, special = duality_residuals(20, 42, DEFAULT)
    elapsed = time.perf_counter() - t0
    ok = rand.max() <= 1e-2 and special.max() <= 1e-4 and elapsed < 300
    gate(7, "Koashi-Winter residuals", ok, f"random max={rand.max():.2e}, GHZ/product max={special.max():.2e}, {elapsed:.0f}s")


def test_8_structural_invariants(gate):
    iso, stine = channel_residuals(100, 42)
    range_v, sub_v = entropy_violations(100, 42)
    ok = iso <= 1e-9 and stine <= 1e-9 and range_v <= 1e-9 and sub_v <= 1e-9
    gate(8, "structural invariants", ok, f"isometry={iso:.1e}, Stinespring={stine:.1e}, entropy range={range_v:.1e}, subadditivity={sub_v:.1e}")


def test_9_measure_plumbing(gate):
    rng = np.random.default_rng([42, 9])
    cfg = DEFAULT.with_(restarts=8)
    gaps = []
    for i in range(50):
        rho = random_density(4, rng, rank=1 + i % 4)
        gaps.append(eof_estimate(rho, (2, 2), cfg=cfg) - eof_two_qubit(rho))
    gaps = np.array(gaps)
    prod = product_correlations(50, 10, 42)
    ok = gaps.max() <= 1e-2 and gaps.min() >= -1e-9 and prod <= 1e-9
    gate(9, "EoF estimate and product correlations", ok, f"EoF gap in [{gaps.min():.1e}, {gaps.max():.1e}] (8 restarts), max |c| on products={prod:.1e}")


def test_10_determinism(gate, sweep):
    rows, _ = sweep
    again = run_sweep("amplitude-damping", SWEEP_P, "fig2-x3", DEFAULT, workers=2)
    same = rows_to_csv(rows) == rows_to_csv(again)
    gate(10, "sweep CSV independent of parallelism", same, f"serial vs 2 workers byte-identical={same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
