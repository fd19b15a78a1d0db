"""Self-test battery: duality residuals, channel invariants and measure plumbing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import apply, dilate, joint_states, random_channel
from .measures import c_arrow_fixed, koashi_winter_residual
from .operators import (
    param_to_measurement,
    measurement_param_count,
    partial_trace,
    random_density,
    random_pure_state,
    tensor,
    von_neumann_entropy,
)
from .optimize import OptimizerConfig

KW_TOL = 1e-2
KW_SPECIAL_TOL = 1e-4
STRUCT_TOL = 1e-9


@dataclass
class Check:
    name: str
    worst: float
    tol: float
    count: int

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} worst={self.worst:.3e}  tol={self.tol:.1e}  n={self.count}"


@dataclass
class Summary:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        n_fail = sum(not c.passed for c in self.checks)
        tail = "all checks passed" if not n_fail else f"{n_fail} check(s) failed"
        return "\n".join([c.line() for c in self.checks] + [tail])


def ghz_state() -> np.ndarray:
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / np.sqrt(2)
    return psi


def product_state(rng) -> np.ndarray:
    return tensor(*(random_pure_state(2, rng)[:, None] for _ in range(3))).ravel()


def duality_residuals(trials: int, seed: int, cfg: OptimizerConfig) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng([seed, 1])
    rand = np.array([koashi_winter_residual(random_pure_state(8, rng), (2, 2, 2), cfg) for _ in range(trials)])
    special = np.array([
        koashi_winter_residual(ghz_state(), (2, 2, 2), cfg),
        koashi_winter_residual(product_state(rng), (2, 2, 2), cfg),
    ])
    return rand, special


def channel_residuals(n: int, seed: int) -> tuple[float, float]:
    rng = np.random.default_rng([seed, 2])
    iso, stine = 0.0, 0.0
    for _ in range(n):
        d_in, d_out = (int(x) for x in rng.choice([2, 3], size=2))
        T = random_channel(d_in, d_out, int(rng.integers(-(-d_in // d_out), 5)), rng)
        V = dilate(T)
        rho = random_density(d_in, rng)
        iso = max(iso, V.residual())
        out = partial_trace(joint_states(V, rho), (V.d_out, V.d_env), 0)
        stine = max(stine, float(np.max(np.abs(out - apply(T, rho)))))
    return iso, stine


def entropy_violations(n: int, seed: int) -> tuple[float, float]:
    """Worst excursion outside ``[0, log2 d]`` and worst subadditivity violation."""
    rng = np.random.default_rng([seed, 3])
    range_v, sub_v = 0.0, 0.0
    for _ in range(n):
        dA, dB = (int(x) for x in rng.choice([2, 3], size=2))
        rho = random_density(dA * dB, rng, rank=int(rng.integers(1, dA * dB + 1)))
        s = von_neumann_entropy(rho)
        range_v = max(range_v, -s, s - np.log2(dA * dB))
        sa = von_neumann_entropy(partial_trace(rho, (dA, dB), 0))
        sb = von_neumann_entropy(partial_trace(rho, (dA, dB), 1))
        sub_v = max(sub_v, s - sa - sb)
    return range_v, sub_v


def product_correlations(n_states: int, n_meas: int, seed: int) -> float:
    """Largest ``|c_arrow_fixed|`` on product states; should vanish."""
    rng = np.random.default_rng([seed, 4])
    worst = 0.0
    for _ in range(n_states):
        rho = tensor(random_density(2, rng), random_density(2, rng))
        for _ in range(n_meas):
            k = int(rng.integers(2, 5))
            m = param_to_measurement(rng.normal(size=measurement_param_count(2, k)), 2, k)
            worst = max(worst, abs(c_arrow_fixed(rho, m, (2, 2))))
    return worst


def run_selftest(trials: int = 20, seed: int = 42, tolerance: float | None = None, cfg: OptimizerConfig | None = None) -> Summary:
    """Run the battery; ``tolerance`` overrides every check's tolerance."""
    cfg = cfg or OptimizerConfig(seed=seed)

    def tol(default):
        return default if tolerance is None else tolerance

    rand, special = duality_residuals(trials, seed, cfg)
    iso, stine = channel_residuals(100, seed)
    range_v, sub_v = entropy_violations(100, seed)
    prod = product_correlations(50, 10, seed)
    return Summary([
        Check("duality residual, random states", float(rand.max(initial=0.0)), tol(KW_TOL), trials),
        Check("duality residual, GHZ and product", float(special.max()), tol(KW_SPECIAL_TOL), 2),
        Check("isometry residual", iso, tol(STRUCT_TOL), 100),
        Check("Stinespring marginal", stine, tol(STRUCT_TOL), 100),
        Check("entropy range", range_v, tol(STRUCT_TOL), 100),
        Check("subadditivity", sub_v, tol(STRUCT_TOL), 100),
        Check("c_arrow_fixed on product states", prod, tol(STRUCT_TOL), 500),
    ])
