"""Correlation and entanglement quantities on bipartite states ``B ⊗ E``.

The classical-correlation quantity ``C←(rho, B:E)`` conditions the ``B``
state on a measurement performed on ``E``:

    C←(rho) = S(rho_B) - inf_P sum_i q_i S(rho_B|i)

Any fixed measurement yields a value that is at most ``C←``; the
optimiser only ever improves on its seeds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .operators import (
    PAULI_X,
    PAULI_Y,
    DimensionError,
    MeasurementKrausSet,
    ValidationError,
    binary_entropy,
    eigvalsh,
    partial_trace,
    partial_transpose,
    param_to_measurement,
    param_to_rank_one_measurement,
    measurement_param_count,
    rank_one_param_count,
    rank_one_to_param,
    von_neumann_entropy,
    NEG_EIG_TOL,
    ZERO_EIG,
)
from .operators import _inv_sqrt_psd
from .optimize import OptimizerConfig, minimize

__all__ = [
    "MeasurementKrausSet",
    "Separability",
    "SeparabilityVerdict",
    "builtin_measurement",
    "c_arrow_fixed",
    "c_arrow_optimized",
    "c_arrow_search",
    "computational_measurement",
    "concurrence",
    "conditional_entropy_term",
    "eof_estimate",
    "eof_from_concurrence",
    "eof_two_qubit",
    "fig2_measurement",
    "koashi_winter_residual",
    "koashi_winter_terms",
    "ppt_verdict",
    "trivial_measurement",
]


_LN2 = np.log(2.0)


def _dims2(state, dims) -> tuple[int, int]:
    if dims is None:
        dims = getattr(state, "dims", None)
    if dims is None or len(dims) != 2:
        raise DimensionError(f"a two-factor split is required, got {dims}")
    dims = (int(dims[0]), int(dims[1]))
    if np.asarray(getattr(state, "state", state)).shape[-1] != dims[0] * dims[1]:
        raise DimensionError(f"split {dims} does not match the state dimension")
    return dims


def _unnormalised_entropy(tau) -> np.ndarray:
    """``q S(tau/q)`` in bits with ``q = tr tau``; zero when ``q < 1e-12``.

    Uses ``q S(tau/q) = q log q - sum_l w_l log w_l`` over the eigenvalues
    ``w_l`` of ``tau``.
    """
    w = eigvalsh(tau)
    if w.min() < -NEG_EIG_TOL:
        raise ValidationError(f"negative eigenvalue {w.min():.3e} in conditional state")
    w = np.maximum(w, 0.0)
    q = w.sum(axis=-1)
    val = (xlogy(q, q) - xlogy(w, w).sum(axis=-1)) / _LN2
    return np.where(q > ZERO_EIG, val, 0.0)


def conditional_entropy_term(rho_be, m: MeasurementKrausSet, dims=None) -> float | np.ndarray:
    """``sum_i q_i S(rho_B|i)`` after measuring ``m`` on the ``E`` factor.

    ``rho_be`` may be a single operator, a stack, or a
    :class:`~capbound.channels.JointOutput`.
    """
    dB, dE = _dims2(rho_be, dims)
    rho = np.asarray(getattr(rho_be, "state", rho_be))
    if m.dim != dE:
        raise DimensionError(f"measurement acts on dimension {m.dim}, environment has {dE}")
    t = rho.reshape(rho.shape[:-2] + (dB, dE, dB, dE))
    # tr_E[(1 ⊗ P) rho (1 ⊗ P)†] = tr_E[(1 ⊗ P†P) rho]
    tau = np.einsum("...aebf,kfe->...kab", t, m.effects())
    total = np.sum(_unnormalised_entropy(tau), axis=-1)
    return float(total) if np.ndim(total) == 0 else total


def c_arrow_fixed(rho_be, m: MeasurementKrausSet, dims=None) -> float | np.ndarray:
    """``S(rho_B)`` minus the conditional term for one fixed measurement.

    This never exceeds ``C←(rho, B:E)``. The value is returned as computed;
    concavity of the entropy keeps it non-negative up to rounding.
    """
    dB, dE = _dims2(rho_be, dims)
    rho = np.asarray(getattr(rho_be, "state", rho_be))
    s_b = von_neumann_entropy(partial_trace(rho, (dB, dE), 0))
    return s_b - conditional_entropy_term(rho, m, (dB, dE))


# -- built-in measurements -----------------------------------------------------


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if w.min() < -1e-12:
        raise ValidationError(f"operator is not positive semidefinite (eigenvalue {w.min():.3e})")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fig2_measurement(x: float, relabel: bool = True) -> MeasurementKrausSet:
    """Three-outcome qubit measurement used for the amplitude-damping curve.

    ``P0 = |0><0|/2``, ``P1 = (all-ones)/x`` and
    ``P2 = (1 - P0†P0 - P1†P1)^{1/2}``, written in the environment basis
    where ``|0>_E`` accompanies the undamped branch. With ``relabel`` the
    operators are conjugated by ``X`` to match the Kraus-index environment
    basis of :func:`capbound.channels.dilate`.
    """
    P0 = np.diag([0.5, 0.0]).astype(complex)
    P1 = np.ones((2, 2), dtype=complex) / x
    rest = np.eye(2) - P0.conj().T @ P0 - P1.conj().T @ P1
    P2 = _psd_sqrt(rest)
    ops = np.stack([P0, P1, P2])
    if relabel:
        ops = PAULI_X @ ops @ PAULI_X
    return MeasurementKrausSet(2, ops, f"fig2-x{x:g}")


def trivial_measurement(dim: int) -> MeasurementKrausSet:
    return MeasurementKrausSet(dim, np.eye(dim, dtype=complex)[None], "trivial")


def computational_measurement(dim: int) -> MeasurementKrausSet:
    ops = np.zeros((dim, dim, dim), dtype=complex)
    for i in range(dim):
        ops[i, i, i] = 1.0
    return MeasurementKrausSet(dim, ops, "computational")


def builtin_measurement(name: str, dim: int = 2) -> MeasurementKrausSet:
    """``fig2-x3``, ``fig2-x4``, ``fig2-x<value>``, ``trivial`` or ``computational``."""
    if name.startswith("fig2-x"):
        if dim != 2:
            raise DimensionError(f"{name} is a qubit measurement, environment has dimension {dim}")
        return fig2_measurement(float(name[len("fig2-x"):]))
    if name == "trivial":
        return trivial_measurement(dim)
    if name == "computational":
        return computational_measurement(dim)
    raise ValueError(f"unknown measurement {name!r}")


# -- optimised C← --------------------------------------------------------------


def _rank_one_pieces(m: MeasurementKrausSet) -> np.ndarray:
    """Split every effect into rank-one pieces ``|a><a|``; returns the vectors ``a``."""
    vecs = []
    for eff in m.effects():
        w, v = np.linalg.eigh((eff + eff.conj().T) / 2)
        for j in range(w.size):
            if w[j] > 1e-14:
                vecs.append(np.sqrt(w[j]) * v[:, j])
    return np.array(vecs)


@dataclass
class CArrowResult:
    value: float
    measurement: MeasurementKrausSet
    restart_values: np.ndarray
    evaluations: int


def c_arrow_search(
    rho_be,
    k: int | None = None,
    cfg: OptimizerConfig = OptimizerConfig(),
    dims=None,
    seeds=(),
    chart: str = "rank-one",
) -> CArrowResult:
    """Maximise :func:`c_arrow_fixed` over complete ``k``-outcome measurements on ``E``.

    ``chart="rank-one"`` searches rank-one effects (sufficient for the
    infimum in ``C←``); ``chart="full"`` uses the general Kraus chart.
    Seed measurements with fewer outcomes are padded with zero operators
    and the result is never worse than any seed.
    """
    dB, dE = _dims2(rho_be, dims)
    rho = np.asarray(getattr(rho_be, "state", rho_be), dtype=complex)
    k = dE * dE if k is None else int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    s_b = von_neumann_entropy(partial_trace(rho, (dB, dE), 0))
    rho_e = partial_trace(rho, (dB, dE), 1)

    default_seeds = []
    if k >= dE:
        default_seeds.append(computational_measurement(dE))
        _, v = np.linalg.eigh(rho_e)
        default_seeds.append(MeasurementKrausSet(dE, np.stack([np.outer(v[:, i], v[:, i].conj()) for i in range(dE)])))
    candidates = list(seeds) + default_seeds
    for s in candidates:
        if s.dim != dE:
            raise DimensionError(f"seed measurement acts on dimension {s.dim}, environment has {dE}")

    if chart == "rank-one":
        n = rank_one_param_count(dE, k)

        def build(x):
            return param_to_rank_one_measurement(x, dE, k)

        t = rho.reshape(dB, dE, dB, dE)

        def cond(x):
            # lean path of conditional_entropy_term for the rank-one chart
            a = x.reshape(k, 2, dE)
            a = a[:, 0] + 1j * a[:, 1]
            G = a.T @ a.conj()
            if eigvalsh(G)[0] < 1e-10 * max(np.trace(G).real, 1e-300):
                return np.inf  # chart point outside the complete-measurement domain
            W = a @ _inv_sqrt_psd(G).T  # rows G^{-1/2} a_j
            tau = np.einsum("aebf,je,jf->jab", t, W.conj(), W)
            return float(np.sum(_unnormalised_entropy(tau)))

        param_seeds = []
        for s in candidates:
            pieces = _rank_one_pieces(s)
            if 0 < len(pieces) <= k:
                pad = np.zeros((k - len(pieces), dE), dtype=complex)
                param_seeds.append(rank_one_to_param(np.concatenate([pieces, pad])))
    elif chart == "full":
        n = measurement_param_count(dE, k)

        def build(x):
            return param_to_measurement(x, dE, k)

        param_seeds = [
            np.stack([s.padded(k).kraus.real, s.padded(k).kraus.imag], axis=1).reshape(-1)
            for s in candidates
            if s.k <= k
        ]

        def cond(x):
            try:
                return conditional_entropy_term(rho, build(x), (dB, dE))
            except ValidationError:
                return np.inf

    else:
        raise ValueError(f"unknown chart {chart!r}")

    res = minimize(cond, n, cfg, seeds=param_seeds)
    best_val, best_m = s_b - res.best_value, build(res.best_params)
    # direct evaluation of the seeds guarantees dominance even when a seed
    # has more rank-one pieces than the chart can hold
    for s in candidates:
        v = s_b - conditional_entropy_term(rho, s, (dB, dE))
        if v > best_val:
            best_val, best_m = v, s
    return CArrowResult(float(best_val), best_m, s_b - res.restart_values, res.evaluations)


def c_arrow_optimized(rho_be, k=None, cfg: OptimizerConfig = OptimizerConfig(), dims=None, seeds=(), chart="rank-one") -> float:
    """Best ``C←`` lower estimate found by multistart search; see :func:`c_arrow_search`."""
    return c_arrow_search(rho_be, k, cfg, dims, seeds, chart).value


# -- entanglement of formation -------------------------------------------------

_YY = np.kron(PAULI_Y, PAULI_Y)


def concurrence(rho) -> float:
    """Two-qubit concurrence ``max(0, l1 - l2 - l3 - l4)``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"concurrence needs a two-qubit state, got shape {rho.shape}")
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    flipped = _YY @ rho.conj() @ _YY
    m = sq @ flipped @ sq
    lam = np.sqrt(np.clip(np.linalg.eigvalsh((m + m.conj().T) / 2), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof_from_concurrence(c: float) -> float:
    c = min(max(float(c), 0.0), 1.0)
    return binary_entropy((1 + np.sqrt(1 - c * c)) / 2)


def eof_two_qubit(rho) -> float:
    """Closed-form entanglement of formation of a two-qubit state, in bits."""
    return eof_from_concurrence(concurrence(rho))


def _rank(rho, tol=1e-10) -> int:
    return int(np.sum(np.linalg.eigvalsh(rho) > tol))


def eof_estimate(rho, dims, m: int | None = None, cfg: OptimizerConfig = OptimizerConfig()) -> float:
    """Upper estimate of the entanglement of formation via explicit decompositions.

    Decompositions with ``m`` members are charted as rank-one measurements on
    the ancilla of a purification of ``rho``; every chart point is a genuine
    decomposition, so the result never falls below the true value.
    """
    dA, dB = _dims2(rho, dims)
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = w > 1e-10
    r = int(keep.sum())
    m = r if m is None else int(m)
    if m < r:
        raise ValueError(f"ensemble size {m} is smaller than the state rank {r}")
    basis = v[:, keep] * np.sqrt(w[keep])  # columns sqrt(l_k)|v_k>

    def average_entropy(x):
        a = x.reshape(m, 2, r)
        a = a[:, 0] + 1j * a[:, 1]
        G = a.T @ a.conj()
        if np.linalg.eigvalsh(G)[0] < 1e-10 * np.trace(G).real:
            return np.inf
        rows = a.conj() @ _inv_sqrt_psd(G)  # <a_j| G^{-1/2}, so member j = basis @ rows[j]
        members = rows @ basis.T  # (m, dA*dB)
        mats = members.reshape(m, dA, dB)
        red = mats @ mats.conj().transpose(0, 2, 1)
        return float(np.sum(_unnormalised_entropy(red)))

    eye_seed = rank_one_to_param(np.concatenate([np.eye(r), np.zeros((m - r, r))]).astype(complex))
    res = minimize(average_entropy, rank_one_param_count(r, m), cfg, seeds=[eye_seed])
    return max(res.best_value, 0.0)


# -- separability ----------------------------------------------------------------


class Separability(enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class SeparabilityVerdict:
    verdict: Separability
    witness: float  # minimum eigenvalue of the partial transpose

    def __str__(self):
        return f"{self.verdict.value} (PPT witness {self.witness:.6g})"


def ppt_verdict(rho, dims, tol: float = 1e-9) -> SeparabilityVerdict:
    """Peres-Horodecki test; conclusive for separability only in 2x2 and 2x3."""
    dA, dB = _dims2(rho, dims)
    pt = partial_transpose(np.asarray(rho, dtype=complex), (dA, dB), 1)
    witness = float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])
    if witness < -tol:
        return SeparabilityVerdict(Separability.ENTANGLED, witness)
    if sorted((dA, dB)) in ([2, 2], [2, 3]):
        return SeparabilityVerdict(Separability.SEPARABLE, witness)
    return SeparabilityVerdict(Separability.INDETERMINATE, witness)


# -- duality check -----------------------------------------------------------------


def koashi_winter_terms(psi, dims, cfg: OptimizerConfig = OptimizerConfig()) -> dict:
    """Terms of ``S(rho_A) = E_F(rho_AB) + C←(rho_AC, A:C)`` for a pure state on ``A ⊗ B ⊗ C``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    dA, dB, dC = (int(d) for d in dims)
    if psi.size != dA * dB * dC:
        raise DimensionError(f"split {tuple(dims)} does not match state of length {psi.size}")
    rho = np.outer(psi, psi.conj())
    s_a = von_neumann_entropy(partial_trace(rho, (dA, dB, dC), 0))
    rho_ab = partial_trace(rho, (dA, dB, dC), (0, 1))
    rho_ac = partial_trace(rho, (dA, dB, dC), (0, 2))
    if (dA, dB) == (2, 2):
        ef = eof_two_qubit(rho_ab)
    else:
        ef = eof_estimate(rho_ab, (dA, dB), max(_rank(rho_ab), dA * dB), cfg)
    ca = c_arrow_optimized(rho_ac, dC * dC, cfg, dims=(dA, dC))
    return {"s_a": s_a, "eof": ef, "c_arrow": ca, "residual": abs(s_a - ef - ca)}


def koashi_winter_residual(psi, dims=(2, 2, 2), cfg: OptimizerConfig = OptimizerConfig()) -> float:
    return koashi_winter_terms(psi, dims, cfg)["residual"]
