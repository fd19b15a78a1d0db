"""Dense operator algebra on finite-dimensional Hilbert spaces.

States are plain complex ``numpy`` arrays. Most routines accept stacks of
operators with shape ``(..., d, d)`` so that grid searches can evaluate
hundreds of thousands of states in one call. Entropies are in bits.

Tensor ordering follows ``numpy.kron``: in a split ``dims = (dB, dE)`` the
first factor is the slower-varying index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
NEG_EIG_TOL = 1e-9
ZERO_EIG = 1e-12
COMPLETENESS_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ValidationError(ValueError):
    """An operator violates a structural invariant (Hermiticity, trace, completeness)."""


class DimensionError(ValueError):
    """Operator shape is inconsistent with the declared tensor split."""


def _max_dev(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def validate_density(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the density-operator invariants."""
    rho = as_matrix(rho, "density operator")
    if rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density operator must be square, got {rho.shape}")
    herm = _max_dev(rho - rho.conj().T)
    if herm > tol:
        raise ValidationError(f"density operator not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValidationError(f"density operator trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -NEG_EIG_TOL:
        raise ValidationError(f"density operator has negative eigenvalue {lo:.3e}")
    return rho


def validate_pure(psi, tol: float = 1e-9) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > tol:
        raise ValidationError(f"state vector norm {nrm!r} differs from 1")
    return psi


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def tensor(*ops) -> np.ndarray:
    """Kronecker product; the leftmost factor carries the slowest index."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def _check_dims(n: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or int(np.prod(dims)) != n:
        raise DimensionError(f"split {dims} does not factor dimension {n}")
    return dims


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Reduce ``rho`` to the subsystems listed in ``keep``.

    Parameters
    ----------
    rho : array_like, shape (..., D, D)
        Operator or stack of operators with ``D = prod(dims)``.
    dims : sequence of int
        Subsystem dimensions.
    keep : int or iterable of int
        Indices of the subsystems to keep. Their relative order in ``dims``
        is preserved in the output regardless of the order given here.
    """
    rho = np.asarray(rho)
    dims = _check_dims(rho.shape[-1], dims)
    if rho.shape[-2] != rho.shape[-1]:
        raise DimensionError(f"operator must be square, got {rho.shape[-2:]}")
    keep = sorted({int(keep)} if np.isscalar(keep) else {int(k) for k in keep})
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep={keep} out of range for {n} subsystems")
    batch = rho.shape[:-2]
    t = rho.reshape(batch + dims + dims)
    nb = len(batch)
    # einsum labels: batch, row factors, column factors (traced ones shared)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    bl = letters[:nb]
    rl = letters[nb:nb + n]
    cl = list(letters[nb + n:nb + 2 * n])
    for i in range(n):
        if i not in keep:
            cl[i] = rl[i]
    out = bl + "".join(rl[i] for i in keep) + "".join(cl[i] for i in keep)
    red = np.einsum(f"{bl}{rl}{''.join(cl)}->{out}", t)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return red.reshape(batch + (dk, dk))


def partial_transpose(rho, dims: Sequence[int], sys: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    dims = _check_dims(rho.shape[-1], dims)
    n = len(dims)
    if not 0 <= sys < n:
        raise DimensionError(f"subsystem {sys} out of range for {n} subsystems")
    batch = rho.shape[:-2]
    nb = len(batch)
    t = rho.reshape(batch + dims + dims)
    t = np.swapaxes(t, nb + sys, nb + n + sys)
    return t.reshape(rho.shape)


def eig_hermitian(h, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order."""
    h = as_matrix(h)
    dev = _max_dev(h - h.conj().T)
    if dev > tol:
        raise ValidationError(f"matrix not Hermitian (deviation {dev:.3e})")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvalsh(h) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian stack; closed form for ``2x2`` blocks."""
    h = np.asarray(h)
    if h.shape[-1] != 2:
        return np.linalg.eigvalsh(h)
    a = h[..., 0, 0].real
    c = h[..., 1, 1].real
    b = h[..., 0, 1]
    mean = (a + c) / 2
    disc = np.sqrt(((a - c) / 2) ** 2 + (b.real**2 + b.imag**2))
    return np.stack([mean - disc, mean + disc], axis=-1)


def spectrum_entropy(w) -> np.ndarray:
    """Shannon entropy (bits) of eigenvalue arrays along the last axis.

    Values in ``[-1e-9, 0]`` count as zero; anything more negative is an
    invalid state.
    """
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -NEG_EIG_TOL:
        raise ValidationError(f"negative eigenvalue {w.min():.3e} in entropy evaluation")
    return -np.sum(xlogy(np.maximum(w, 0.0), np.maximum(w, 0.0)), axis=-1) / np.log(2)


def von_neumann_entropy(rho) -> float | np.ndarray:
    """Von Neumann entropy in bits; accepts a single operator or a stack."""
    rho = np.asarray(rho)
    s = spectrum_entropy(eigvalsh(rho))
    return float(s) if np.ndim(s) == 0 else s


def binary_entropy(x) -> float:
    return float(spectrum_entropy(np.array([x, 1.0 - x])))


def schmidt_decompose(psi, dims: Sequence[int]):
    """Schmidt coefficients (descending) and the matching left/right bases as columns."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if len(dims) != 2:
        raise DimensionError(f"Schmidt decomposition needs a two-factor split, got {tuple(dims)}")
    da, db = _check_dims(psi.size, dims)
    u, s, vh = np.linalg.svd(psi.reshape(da, db), full_matrices=False)
    return s, u, vh.T


def purify(rho) -> np.ndarray:
    """Purification on ``system ⊗ ancilla``; tracing the ancilla returns ``rho``."""
    rho = validate_density(rho)
    d = rho.shape[0]
    w, v = eig_hermitian(rho)
    w = np.clip(w, 0.0, None)
    psi = np.zeros((d, d), dtype=complex)
    for k in range(d):
        psi[:, k] = np.sqrt(w[k]) * v[:, k]
    psi = psi.reshape(-1)
    return psi / np.linalg.norm(psi)


def trace_distance(rho, sigma) -> float:
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))


def _inv_sqrt_psd(g: np.ndarray) -> np.ndarray:
    if g.shape == (2, 2):
        # sqrt(G) = (G + s I) / t with s = sqrt(det G), t = sqrt(tr G + 2 s)
        a, d = g[0, 0].real, g[1, 1].real
        det = a * d - abs(g[0, 1]) ** 2
        if det > ZERO_EIG * max(a + d, 1.0):
            s = np.sqrt(det)
            t = np.sqrt(a + d + 2 * s)
            return np.array([[d + s, -g[0, 1]], [-g[1, 0], a + s]]) / (t * s)
    w, v = np.linalg.eigh(g)
    if w.min() < ZERO_EIG:
        w, v = np.linalg.eigh(g + ZERO_EIG * np.eye(g.shape[0]))
    return (v / np.sqrt(w)) @ v.conj().T


# -- charts used by the optimizers -------------------------------------------


def density_param_count(d: int) -> int:
    return d * d


def param_to_density(params, d: int) -> np.ndarray:
    """Map ``d**2`` reals onto a density operator via ``L L† / tr(L L†)``.

    The first ``d`` entries fill the real diagonal of the lower-triangular
    factor ``L``; the remaining ones fill the strictly lower entries row by
    row as (real, imag) pairs. An all-zero factor maps to the maximally
    mixed state.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (d * d,):
        raise DimensionError(f"expected {d * d} parameters, got {params.shape}")
    L = np.diag(params[:d]).astype(complex)
    rows, cols = np.tril_indices(d, -1)
    off = params[d:]
    L[rows, cols] = off[0::2] + 1j * off[1::2]
    rho = L @ L.conj().T
    tr = np.trace(rho).real
    if tr <= 0.0 or not np.isfinite(tr):
        return np.eye(d, dtype=complex) / d
    rho = rho / tr
    return (rho + rho.conj().T) / 2


def density_to_param(rho) -> np.ndarray:
    """Inverse chart for full-rank states (Cholesky factor); used to seed searches."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    L = np.linalg.cholesky(rho + 1e-12 * np.eye(d))
    rows, cols = np.tril_indices(d, -1)
    off = np.empty(2 * rows.size)
    off[0::2] = L[rows, cols].real
    off[1::2] = L[rows, cols].imag
    return np.concatenate([np.diag(L).real, off])


def bloch_to_density(v) -> np.ndarray:
    """Qubit states from Bloch vectors, shape ``(..., 3) -> (..., 2, 2)``."""
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = (1 + z) / 2
    out[..., 1, 1] = (1 - z) / 2
    out[..., 0, 1] = (x - 1j * y) / 2
    out[..., 1, 0] = (x + 1j * y) / 2
    return out


def density_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.stack(
        [2 * rho[..., 1, 0].real, 2 * rho[..., 1, 0].imag, (rho[..., 0, 0] - rho[..., 1, 1]).real],
        axis=-1,
    )


@dataclass(frozen=True)
class MeasurementKrausSet:
    """Complete set of Kraus operators ``P_i`` acting on a ``dim``-dimensional factor."""

    dim: int
    kraus: np.ndarray  # shape (k, dim, dim)
    name: str = ""

    def __post_init__(self):
        ks = np.asarray(self.kraus, dtype=complex)
        if ks.ndim == 2:
            ks = ks[None]
        if ks.ndim != 3 or ks.shape[1:] != (self.dim, self.dim):
            raise DimensionError(f"measurement operators must be {self.dim}x{self.dim}, got {ks.shape}")
        if not np.all(np.isfinite(ks)):
            raise ValidationError("measurement operators contain non-finite entries")
        object.__setattr__(self, "kraus", ks)
        res = self.completeness_residual()
        if res > COMPLETENESS_TOL:
            raise ValidationError(f"measurement not complete: residual {res:.3e}")

    @property
    def k(self) -> int:
        return self.kraus.shape[0]

    def effects(self) -> np.ndarray:
        return np.einsum("kji,kjl->kil", self.kraus.conj(), self.kraus)

    def completeness_residual(self) -> float:
        return _max_dev(self.effects().sum(axis=0) - np.eye(self.dim))

    def padded(self, k: int) -> "MeasurementKrausSet":
        """Same measurement with zero operators appended up to ``k`` outcomes."""
        if k < self.k:
            raise ValueError(f"cannot pad {self.k} outcomes down to {k}")
        extra = np.zeros((k - self.k, self.dim, self.dim), dtype=complex)
        return MeasurementKrausSet(self.dim, np.concatenate([self.kraus, extra]), self.name)


def measurement_param_count(dim_e: int, k: int) -> int:
    return 2 * k * dim_e * dim_e


def param_to_measurement(params, dim_e: int, k: int) -> MeasurementKrausSet:
    """Complete measurement ``P_i = A_i G^{-1/2}`` with ``G = sum_i A_i† A_i``.

    ``params`` holds, for each outcome, the real parts of ``A_i`` row-major
    followed by the imaginary parts. A singular ``G`` is shifted by
    ``1e-12 I`` before inversion.
    """
    params = np.asarray(params, dtype=float)
    n = measurement_param_count(dim_e, k)
    if params.shape != (n,):
        raise DimensionError(f"expected {n} parameters, got {params.shape}")
    blocks = params.reshape(k, 2, dim_e, dim_e)
    A = blocks[:, 0] + 1j * blocks[:, 1]
    G = np.einsum("kji,kjl->il", A.conj(), A)
    return MeasurementKrausSet(dim_e, A @ _inv_sqrt_psd(G))


def measurement_to_param(m: MeasurementKrausSet) -> np.ndarray:
    return np.stack([m.kraus.real, m.kraus.imag], axis=1).reshape(-1)


def rank_one_param_count(dim_e: int, k: int) -> int:
    return 2 * k * dim_e


def param_to_rank_one_measurement(params, dim_e: int, k: int) -> MeasurementKrausSet:
    """Rank-one measurement ``P_i = |0><a_i| G^{-1/2}`` with ``G = sum_i |a_i><a_i|``.

    Rank-one effects are enough for conditional-entropy minimisation, so this
    chart needs ``2 k dim_e`` reals instead of ``2 k dim_e**2``.
    """
    params = np.asarray(params, dtype=float)
    n = rank_one_param_count(dim_e, k)
    if params.shape != (n,):
        raise DimensionError(f"expected {n} parameters, got {params.shape}")
    blocks = params.reshape(k, 2, dim_e)
    a = blocks[:, 0] + 1j * blocks[:, 1]
    G = a.T @ a.conj()
    b = a.conj() @ _inv_sqrt_psd(G)  # rows are <a_i| G^{-1/2}
    P = np.zeros((k, dim_e, dim_e), dtype=complex)
    P[:, 0, :] = b
    return MeasurementKrausSet(dim_e, P)


def rank_one_to_param(vectors) -> np.ndarray:
    """Inverse of the rank-one chart for a list of (unnormalised) vectors ``a_i``."""
    a = np.asarray(vectors, dtype=complex)
    return np.stack([a.real, a.imag], axis=1).reshape(-1)


# -- random objects for tests and self-checks --------------------------------


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return (rho + rho.conj().T) / 2
