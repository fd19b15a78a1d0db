"""Quantum channels in Kraus form, their Stinespring dilations and file I/O.

The environment basis of a dilation is indexed by Kraus position:
``U|psi> = sum_i K_i|psi> ⊗ |i>_E``. Zero Kraus operators are kept so that
parameter sweeps never change the environment dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .operators import (
    COMPLETENESS_TOL,
    DimensionError,
    MeasurementKrausSet,
    ValidationError,
    partial_trace,
)


class ChannelFormatError(ValueError):
    """A channel or measurement document could not be parsed."""


@dataclass(frozen=True)
class QuantumChannel:
    kraus: np.ndarray  # shape (k, d_out, d_in)
    name: str = ""

    def __post_init__(self):
        ks = np.asarray(self.kraus, dtype=complex)
        if ks.ndim == 2:
            ks = ks[None]
        if ks.ndim != 3 or ks.shape[0] < 1:
            raise DimensionError(f"Kraus operators must stack to (k, d_out, d_in), got {ks.shape}")
        if not np.all(np.isfinite(ks)):
            raise ValidationError("Kraus operators contain non-finite entries")
        object.__setattr__(self, "kraus", ks)

    @property
    def d_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def d_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho):
        return apply(self, rho)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    residual: float

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class StinespringIsometry:
    d_in: int
    d_out: int
    d_env: int
    matrix: np.ndarray  # (d_out * d_env, d_in)

    def residual(self) -> float:
        U = self.matrix
        return float(np.max(np.abs(U.conj().T @ U - np.eye(self.d_in))))


@dataclass(frozen=True)
class JointOutput:
    """``U rho U†`` on ``B ⊗ E``."""

    state: np.ndarray
    dims: tuple[int, int]

    @property
    def output(self) -> np.ndarray:
        return partial_trace(self.state, self.dims, 0)

    @property
    def environment(self) -> np.ndarray:
        return partial_trace(self.state, self.dims, 1)


def validate(T: QuantumChannel) -> ValidationReport:
    gram = np.einsum("kji,kjl->il", T.kraus.conj(), T.kraus)
    res = float(np.max(np.abs(gram - np.eye(T.d_in))))
    return ValidationReport(res <= COMPLETENESS_TOL, res)


def require_valid(T: QuantumChannel) -> QuantumChannel:
    rep = validate(T)
    if not rep.passed:
        raise ValidationError(
            f"channel {T.name or '<unnamed>'} is not trace preserving: "
            f"completeness residual {rep.residual:.3e}"
        )
    return T


def _check_input(T: QuantumChannel, rho: np.ndarray):
    if rho.shape[-2:] != (T.d_in, T.d_in):
        raise DimensionError(f"input shape {rho.shape[-2:]} does not match d_in={T.d_in}")


def apply(T: QuantumChannel, rho) -> np.ndarray:
    """``sum_i K_i rho K_i†``; ``rho`` may be a stack of inputs."""
    rho = np.asarray(rho, dtype=complex)
    _check_input(T, rho)
    K = T.kraus
    return np.einsum("kij,...jl,kml->...im", K, rho, K.conj())


def dilate(T: QuantumChannel) -> StinespringIsometry:
    require_valid(T)
    k, d_out, d_in = T.kraus.shape
    # row index b * d_env + i  <->  <b|_B <i|_E
    U = np.transpose(T.kraus, (1, 0, 2)).reshape(d_out * k, d_in)
    return StinespringIsometry(d_in, d_out, k, U)


def joint_states(V: StinespringIsometry, rho) -> np.ndarray:
    """``U rho U†`` for a single input or a stack of inputs."""
    U = V.matrix
    rho = np.asarray(rho, dtype=complex)
    return U @ rho @ U.conj().T


def joint_output(T: QuantumChannel, rho) -> JointOutput:
    rho = np.asarray(rho, dtype=complex)
    _check_input(T, rho)
    V = dilate(T)
    return JointOutput(joint_states(V, rho), (V.d_out, V.d_env))


def complementary(T: QuantumChannel) -> QuantumChannel:
    """Channel to the environment, ``rho -> tr_B(U rho U†)``."""
    require_valid(T)
    # Kraus operator for outcome b on B: (<b| ⊗ 1_E) U, i.e. F_b[i, :] = K_i[b, :]
    F = np.transpose(T.kraus, (1, 0, 2))
    return QuantumChannel(F, f"complementary({T.name})" if T.name else "complementary")


# -- channel zoo --------------------------------------------------------------


def identity(d: int = 2) -> QuantumChannel:
    return QuantumChannel(np.eye(d, dtype=complex)[None], f"identity:{d}")


def amplitude_damping(p: float) -> QuantumChannel:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"damping probability must lie in [0, 1], got {p}")
    K0 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    K1 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    return QuantumChannel(np.stack([K0, K1]), f"amplitude-damping:{p:g}")


def dephasing(q: float) -> QuantumChannel:
    """``rho -> (1 - q/2) rho + (q/2) Z rho Z``; ``q = 1`` removes all coherence."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"dephasing strength must lie in [0, 1], got {q}")
    Z = np.diag([1.0, -1.0]).astype(complex)
    return QuantumChannel(np.stack([np.sqrt(1 - q / 2) * np.eye(2), np.sqrt(q / 2) * Z]), f"dephasing:{q:g}")


def _weyl_operators(d: int) -> list[np.ndarray]:
    w = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(w ** np.arange(d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a in range(d) for b in range(d)]


def depolarizing(q: float, d: int = 2) -> QuantumChannel:
    """``rho -> (1 - q) rho + q I/d``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"depolarizing strength must lie in [0, 1], got {q}")
    ops = _weyl_operators(d)
    weights = [1 - q + q / d**2] + [q / d**2] * (d * d - 1)
    K = np.stack([np.sqrt(wt) * op for wt, op in zip(weights, ops)])
    return QuantumChannel(K, f"depolarizing:{q:g}" if d == 2 else f"depolarizing:{q:g}:{d}")


_ZOO = {
    "identity": lambda *a: identity(int(a[0]) if a else 2),
    "amplitude-damping": lambda p: amplitude_damping(float(p)),
    "dephasing": lambda q: dephasing(float(q)),
    "depolarizing": lambda q, *d: depolarizing(float(q), int(d[0]) if d else 2),
}


def channel_zoo(name: str, *params) -> QuantumChannel:
    try:
        factory = _ZOO[name]
    except KeyError:
        raise ValueError(f"unknown channel {name!r}; known: {', '.join(sorted(_ZOO))}") from None
    return factory(*params)


def zoo_names() -> list[str]:
    return sorted(_ZOO)


def parse_channel_spec(spec: str) -> QuantumChannel:
    """``name:param[:param]`` for the zoo, anything else is read as a file path."""
    name, *params = spec.split(":")
    if name in _ZOO:
        return channel_zoo(name, *params)
    return read_channel(spec)


# -- document format ----------------------------------------------------------


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ChannelFormatError(f"{where}: matrix must be a non-empty array of rows")
    rows = []
    width = None
    for r, row in enumerate(obj):
        if not isinstance(row, list):
            raise ChannelFormatError(f"{where}[{r}]: row must be an array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ChannelFormatError(f"{where}[{r}]: ragged row of length {len(row)}, expected {width}")
        vals = []
        for c, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
            ):
                raise ChannelFormatError(f"{where}[{r}][{c}]: complex entry must be [re, im]")
            vals.append(complex(z[0], z[1]))
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ChannelFormatError(f"{path}: top level must be an object")
    return doc


def _require(doc: dict, key: str, kind, path) -> object:
    if key not in doc:
        raise ChannelFormatError(f"{path}: missing field {key!r}")
    val = doc[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ChannelFormatError(f"{path}: field {key!r} has wrong type {type(val).__name__}")
    return val


def channel_to_dict(T: QuantumChannel) -> dict:
    return {
        "name": T.name,
        "d_in": T.d_in,
        "d_out": T.d_out,
        "kraus": [_encode_matrix(K) for K in T.kraus],
    }


def write_channel(T: QuantumChannel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(T), indent=1) + "\n")


def read_channel(path) -> QuantumChannel:
    doc = _load_json(path)
    d_in = _require(doc, "d_in", int, path)
    d_out = _require(doc, "d_out", int, path)
    kraus = _require(doc, "kraus", list, path)
    name = doc.get("name", "")
    if not kraus:
        raise ChannelFormatError(f"{path}: field 'kraus' is empty")
    mats = [_decode_matrix(K, f"kraus[{i}]") for i, K in enumerate(kraus)]
    for i, K in enumerate(mats):
        if K.shape != (d_out, d_in):
            raise ChannelFormatError(f"{path}: kraus[{i}] has shape {K.shape}, expected {(d_out, d_in)}")
    return require_valid(QuantumChannel(np.stack(mats), str(name)))


def measurement_to_dict(m: MeasurementKrausSet) -> dict:
    return {"name": m.name, "dim": m.dim, "povm_kraus": [_encode_matrix(P) for P in m.kraus]}


def write_measurement(m: MeasurementKrausSet, path) -> None:
    Path(path).write_text(json.dumps(measurement_to_dict(m), indent=1) + "\n")


def read_measurement(path) -> MeasurementKrausSet:
    doc = _load_json(path)
    dim = _require(doc, "dim", int, path)
    ops = _require(doc, "povm_kraus", list, path)
    if not ops:
        raise ChannelFormatError(f"{path}: field 'povm_kraus' is empty")
    mats = [_decode_matrix(P, f"povm_kraus[{i}]") for i, P in enumerate(ops)]
    for i, P in enumerate(mats):
        if P.shape != (dim, dim):
            raise ChannelFormatError(f"{path}: povm_kraus[{i}] has shape {P.shape}, expected {(dim, dim)}")
    return MeasurementKrausSet(dim, np.stack(mats), str(doc.get("name", "")))


def random_channel(d_in: int, d_out: int, n_kraus: int, rng: np.random.Generator) -> QuantumChannel:
    """Kraus operators cut from a Haar-random isometry ``C^d_in -> C^(d_out * n_kraus)``."""
    if d_out * n_kraus < d_in:
        raise DimensionError(f"{n_kraus} Kraus operators into dimension {d_out} cannot preserve trace on {d_in}")
    g = rng.normal(size=(d_out * n_kraus, d_in)) + 1j * rng.normal(size=(d_out * n_kraus, d_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return QuantumChannel(q.reshape(d_out, n_kraus, d_in).transpose(1, 0, 2), f"random:{d_in}->{d_out}x{n_kraus}")
