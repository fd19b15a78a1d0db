import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capbound.channels import (
    ChannelFormatError,
    QuantumChannel,
    amplitude_damping,
    apply,
    channel_zoo,
    complementary,
    dephasing,
    depolarizing,
    dilate,
    identity,
    joint_output,
    parse_channel_spec,
    random_channel,
    read_channel,
    read_measurement,
    validate,
    write_channel,
    write_measurement,
)
from capbound.measures import fig2_measurement
from capbound.operators import DimensionError, ValidationError, random_density, random_pure_state, von_neumann_entropy


def test_validate_accepts_zoo_and_rejects_incomplete():
    for T in (identity(3), amplitude_damping(0.3), dephasing(0.4), depolarizing(0.2), depolarizing(0.5, 3)):
        rep = validate(T)
        assert rep.passed and rep.residual <= 1e-12
    bad = QuantumChannel(np.array([[[1, 0], [0, 0.9]]]))
    rep = validate(bad)
    assert not rep.passed and rep.residual == pytest.approx(0.19)


def test_amplitude_damping_action():
    T = amplitude_damping(0.25)
    out = apply(T, np.diag([0.0, 1.0]))
    assert np.allclose(out, np.diag([0.25, 0.75]))
    assert np.allclose(apply(amplitude_damping(0), np.eye(2) / 2), np.eye(2) / 2)
    with pytest.raises(ValueError):
        amplitude_damping(1.5)


def test_depolarizing_fully_is_constant(rng):
    T = depolarizing(1.0)
    assert np.allclose(apply(T, random_density(2, rng)), np.eye(2) / 2)
    T3 = depolarizing(0.3, 3)
    rho = random_density(3, rng)
    assert np.allclose(apply(T3, rho), 0.7 * rho + 0.3 * np.eye(3) / 3)


def test_dephasing_keeps_diagonal_kills_coherence():
    plus = np.full((2, 2), 0.5)
    assert np.allclose(apply(dephasing(1.0), plus), np.eye(2) / 2)
    assert np.allclose(apply(dephasing(0.5), np.diag([0.2, 0.8])), np.diag([0.2, 0.8]))


def test_dilation_uses_kraus_index_environment():
    V = dilate(amplitude_damping(0.25))
    assert (V.d_in, V.d_out, V.d_env) == (2, 2, 2)
    # |0> -> |0>_B |1>_E ; |1> -> sqrt(p)|0>|0> + sqrt(1-p)|1>|1>
    assert np.allclose(V.matrix[:, 0], [0, 1, 0, 0])
    assert np.allclose(V.matrix[:, 1], [0.5, 0, 0, np.sqrt(0.75)])


def test_zero_kraus_operator_kept_at_p0():
    assert dilate(amplitude_damping(0.0)).d_env == 2


def test_dilate_rejects_invalid_channel():
    with pytest.raises(ValidationError, match="residual"):
        dilate(QuantumChannel(np.array([[[1, 0], [0, 0.5]]])))


def test_apply_rejects_wrong_dimension():
    with pytest.raises(DimensionError):
        apply(identity(2), np.eye(3) / 3)


@given(seed=st.integers(0, 2**31), d_in=st.sampled_from([2, 3]), d_out=st.sampled_from([2, 3]), k=st.integers(2, 4))
def test_stinespring_identities(seed, d_in, d_out, k):
    rng = np.random.default_rng(seed)
    T = random_channel(d_in, d_out, k, rng)
    V = dilate(T)
    assert V.residual() <= 1e-9
    rho = random_density(d_in, rng)
    J = joint_output(T, rho)
    assert np.max(np.abs(J.output - apply(T, rho))) <= 1e-9
    assert np.max(np.abs(J.environment - apply(complementary(T), rho))) <= 1e-9


@given(seed=st.integers(0, 2**31))
def test_pure_input_gives_equal_output_and_environment_entropy(seed):
    rng = np.random.default_rng(seed)
    T = random_channel(2, 2, 3, rng)
    psi = random_pure_state(2, rng)
    rho = np.outer(psi, psi.conj())
    assert von_neumann_entropy(apply(T, rho)) == pytest.approx(von_neumann_entropy(apply(complementary(T), rho)), abs=1e-9)


def test_random_channel_needs_enough_kraus(rng):
    with pytest.raises(DimensionError):
        random_channel(3, 2, 1, rng)


def test_zoo_and_spec_parsing():
    assert parse_channel_spec("amplitude-damping:0.25").name == "amplitude-damping:0.25"
    assert parse_channel_spec("identity:3").d_in == 3
    assert parse_channel_spec("depolarizing:0.1:3").d_in == 3
    with pytest.raises(ValueError, match="unknown channel"):
        channel_zoo("erasure", 0.1)


def test_channel_file_round_trip(tmp_path):
    T = amplitude_damping(0.3)
    path = tmp_path / "ad.json"
    write_channel(T, path)
    back = read_channel(path)
    assert np.allclose(back.kraus, T.kraus) and back.name == T.name
    assert np.allclose(parse_channel_spec(str(path)).kraus, T.kraus)


def test_measurement_file_round_trip(tmp_path):
    m = fig2_measurement(3)
    write_measurement(m, tmp_path / "m.json")
    back = read_measurement(tmp_path / "m.json")
    assert np.allclose(back.kraus, m.kraus)


@pytest.mark.parametrize(
    "doc, message",
    [
        ("{not json", "line 1 column 2"),
        ("[1, 2]", "top level"),
        ('{"d_in": 2, "kraus": []}', "missing field 'd_out'"),
        ('{"d_in": 2, "d_out": 2, "kraus": []}', "is empty"),
        ('{"d_in": 2, "d_out": 2, "kraus": [[[[1,0],[0,0]],[[0,0]]]]}', "ragged row"),
        ('{"d_in": 2, "d_out": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1]]]]}', r"\[re, im\]"),
        ('{"d_in": 3, "d_out": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}', "expected \\(2, 3\\)"),
    ],
)
def test_read_channel_reports_format_errors(tmp_path, doc, message):
    path = tmp_path / "c.json"
    path.write_text(doc)
    with pytest.raises(ChannelFormatError, match=message):
        read_channel(path)


def test_read_channel_rejects_incomplete_kraus(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d_in": 2, "d_out": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0.9, 0]]]]}))
    with pytest.raises(ValidationError, match="residual 1.900e-01"):
        read_channel(path)
