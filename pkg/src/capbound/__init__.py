"""Single-shot capacity bounds for quantum channels from classical correlations with the environment."""

from .bounds import (
    BoundKind,
    BoundReport,
    CapacityCertificate,
    CapacityVerdict,
    ProductStructureError,
    classical_bound_ensemble,
    classical_bound_hull,
    classical_bound_simple,
    coherent_information_q1,
    construct_perfect_input,
    entanglement_assisted_capacity,
    holevo_chi_ensemble,
    holevo_chi_msw,
    max_capacity_certificate_classical,
    max_quantum_capacity_certificate,
    s_max,
)
from .channels import (
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
    read_channel,
    validate,
    write_channel,
)
from .measures import (
    c_arrow_fixed,
    c_arrow_optimized,
    concurrence,
    eof_estimate,
    eof_two_qubit,
    fig2_measurement,
    koashi_winter_residual,
    ppt_verdict,
)
from .operators import MeasurementKrausSet, von_neumann_entropy
from .optimize import OptimizerConfig, OptimizationResult

__version__ = "0.1.0"

__all__ = [
    "BoundKind",
    "BoundReport",
    "CapacityCertificate",
    "CapacityVerdict",
    "ProductStructureError",
    "classical_bound_ensemble",
    "classical_bound_hull",
    "classical_bound_simple",
    "coherent_information_q1",
    "construct_perfect_input",
    "entanglement_assisted_capacity",
    "holevo_chi_ensemble",
    "holevo_chi_msw",
    "max_capacity_certificate_classical",
    "max_quantum_capacity_certificate",
    "s_max",
    "QuantumChannel",
    "amplitude_damping",
    "apply",
    "channel_zoo",
    "complementary",
    "dephasing",
    "depolarizing",
    "dilate",
    "identity",
    "joint_output",
    "read_channel",
    "validate",
    "write_channel",
    "MeasurementKrausSet",
    "von_neumann_entropy",
    "OptimizerConfig",
    "OptimizationResult",
    "c_arrow_fixed",
    "c_arrow_optimized",
    "concurrence",
    "eof_estimate",
    "eof_two_qubit",
    "fig2_measurement",
    "koashi_winter_residual",
    "ppt_verdict",
]
