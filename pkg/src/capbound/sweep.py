"""Parameter sweeps over a channel family, one row of capacity figures per point."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    classical_bound_hull,
    classical_bound_simple,
    coherent_information_q1,
    entanglement_assisted_capacity,
    holevo_chi_msw,
    s_max,
)
from .channels import channel_zoo, dilate, read_measurement
from .measures import builtin_measurement
from .operators import MeasurementKrausSet
from .optimize import OptimizerConfig

HEADER = ("p", "s_max", "c_arrow_min", "c_bound", "chi_lower", "q1_lower", "cea", "certified")


@dataclass(frozen=True)
class SweepRow:
    p: float
    s_max: float
    c_arrow_min: float
    c_bound: float
    chi_lower: float
    q1_lower: float
    cea: float
    certified: bool


def resolve_measurement(source: str, dim: int) -> MeasurementKrausSet:
    """A built-in measurement name or a measurement document path."""
    try:
        return builtin_measurement(source, dim)
    except ValueError:
        if not Path(source).exists():
            raise
    return read_measurement(source)


def sweep_point(family: str, p: float, meas: str, cfg: OptimizerConfig, form: str = "hull") -> SweepRow:
    T = channel_zoo(family, p)
    m = resolve_measurement(meas, dilate(T).d_env)
    smax = s_max(T, cfg)
    bound = classical_bound_hull if form == "hull" else classical_bound_simple
    report = bound(T, m, cfg)
    # the correlation deduction is reported relative to S_max
    return SweepRow(
        p=float(p),
        s_max=smax,
        c_arrow_min=smax - report.value,
        c_bound=report.value,
        chi_lower=holevo_chi_msw(T, cfg),
        q1_lower=coherent_information_q1(T, cfg),
        cea=entanglement_assisted_capacity(T, cfg),
        certified=report.certified,
    )


def _point(args):
    return sweep_point(*args)


def run_sweep(
    family: str,
    p_values,
    meas: str,
    cfg: OptimizerConfig = OptimizerConfig(),
    form: str = "hull",
    workers: int = 1,
) -> list[SweepRow]:
    """Rows in the order of ``p_values``; points run in separate processes when ``workers > 1``."""
    inner = cfg.with_(workers=1)
    jobs = [(family, float(p), meas, inner, form) for p in p_values]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_point, jobs))
    return [_point(j) for j in jobs]


def p_grid(p_from: float, p_to: float, steps: int) -> np.ndarray:
    if not 0.0 <= p_from <= p_to <= 1.0:
        raise ValueError(f"need 0 <= p_from <= p_to <= 1, got {p_from}, {p_to}")
    if steps < 2:
        raise ValueError(f"steps must be at least 2, got {steps}")
    return np.linspace(p_from, p_to, steps)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return f"{x:.9g}"


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for row in rows:
        w.writerow([_fmt(getattr(row, h)) for h in HEADER])
    return buf.getvalue()


def rows_to_json(rows, config: dict) -> str:
    doc = {
        "config": config,
        "rows": [{h: (v if isinstance(v, bool) else float(_fmt(v))) for h, v in asdict(r).items()} for r in rows],
    }
    return json.dumps(doc, indent=1) + "\n"
