"""Deterministic derivative-free optimisation.

Two strategies are provided:

* multistart Nelder-Mead over an unconstrained chart (``maximize`` /
  ``minimize``); restart ``r`` draws its start point from its own stream
  seeded by ``(seed, r)``, so results do not depend on scheduling and adding
  restarts never loses the earlier ones;
* an exhaustive Bloch-ball grid followed by local zoom refinement
  (``grid_minimize_bloch``), used where a qubit minimisation has to be
  global for a bound to stay valid.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .operators import bloch_to_density

DEFAULT_GRID = (60, 120, 120)


@dataclass(frozen=True)
class OptimizerConfig:
    seed: int = 42
    restarts: int = 32
    max_iterations: int = 2000
    tolerance: float = 1e-8
    grid: tuple[int, int, int] | None = DEFAULT_GRID
    refinement_rounds: int = 3
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.grid is not None and (len(self.grid) != 3 or min(self.grid) < 2):
            raise ValueError(f"grid must be three resolutions >= 2, got {self.grid}")

    def with_(self, **changes) -> "OptimizerConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(changes)
        return OptimizerConfig(**d)


@dataclass
class OptimizationResult:
    best_value: float
    best_params: np.ndarray
    restart_values: np.ndarray
    evaluations: int
    certified_global: bool = False
    resolution: str = ""
    restart_params: list = field(default_factory=list)

    @property
    def spread(self) -> float:
        v = self.restart_values[np.isfinite(self.restart_values)]
        return float(v.max() - v.min()) if v.size else float("nan")


class _Tracked:
    """Minimisation target that remembers the best point it has seen."""

    def __init__(self, fn):
        self.fn = fn
        self.n = 0
        self.best = np.inf
        self.arg = None

    def __call__(self, x):
        self.n += 1
        v = self.fn(x)
        v = float(v) if np.isfinite(v) else np.inf
        if v < self.best:
            self.best, self.arg = v, np.array(x, dtype=float)
        return v


def _local_search(fn, x0, cfg: OptimizerConfig):
    tracked = _Tracked(fn)
    x = np.asarray(x0, dtype=float)
    dim = x.size
    opts = dict(
        maxiter=cfg.max_iterations,
        maxfev=4 * cfg.max_iterations,
        xatol=1e-7,
        fatol=cfg.tolerance,
        adaptive=dim > 5,
    )
    # a run that stops on its iteration budget is re-seeded at the incumbent
    for _ in range(1 + cfg.refinement_rounds):
        res = _scipy_minimize(tracked, x, method="Nelder-Mead", options=opts)
        x = tracked.arg if tracked.arg is not None else res.x
        if res.success:
            break
    return tracked.best, tracked.arg if tracked.arg is not None else x, tracked.n


def minimize(
    objective: Callable[[np.ndarray], float],
    dimension: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    seeds: Sequence[np.ndarray] = (),
    scale: float = 1.0,
) -> OptimizationResult:
    """Multistart minimisation; explicit ``seeds`` replace the first random starts."""
    seeds = [np.asarray(s, dtype=float) for s in seeds]
    n = max(cfg.restarts, len(seeds))

    def start(r):
        if r < len(seeds):
            return seeds[r]
        rng = np.random.default_rng([cfg.seed, r])
        return rng.normal(scale=scale, size=dimension)

    def run(r):
        return _local_search(objective, start(r), cfg)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(run, range(n)))
    else:
        runs = [run(r) for r in range(n)]
    values = np.array([v for v, _, _ in runs])
    i = int(np.argmin(values))  # first index wins ties
    return OptimizationResult(
        best_value=float(values[i]),
        best_params=runs[i][1],
        restart_values=values,
        evaluations=sum(c for _, _, c in runs),
        certified_global=False,
        resolution=f"multistart x{n}",
        restart_params=[x for _, x, _ in runs],
    )


def _negated(res: OptimizationResult) -> OptimizationResult:
    res.best_value = -res.best_value
    res.restart_values = -res.restart_values
    return res


def maximize(objective, dimension, cfg: OptimizerConfig = OptimizerConfig(), seeds=(), scale=1.0):
    res = minimize(lambda x: -objective(x), dimension, cfg, seeds, scale)
    return _negated(res)


# -- Bloch-ball grid ----------------------------------------------------------


def spherical_to_bloch(r, theta, phi) -> np.ndarray:
    r, theta, phi = np.broadcast_arrays(r, theta, phi)
    return np.stack(
        [r * np.sin(theta) * np.cos(phi), r * np.sin(theta) * np.sin(phi), r * np.cos(theta)], axis=-1
    )


class BlochGrid:
    """Radius x polar x azimuth lattice over the closed Bloch ball."""

    def __init__(self, shape=DEFAULT_GRID):
        nr, nt, nph = (int(s) for s in shape)
        self.shape = (nr, nt, nph)
        self.r = np.linspace(0.0, 1.0, nr)
        self.theta = np.linspace(0.0, np.pi, nt)
        self.phi = np.linspace(0.0, 2 * np.pi, nph, endpoint=False)
        self.steps = (1.0 / (nr - 1), np.pi / (nt - 1), 2 * np.pi / nph)
        R, T, P = np.meshgrid(self.r, self.theta, self.phi, indexing="ij")
        self.coords = np.stack([R, T, P], axis=-1).reshape(-1, 3)
        self.vectors = spherical_to_bloch(R, T, P).reshape(-1, 3)

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def note(self) -> str:
        dr, dt, dp = self.steps
        return (
            f"Bloch grid {self.shape[0]}x{self.shape[1]}x{self.shape[2]} "
            f"(dr={dr:.4g}, dtheta={dt:.4g}, dphi={dp:.4g})"
        )

    def evaluate(self, batch_objective, chunk: int = 20000) -> np.ndarray:
        """Evaluate a stacked objective ``(N, 2, 2) -> (N,)`` over the whole grid."""
        out = np.empty(len(self))
        for s in range(0, len(self), chunk):
            out[s:s + chunk] = batch_objective(bloch_to_density(self.vectors[s:s + chunk]))
        return out


_GRID_CACHE: dict[tuple, BlochGrid] = {}


def bloch_grid(shape=DEFAULT_GRID) -> BlochGrid:
    key = tuple(int(s) for s in shape)
    if key not in _GRID_CACHE:
        _GRID_CACHE.clear()
        _GRID_CACHE[key] = BlochGrid(key)
    return _GRID_CACHE[key]


def _candidates(values: np.ndarray, grid: BlochGrid, n: int) -> list[int]:
    """Indices of the ``n`` best grid points that are not mutual neighbours."""
    order = np.argsort(values, kind="stable")
    picked: list[int] = []
    min_sep = 2.5 * max(grid.steps[0], grid.steps[1])
    for idx in order:
        v = grid.vectors[idx]
        if all(np.linalg.norm(v - grid.vectors[j]) > min_sep for j in picked):
            picked.append(int(idx))
            if len(picked) == n:
                break
    return picked


def _zoom(batch_objective, coord, value, steps, rounds, points=7):
    """Shrinking local lattices around ``coord``; never returns a worse value."""
    best_c, best_v = np.array(coord, dtype=float), float(value)
    width = np.array(steps, dtype=float)
    evals = 0
    for _ in range(rounds):
        offs = [np.linspace(-w, w, points) for w in width]
        R, T, P = np.meshgrid(best_c[0] + offs[0], best_c[1] + offs[1], best_c[2] + offs[2], indexing="ij")
        R = np.clip(R, 0.0, 1.0)
        T = np.clip(T, 0.0, np.pi)
        cand = np.stack([R, T, P], axis=-1).reshape(-1, 3)
        vals = batch_objective(bloch_to_density(spherical_to_bloch(cand[:, 0], cand[:, 1], cand[:, 2])))
        evals += vals.size
        j = int(np.argmin(vals))
        if vals[j] < best_v:
            best_v, best_c = float(vals[j]), cand[j]
        width = width / 3.0
    return best_c, best_v, evals


def _polish(batch_objective, vec, value, cfg: OptimizerConfig):
    """Nelder-Mead in Cartesian Bloch coordinates, radially clamped into the ball."""

    def clamp(x):
        n = np.linalg.norm(x)
        return x / n if n > 1.0 else x

    def f(x):
        return float(batch_objective(bloch_to_density(clamp(np.asarray(x))[None]))[0])

    tracked = _Tracked(f)
    tracked.best, tracked.arg = float(value), np.array(vec, dtype=float)
    _scipy_minimize(
        tracked,
        vec,
        method="Nelder-Mead",
        options=dict(maxiter=cfg.max_iterations, xatol=1e-11, fatol=min(cfg.tolerance, 1e-12), initial_simplex=None),
    )
    return clamp(tracked.arg), tracked.best, tracked.n


def grid_minimize_bloch(
    batch_objective,
    grid=DEFAULT_GRID,
    refinement_rounds: int = 3,
    cfg: OptimizerConfig = OptimizerConfig(),
    values: np.ndarray | None = None,
    n_candidates: int = 6,
) -> OptimizationResult:
    """Global minimisation over qubit density operators.

    ``batch_objective`` maps a stack of ``2x2`` density operators to values.
    The full grid is evaluated (or ``values`` is reused when the caller has
    it already), then the best few separated cells are zoomed into for
    ``refinement_rounds`` rounds and polished locally. The reported minimum
    never exceeds the best grid value.
    """
    g = grid if isinstance(grid, BlochGrid) else bloch_grid(grid)
    if values is None:
        values = g.evaluate(batch_objective)
    evals = values.size
    results = []
    for idx in _candidates(values, g, n_candidates):
        c, v, n1 = _zoom(batch_objective, g.coords[idx], values[idx], g.steps, refinement_rounds)
        vec = spherical_to_bloch(*c)
        if refinement_rounds > 0:
            vec, v, n2 = _polish(batch_objective, vec, v, cfg)
        else:
            n2 = 0
        evals += n1 + n2
        results.append((v, vec))
    vals = np.array([v for v, _ in results])
    i = int(np.argmin(vals))
    return OptimizationResult(
        best_value=float(vals[i]),
        best_params=np.asarray(results[i][1]),
        restart_values=vals,
        evaluations=int(evals),
        certified_global=True,
        resolution=f"{g.note}, {refinement_rounds} refinement rounds",
        restart_params=[np.asarray(x) for _, x in results],
    )


def grid_maximize_bloch(batch_objective, grid=DEFAULT_GRID, refinement_rounds=3, cfg=OptimizerConfig(), values=None, n_candidates=6):
    res = grid_minimize_bloch(
        lambda rho: -batch_objective(rho),
        grid,
        refinement_rounds,
        cfg,
        None if values is None else -values,
        n_candidates,
    )
    return _negated(res)
