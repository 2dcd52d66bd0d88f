"""Modified particle swarm optimizer for probabilistic cache placement.

Particles live in a normalized space: each row (one node) is a probability
vector over the catalog whose entries never exceed ``1 / C_j``. Scaling a
row by its capacity ``C_j`` gives caching probabilities that fill the cache
exactly and stay within ``[0, 1]``.

Each iteration applies the inertia/cognitive/social velocity update with
element-wise uniform weights, adds the velocity, applies a "random hike"
(for a random number of repetitions in ``1..C_j``, one random entry of the
row is raised to the row sum divided by ``C_j``), clamps negatives,
renormalizes and repairs entries above ``1 / C_j``.

Particles are updated in lock step: all positions of an iteration are moved
against the global best of the previous iteration, evaluated as one batch,
and the global best is reduced once at the end of the iteration.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import OptimizerError, ParameterError
from .hitmodel import Placement, make_objective

__all__ = [
    "PsoConfig",
    "Swarm",
    "OptimizeResult",
    "sample_feasible_rows",
    "repair_rows",
    "init_swarm",
    "step",
    "optimize",
    "baseline_random",
    "baseline_equal",
    "write_history_csv",
]

_MAX_REJECTIONS = 100


@dataclass(frozen=True)
class PsoConfig:
    """Swarm size, update coefficients and stopping rule.

    ``stall_iters`` stops the run after that many iterations without a new
    global best; ``None`` disables early stopping.
    """

    n_particles: int = 20
    a: float = 0.9
    psi1: float = 0.4
    psi2: float = 0.4
    max_iters: int = 100
    seed: int = 0
    stall_iters: int | None = None

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 2:
            raise ParameterError(f"need at least 2 particles, got {self.n_particles!r}")
        if not 0 < self.a <= 1:
            raise ParameterError(f"inertia a must lie in (0, 1], got {self.a!r}")
        if self.psi1 < 0 or self.psi2 < 0:
            raise ParameterError("acceleration coefficients must be >= 0")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if self.stall_iters is not None and self.stall_iters < 1:
            raise ParameterError("stall_iters must be >= 1 or None")


@dataclass(eq=False)
class Swarm:
    """Mutable swarm state; arrays are ``(particles, rows, F)`` unless noted."""

    capacities: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    personal_best: np.ndarray
    personal_best_value: np.ndarray
    global_best: np.ndarray
    global_best_value: float
    values: np.ndarray
    history: list = field(default_factory=list)
    mean_history: list = field(default_factory=list)

    @property
    def n_particles(self):
        return self.positions.shape[0]

    def scaled(self, normalized):
        """Caching probabilities for normalized rows (any leading axes)."""
        return np.minimum(normalized * self.capacities[:, None], 1.0)

    @property
    def scaled_positions(self):
        return self.scaled(self.positions)

    @property
    def scaled_global_best(self):
        return self.scaled(self.global_best)

    def best_placement(self):
        return Placement(self.scaled_global_best, self.capacities)


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    placement: Placement
    sigma: float
    history: np.ndarray
    mean_history: np.ndarray
    iterations: int
    runtime_s: float


def _check_capacities(capacities, F):
    caps = np.asarray(capacities, dtype=float).reshape(-1)
    if np.any(caps < 1) or np.any(caps != np.floor(caps)):
        raise ParameterError("capacities must be positive integers (content units)")
    if np.any(caps > F):
        raise ParameterError(f"a row cannot hold more than F={F} contents; got max {caps.max()}")
    return caps


def repair_rows(rows, capacities):
    """Cap normalized rows at ``1 / C_j``, moving the excess to the other entries.

    Excess is spread in proportion to the uncapped entries (evenly when they
    are all zero). Rows must already sum to 1; the result still does.
    """
    X = np.array(rows, dtype=float)
    cap = np.broadcast_to((1.0 / np.asarray(capacities, dtype=float))[:, None], X.shape)
    F = X.shape[-1]
    for _ in range(F + 1):
        over = X > cap
        if not over.any():
            break
        excess = np.where(over, X - cap, 0.0).sum(axis=-1, keepdims=True)
        X = np.where(over, cap, X)
        free = X < cap
        weight = np.where(free, X, 0.0)
        wsum = weight.sum(axis=-1, keepdims=True)
        nfree = free.sum(axis=-1, keepdims=True)
        share = np.where(
            wsum > 0,
            weight / np.where(wsum > 0, wsum, 1.0),
            free / np.maximum(nfree, 1),
        )
        X = X + excess * share
    return np.minimum(X, cap)


def sample_feasible_rows(capacities, F, rng, size=()):
    """Uniform simplex rows with every entry at most ``1 / C_j``.

    Rows are flat-Dirichlet draws; a row breaking the bound is redrawn, and
    after 100 redraws it is repaired with :func:`repair_rows` instead.
    """
    caps = _check_capacities(capacities, F)
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    n_rows = caps.size
    full = shape + (n_rows, F)
    cap = np.broadcast_to(1.0 / caps[:, None], full)
    X = _dirichlet(rng, full)
    bad = (X > cap).any(axis=-1)
    for _ in range(_MAX_REJECTIONS):
        if not bad.any():
            break
        redraw = _dirichlet(rng, (int(bad.sum()), F))
        X[bad] = redraw
        bad = (X > cap).any(axis=-1)
    if bad.any():
        X = repair_rows(X, caps)
    return X


def _dirichlet(rng, shape):
    g = rng.exponential(size=shape)
    return g / g.sum(axis=-1, keepdims=True)


def _evaluate(objective, scaled):
    values = np.asarray(objective(scaled), dtype=float).reshape(-1)
    if not np.all(np.isfinite(values)):
        bad = np.flatnonzero(~np.isfinite(values))
        raise OptimizerError(
            f"objective returned a non-finite value for particles {bad.tolist()}",
            diagnostics={
                "particles": bad.tolist(),
                "row_sums": scaled[bad].sum(axis=-1),
                "min_entry": float(scaled[bad].min()),
                "max_entry": float(scaled[bad].max()),
            },
        )
    return values


def init_swarm(capacities, F, config, rng, objective=None):
    """Random feasible positions and velocities; personal bests = positions.

    When ``objective`` is given the particles are evaluated and the global
    best is the first particle with the largest objective value.
    """
    caps = _check_capacities(capacities, F)
    P = config.n_particles
    X = sample_feasible_rows(caps, F, rng, size=P)
    V = sample_feasible_rows(caps, F, rng, size=P)
    swarm = Swarm(
        capacities=caps,
        positions=X,
        velocities=V,
        personal_best=X.copy(),
        personal_best_value=np.full(P, -np.inf),
        global_best=X[0].copy(),
        global_best_value=-np.inf,
        values=np.full(P, -np.inf),
    )
    if objective is not None:
        values = _evaluate(objective, swarm.scaled(X))
        swarm.values = values
        swarm.personal_best_value = values.copy()
        g = int(np.argmax(values))
        swarm.global_best = X[g].copy()
        swarm.global_best_value = float(values[g])
    return swarm


def _random_hike(X_int, caps, rng):
    """In place: for each row, ``randint(1..C_j)`` times set a random entry to rowsum / C_j."""
    P, D, F = X_int.shape
    reps = rng.integers(1, caps.astype(np.int64) + 1, size=(P, D))
    cols = rng.integers(0, F, size=(P, D, int(caps.max())))
    for t in range(int(caps.max())):
        p_idx, d_idx = np.nonzero(reps > t)
        if p_idx.size == 0:
            break
        row_sum = X_int[p_idx, d_idx].sum(axis=-1)
        X_int[p_idx, d_idx, cols[p_idx, d_idx, t]] = row_sum / caps[d_idx]
    return X_int


def _normalize(X, F):
    X = np.maximum(X, 0.0)
    total = X.sum(axis=-1, keepdims=True)
    dead = total[..., 0] <= 0
    out = X / np.where(total > 0, total, 1.0)
    # a row wiped out by clamping restarts from the uniform row
    out[dead] = 1.0 / F
    return out


def step(swarm, objective, config, rng):
    """Advance every particle by one iteration and update the bests in place."""
    X, V = swarm.positions, swarm.velocities
    P, D, F = X.shape
    e1 = rng.random(X.shape)
    e2 = rng.random(X.shape)
    V = (
        config.a * V
        + config.psi1 * e1 * (swarm.personal_best - X)
        + config.psi2 * e2 * (swarm.global_best[None] - X)
    )
    X_int = X + V
    _random_hike(X_int, swarm.capacities, rng)
    X_new = repair_rows(_normalize(X_int, F), swarm.capacities)

    values = _evaluate(objective, swarm.scaled(X_new))
    improved = values > swarm.personal_best_value
    swarm.personal_best[improved] = X_new[improved]
    swarm.personal_best_value[improved] = values[improved]
    if improved.any():
        cand = np.flatnonzero(improved)
        best = cand[np.argmax(values[cand])]
        if values[best] > swarm.global_best_value:
            swarm.global_best = X_new[best].copy()
            swarm.global_best_value = float(values[best])

    swarm.positions = X_new
    swarm.velocities = V
    swarm.values = values
    swarm.history.append(swarm.global_best_value)
    swarm.mean_history.append(float(values.mean()))
    return swarm


def optimize(topology, prefs, succ, capacities, config, objective=None, callback=None, rng=None):
    """Maximize the average cache hit ratio of ``topology`` with M-PSO.

    Parameters
    ----------
    topology, prefs, succ
        Scene, preferences and link success probabilities defining the objective.
    capacities : array-like
        Storage limit per placement row, e.g. ``topology.capacities(2, 4, 8)``.
    config : PsoConfig
    objective : callable, optional
        Replaces the cache-hit objective; receives ``(particles, rows, F)``.
    callback : callable, optional
        Called as ``callback(swarm)`` after every iteration.
    rng : numpy.random.Generator, optional
        Random stream; defaults to ``default_rng(config.seed)``.

    Returns
    -------
    OptimizeResult
        Best scaled placement, its objective value and the per-iteration
        best/mean history.
    """
    if objective is None:
        objective = make_objective(topology, prefs, succ)
    F = prefs.F
    caps = np.asarray(capacities, dtype=float)
    if topology is not None and caps.size != topology.n_nodes:
        raise ParameterError(f"{caps.size} capacities for {topology.n_nodes} nodes")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    started = time.perf_counter()
    swarm = init_swarm(caps, F, config, rng, objective)
    stall = 0
    for _ in range(config.max_iters):
        before = swarm.global_best_value
        step(swarm, objective, config, rng)
        if callback is not None:
            callback(swarm)
        stall = stall + 1 if swarm.global_best_value <= before else 0
        if config.stall_iters is not None and stall >= config.stall_iters:
            break
    return OptimizeResult(
        placement=swarm.best_placement(),
        sigma=swarm.global_best_value,
        history=np.asarray(swarm.history),
        mean_history=np.asarray(swarm.mean_history),
        iterations=len(swarm.history),
        runtime_s=time.perf_counter() - started,
    )


def baseline_random(capacities, F, rng, fill=True):
    """Random feasible placement.

    With ``fill`` every row stores exactly its capacity; otherwise each row
    total is drawn uniformly in ``[0, C_j]``.
    """
    caps = _check_capacities(capacities, F)
    rows = sample_feasible_rows(caps, F, rng)
    eta = np.minimum(rows * caps[:, None], 1.0)
    if not fill:
        eta = eta * rng.random(caps.size)[:, None]
    return Placement(eta, caps)


def baseline_equal(capacities, F):
    """Every content stored with probability ``C_j / F`` at row ``j``."""
    caps = np.asarray(capacities, dtype=float).reshape(-1)
    if np.any(caps > F):
        raise ParameterError(f"capacity {caps.max()} exceeds catalog size F={F}")
    if np.any(caps < 0):
        raise ParameterError("capacities must be >= 0")
    return Placement(np.repeat(caps[:, None] / F, F, axis=1), caps)


def write_history_csv(result, path):
    """Write ``iteration,best_sigma,mean_sigma`` rows (1-based iterations)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "best_sigma", "mean_sigma"])
        for i, (best, mean) in enumerate(zip(result.history, result.mean_history), start=1):
            writer.writerow([i, repr(float(best)), repr(float(mean))])
    return path
