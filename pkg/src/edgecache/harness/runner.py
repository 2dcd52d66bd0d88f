"""Monte Carlo replication over seeds, schemes and sweep points.

Every seed fixes one scene (topology and preferences) that all schemes see,
so scheme comparisons are paired. Success probabilities depend only on
intensities and radio parameters and are computed once per sweep point.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..content import generate_preferences
from ..errors import EdgeCacheError, ParameterError
from ..hitmodel import hit_breakdown, make_objective, mc_hit_oracle
from ..optimizer import baseline_equal, baseline_random, optimize
from ..phy import closed_form_success, mc_success_oracle
from ..topology import build_topology_with_mbs

__all__ = [
    "RunRecord",
    "ExperimentResult",
    "Scene",
    "make_scene",
    "run",
    "VerificationCheck",
    "VerificationReport",
    "verify",
]

log = logging.getLogger(__name__)

# stream tags keep scene, baseline and swarm randomness independent per seed
_SCENE, _RANDOM, _SWARM, _VERIFY = 0, 1, 2, 3


@dataclass(frozen=True, eq=False)
class RunRecord:
    scheme: str
    sweep_param: str
    sweep_value: object
    seed: int
    sigma: float
    runtime_s: float
    error: str | None = None
    placement: object = field(default=None, repr=False)
    history: np.ndarray | None = field(default=None, repr=False)
    mean_history: np.ndarray | None = field(default=None, repr=False)


@dataclass(eq=False)
class ExperimentResult:
    name: str
    records: list

    def aggregates(self):
        """``{(scheme, sweep_value): (mean, std, count)}`` over successful runs."""
        groups = {}
        for rec in self.records:
            if rec.error is None:
                groups.setdefault((rec.scheme, rec.sweep_value), []).append(rec.sigma)
        out = {}
        for key, values in groups.items():
            arr = np.asarray(values, dtype=float)
            std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            out[key] = (float(arr.mean()), std, int(arr.size))
        return out

    def mean(self, scheme, sweep_value=""):
        return self.aggregates()[(scheme, sweep_value)][0]

    def sigmas(self, scheme, sweep_value=""):
        """Per-seed objective values, ordered by seed."""
        recs = [r for r in self.records if r.scheme == scheme and r.sweep_value == sweep_value]
        return np.array([r.sigma for r in sorted(recs, key=lambda r: r.seed)])

    def record(self, scheme, seed, sweep_value=""):
        for rec in self.records:
            if rec.scheme == scheme and rec.seed == seed and rec.sweep_value == sweep_value:
                return rec
        raise KeyError((scheme, seed, sweep_value))

    @property
    def errors(self):
        return [r for r in self.records if r.error is not None]


@dataclass(frozen=True, eq=False)
class Scene:
    topology: object
    prefs: object
    capacities: np.ndarray


def make_scene(spec, seed):
    """Topology (conditioned on at least one MBS) and preferences for one seed."""
    rng = np.random.default_rng([int(seed), _SCENE])
    topo = build_topology_with_mbs(spec.network, rng)
    prefs = generate_preferences(topo.n_users, spec.catalog, rng)
    c = spec.capacities
    return Scene(topo, prefs, topo.capacities(c.C_d, c.C_b, c.C_m))


def _run_scheme(scheme, spec, scene, succ, seed, objective):
    F = spec.catalog.F
    history = mean_history = None
    started = time.perf_counter()
    if scheme == "mpso":
        rng = np.random.default_rng([int(seed), _SWARM, int(spec.pso.seed)])
        res = optimize(scene.topology, scene.prefs, succ, scene.capacities, spec.pso,
                       objective=objective, rng=rng)
        placement, value = res.placement, res.sigma
        history, mean_history = res.history, res.mean_history
    elif scheme == "random":
        rng = np.random.default_rng([int(seed), _RANDOM])
        placement = baseline_random(scene.capacities, F, rng)
        value = objective(placement.eta)
    elif scheme == "equal":
        placement = baseline_equal(scene.capacities, F)
        value = objective(placement.eta)
    else:
        raise ParameterError(f"unknown scheme {scheme!r}")
    return placement, float(value), time.perf_counter() - started, history, mean_history


def run(spec, progress=None):
    """Run every scheme on every seed at every sweep point.

    Failures of a single (scheme, point, seed) combination are recorded on
    the result and do not stop the run.
    """
    records = []
    for param, value, point in spec.points():
        succ = closed_form_success(point.phy, point.network)
        for seed in spec.seeds:
            try:
                scene = make_scene(point, seed)
                objective = make_objective(scene.topology, scene.prefs, succ)
            except EdgeCacheError as exc:
                for scheme in spec.schemes:
                    records.append(RunRecord(scheme, param, value, int(seed), math.nan, 0.0, str(exc)))
                continue
            for scheme in spec.schemes:
                try:
                    placement, sigma, runtime, hist, mean_hist = _run_scheme(
                        scheme, point, scene, succ, seed, objective
                    )
                    rec = RunRecord(scheme, param, value, int(seed), sigma, runtime, None,
                                    placement, hist, mean_hist)
                except EdgeCacheError as exc:
                    log.warning("%s seed=%s %s=%s failed: %s", scheme, seed, param, value, exc)
                    rec = RunRecord(scheme, param, value, int(seed), math.nan, 0.0, str(exc))
                records.append(rec)
                if progress is not None:
                    progress(rec)
    return ExperimentResult(spec.name, records)


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    observed: float
    expected: float
    deviation: float
    tolerance: float
    passed: bool

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.name}: observed={self.observed:.6g} expected={self.expected:.6g} "
                f"deviation={self.deviation:.3g} tolerance={self.tolerance:.3g}")


@dataclass(eq=False)
class VerificationReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        return [c.line() for c in self.checks]

    def __str__(self):
        return "\n".join(self.lines())


def verify(spec, trials=10**6, phy_trials=10**5, n_requests=8, n_sigma=4.0, rel_tol=0.15):
    """Compare analytic hit and success probabilities with their Monte Carlo oracles.

    Hit probabilities are checked on the first seed's scene under a random
    placement, field by field, within ``n_sigma`` binomial standard errors.
    Closed-form success probabilities of the D2D, tagged-sBS and direct-MBS
    links are checked within ``rel_tol`` relative error.
    """
    if int(trials) != trials or trials < 1 or int(phy_trials) != phy_trials or phy_trials < 1:
        raise ParameterError("trials must be positive integers")
    seed = int(spec.seeds[0])
    checks = []
    scene = make_scene(spec, seed)
    topo = scene.topology
    rng = np.random.default_rng([seed, _VERIFY])
    placement = baseline_random(scene.capacities, spec.catalog.F, rng)
    chosen = _verification_requests(topo, spec.catalog.F, n_requests, rng)
    for user, content in chosen:
        analytic = hit_breakdown(placement, topo, user, content).as_dict()
        empirical = mc_hit_oracle(placement, topo, user, content, int(trials), rng).as_dict()
        for name, p in analytic.items():
            se = math.sqrt(max(p * (1.0 - p), 0.0) / trials)
            dev = abs(empirical[name] - p)
            tol = n_sigma * se
            checks.append(VerificationCheck(
                f"hit u={user} k={content} {name}", empirical[name], p, dev, tol,
                dev <= tol if se > 0 else dev == 0.0,
            ))

    cf = closed_form_success(spec.phy, spec.network)
    for link in ("d2d", "tagged_sbs", "mbs_direct"):
        expected = getattr(cf, f"p_s_{link}")
        observed = mc_success_oracle(link, spec.phy, spec.network, int(phy_trials), rng)
        rel = abs(observed - expected) / expected
        checks.append(VerificationCheck(f"success {link}", observed, expected, rel, rel_tol, rel <= rel_tol))
    return VerificationReport(checks)


def _verification_requests(topo, F, n, rng):
    """Pick requesters, favouring those with D2D or neighbouring-sBS paths."""
    rich = [int(u) for r, u in enumerate(topo.requesters)
            if len(topo.d2d_neighbors[r]) or (topo.tagged_sbs[r] >= 0 and len(topo.sbs_neighbors[int(topo.tagged_sbs[r])]))]
    plain = [int(u) for u in topo.requesters if int(u) not in set(rich)]
    pool = (rich + plain)[:n]
    return [(u, int(rng.integers(F))) for u in pool]
