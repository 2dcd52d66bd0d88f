"""Cache-hit probabilities, per-user cache hit ratio and the swarm objective.

A request walks the access protocol in a fixed order: own cache, any D2D
neighbour within ``R_u``, then either the tagged sBS / a neighbouring sBS /
the serving MBS (requester covered by an sBS) or the serving MBS alone (no
sBS coverage). Each node holds each content independently with its
placement probability, so every outcome probability is a product of
``eta`` and ``1 - eta`` factors.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import NumericError, ParameterError
from .phy import SuccessProbs

__all__ = [
    "Placement",
    "HitBreakdown",
    "SceneIndex",
    "hit_breakdown",
    "chr_user",
    "sigma",
    "make_objective",
    "mc_hit_oracle",
]

CAPACITY_SLACK = 1e-9
_NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Placement:
    """Caching probabilities ``eta[row, content]`` and per-row storage limits."""

    eta: np.ndarray
    capacities: np.ndarray

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float)
        caps = np.array(self.capacities, dtype=float).reshape(-1)
        if eta.ndim != 2 or eta.shape[0] != caps.shape[0]:
            raise ParameterError(
                f"eta must be (rows, F) with one capacity per row; got {eta.shape} and {caps.shape}"
            )
        violation = self.violation(eta, caps)
        if violation:
            raise ParameterError(violation)
        eta.setflags(write=False)
        caps.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "capacities", caps)

    @staticmethod
    def violation(eta, capacities):
        """Describe the first broken storage/probability constraint, or ``None``."""
        if not np.all(np.isfinite(eta)):
            return "eta contains non-finite entries"
        if eta.min(initial=0.0) < 0.0 or eta.max(initial=0.0) > 1.0:
            return "eta entries must lie in [0, 1]"
        over = eta.sum(axis=1) - capacities
        if np.any(over > CAPACITY_SLACK):
            row = int(np.argmax(over))
            return f"row {row} stores {eta[row].sum()!r} > capacity {capacities[row]!r}"
        return None

    @property
    def shape(self):
        return self.eta.shape


@dataclass(frozen=True)
class HitBreakdown:
    """Outcome probabilities of one request.

    The sBS-branch fields are zero for requesters without sBS coverage and
    the MBS-only fields are zero otherwise.
    """

    p_self: float
    p_d2d: float
    p_tagged_sbs: float
    p_neighbor_sbs: float
    p_mbs_via_sbs: float
    p_miss_s: float
    p_mbs_direct: float
    p_miss_m: float

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def total(self):
        return sum(self.as_dict().values())

    def local_hit(self):
        """Probability the request is served without the cloud."""
        return 1.0 - self.p_miss_s - self.p_miss_m


class SceneIndex:
    """Padded gather indices for vectorized evaluation over all requesters.

    Padding points at an extra all-zero row appended to ``eta``, which
    contributes a factor 1 to every product and 0 to every hit.
    """

    def __init__(self, topo):
        self.n_rows = topo.n_nodes
        pad = self.n_rows
        R = len(topo.requesters)
        self.requesters = np.asarray(topo.requesters)
        self.self_rows = self.requesters.copy()
        kd = max((len(n) for n in topo.d2d_neighbors), default=0)
        self.d2d = np.full((R, max(kd, 1)), pad, dtype=np.int64)
        for r, nb in enumerate(topo.d2d_neighbors):
            self.d2d[r, : len(nb)] = nb
        self.indicator_s = np.asarray(topo.indicator_s)
        self.b0 = np.where(self.indicator_s, topo.n_users + topo.tagged_sbs, pad)
        kb = max((len(v) for v in topo.sbs_neighbors.values()), default=0)
        self.sbs_nb = np.full((R, max(kb, 1)), pad, dtype=np.int64)
        for r, b in enumerate(topo.tagged_sbs):
            if b >= 0:
                nb = topo.sbs_neighbors[int(b)]
                self.sbs_nb[r, : len(nb)] = topo.n_users + nb
        self.m0 = topo.n_users + topo.n_sbs + np.asarray(topo.serving_mbs)
        self._position = {int(u): r for r, u in enumerate(self.requesters)}

    def position(self, user):
        try:
            return self._position[int(user)]
        except (KeyError, TypeError, ValueError):
            raise ParameterError(f"user {user!r} is not a requester") from None

    def components(self, eta):
        """Per-(requester, content) outcome probabilities.

        ``eta`` is ``(..., rows, F)``; every returned array is ``(..., R, F)``.
        """
        eta = np.asarray(eta, dtype=float)
        if eta.shape[-2] != self.n_rows:
            raise ParameterError(f"placement has {eta.shape[-2]} rows, scene needs {self.n_rows}")
        zero = np.zeros(eta.shape[:-2] + (1, eta.shape[-1]))
        ext = np.concatenate([eta, zero], axis=-2)
        own = ext[..., self.self_rows, :]
        miss_own = 1.0 - own
        miss_d2d = np.prod(1.0 - ext[..., self.d2d, :], axis=-2)
        e_b0 = ext[..., self.b0, :]
        miss_nb = np.prod(1.0 - ext[..., self.sbs_nb, :], axis=-2)
        e_m0 = ext[..., self.m0, :]
        s = self.indicator_s[:, None]

        local_miss = miss_own * miss_d2d
        p_d2d = miss_own * (1.0 - miss_d2d)
        p_b0 = np.where(s, local_miss * e_b0, 0.0)
        sbs_miss = local_miss * (1.0 - e_b0)
        p_B = np.where(s, sbs_miss * (1.0 - miss_nb), 0.0)
        p_Ms = np.where(s, sbs_miss * miss_nb * e_m0, 0.0)
        miss_s = np.where(s, sbs_miss * miss_nb * (1.0 - e_m0), 0.0)
        p_Mm = np.where(s, 0.0, local_miss * e_m0)
        miss_m = np.where(s, 0.0, local_miss * (1.0 - e_m0))
        return own, p_d2d, p_b0, p_B, p_Ms, miss_s, p_Mm, miss_m

    def chr(self, eta, rho, succ):
        """Cache hit ratio of every requester, shape ``(..., R)``."""
        own, p_d2d, p_b0, p_B, p_Ms, _, p_Mm, _ = self.components(eta)
        served = (
            own
            + p_d2d * succ.p_s_d2d
            + p_Mm * succ.p_s_mbs_direct
            + p_b0 * succ.p_s_tagged_sbs
            + p_B * succ.p_s_neighbor_sbs
            + p_Ms * succ.p_s_mbs_via_sbs
        )
        return np.sum(rho * served, axis=-1)


def _check_succ(succ):
    if not isinstance(succ, SuccessProbs):
        raise ParameterError("succ must be a SuccessProbs instance")
    values = succ.as_array()
    if np.any((values < 0) | (values > 1)) or not np.all(np.isfinite(values)):
        raise ParameterError("success probabilities must lie in [0, 1]")


def _eta(placement):
    return placement.eta if isinstance(placement, Placement) else np.asarray(placement, dtype=float)


def hit_breakdown(placement, topo, requester, content):
    """Outcome probabilities for one request of ``content`` by user ``requester``.

    Products over empty neighbour sets are 1.
    """
    eta = _eta(placement)
    if not 0 <= int(content) < eta.shape[1] or int(content) != content:
        raise ParameterError(f"content index {content!r} out of range")
    index = SceneIndex(topo)
    r = index.position(requester)
    k = int(content)
    col = eta[:, k : k + 1]
    parts = [float(np.asarray(c)[r, 0]) for c in index.components(col)]
    hb = HitBreakdown(*parts)

    # total hit (own, D2D and the active branch) must equal 1 - miss exactly
    if index.indicator_s[r]:
        hit = hb.p_self + hb.p_d2d + hb.p_tagged_sbs + hb.p_neighbor_sbs + hb.p_mbs_via_sbs
        closed_hit = 1.0 - _chain_miss(col, index, r, with_sbs=True)
        miss = hb.p_miss_s
    else:
        hit = hb.p_self + hb.p_d2d + hb.p_mbs_direct
        closed_hit = 1.0 - _chain_miss(col, index, r, with_sbs=False)
        miss = hb.p_miss_m
    if abs(hit - closed_hit) > _NORMALIZATION_TOL or abs(hit + miss - 1.0) > _NORMALIZATION_TOL:
        raise NumericError(f"hit/miss normalization broken for requester {requester}: {hb}")
    return hb


def _chain_miss(col, index, r, with_sbs):
    """Miss probability as one product over every node on the request path."""
    rows = [index.self_rows[r], *index.d2d[r]]
    if with_sbs:
        rows += [index.b0[r], *index.sbs_nb[r]]
    rows.append(index.m0[r])
    ext = np.append(col[:, 0], 0.0)
    return float(np.prod(1.0 - ext[np.asarray(rows)]))


def chr_user(placement, topo, prefs, succ, requester):
    """Expected fraction of ``requester``'s requests served by local nodes."""
    _check_succ(succ)
    index = SceneIndex(topo)
    r = index.position(requester)
    eta = _eta(placement)
    rho = np.asarray(prefs.request_prob)[index.requesters]
    return float(index.chr(eta, rho, succ)[r])


def sigma(placement, topo, prefs, succ):
    """Average cache hit ratio over all requesters of ``topo``."""
    _check_succ(succ)
    if len(topo.requesters) == 0:
        raise ParameterError("topology has no requesters")
    return make_objective(topo, prefs, succ)(_eta(placement))


def make_objective(topo, prefs, succ):
    """Return ``f(eta) -> sigma`` with the scene indices precomputed.

    ``eta`` may carry leading batch axes, e.g. ``(particles, rows, F)``, in
    which case an array of objective values is returned.
    """
    _check_succ(succ)
    if len(topo.requesters) == 0:
        raise ParameterError("topology has no requesters")
    index = SceneIndex(topo)
    rho = np.asarray(prefs.request_prob)[index.requesters]
    if rho.shape[0] != len(index.requesters):
        raise ParameterError("preference profile does not cover every requester")

    def objective(eta):
        eta = np.asarray(eta, dtype=float)
        if eta.shape[-1] != rho.shape[-1]:
            raise ParameterError(f"placement has {eta.shape[-1]} contents, profile has {rho.shape[-1]}")
        value = index.chr(eta, rho, succ).mean(axis=-1)
        return float(value) if np.ndim(value) == 0 else value

    objective.index = index
    return objective


def mc_hit_oracle(placement, topo, requester, content, trials, rng, chunk=250_000):
    """Empirical outcome frequencies from sampled cache contents.

    Each trial draws every relevant node's cache independently (Bernoulli
    with its placement probability) and walks the access protocol.
    """
    if int(trials) != trials or trials < 1:
        raise ParameterError(f"trials must be a positive integer, got {trials!r}")
    eta = _eta(placement)
    k = int(content)
    if not 0 <= k < eta.shape[1]:
        raise ParameterError(f"content index {content!r} out of range")
    index = SceneIndex(topo)
    r = index.position(requester)
    covered = bool(index.indicator_s[r])
    nb_d2d = list(topo.d2d_neighbors[r])
    nb_sbs = []
    if covered:
        nb_sbs = [topo.n_users + j for j in topo.sbs_neighbors[int(topo.tagged_sbs[r])]]
    rows = [int(requester), *nb_d2d]
    if covered:
        rows += [int(index.b0[r]), *nb_sbs]
    rows.append(int(index.m0[r]))
    probs = eta[np.asarray(rows), k]
    n_d2d, n_nb = len(nb_d2d), len(nb_sbs)

    counts = np.zeros(8, dtype=np.int64)
    done = 0
    while done < trials:
        n = min(chunk, int(trials) - done)
        cached = rng.random((n, len(rows))) < probs
        own = cached[:, 0]
        d2d = cached[:, 1 : 1 + n_d2d].any(axis=1) & ~own
        pending = ~own & ~d2d
        counts[0] += own.sum()
        counts[1] += d2d.sum()
        m0 = cached[:, -1]
        if covered:
            b0 = cached[:, 1 + n_d2d]
            nb = cached[:, 2 + n_d2d : 2 + n_d2d + n_nb].any(axis=1)
            hit_b0 = pending & b0
            pending &= ~b0
            hit_nb = pending & nb
            pending &= ~nb
            hit_m = pending & m0
            counts[2] += hit_b0.sum()
            counts[3] += hit_nb.sum()
            counts[4] += hit_m.sum()
            counts[5] += (pending & ~m0).sum()
        else:
            counts[6] += (pending & m0).sum()
            counts[7] += (pending & ~m0).sum()
        done += n
    return HitBreakdown(*(counts / float(trials)))
