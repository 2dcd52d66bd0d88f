"""Two-tier network realizations drawn from homogeneous Poisson point processes.

Users, small base stations (sBS) and macro base stations (MBS) are three
independent HPPPs on a square window. A fraction ``alpha`` of the users are
requesters. Each requester associates with the nearest sBS inside ``R_b``
(best mean received power under ``d**-beta`` path loss) when one exists,
and is always served by its nearest MBS.

Placement rows follow a fixed node order: all users, then all sBSs, then all
MBSs. :meth:`Topology.sbs_row` and :meth:`Topology.mbs_row` translate node
indices into row indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError, TopologyError

__all__ = [
    "NetworkParams",
    "Topology",
    "sample_hppp",
    "build_topology",
    "build_topology_with_mbs",
    "associate",
]


@dataclass(frozen=True)
class NetworkParams:
    """Intensities (nodes per m^2), radii (m), requester fraction and window."""

    lambda_u: float = 1e-4
    lambda_b: float = 1e-5
    lambda_m: float = 1.5e-7
    R_u: float = 15.0
    R_b: float = 150.0
    R_m: float = 500.0
    alpha: float = 0.2
    region_side: float = 2000.0
    # periodic boundary; off by default so the window is a plain square
    torus: bool = False

    def __post_init__(self):
        for name in ("lambda_u", "lambda_b", "lambda_m", "R_u", "R_b", "R_m", "region_side"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be > 0, got {value!r}")
        if not 0 <= self.alpha <= 1:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        if not self.R_u < self.R_b < self.R_m:
            raise ParameterError(
                f"radii must satisfy R_u < R_b < R_m, got {self.R_u}, {self.R_b}, {self.R_m}"
            )

    @property
    def area(self):
        return self.region_side ** 2


def sample_hppp(intensity, region_side, rng):
    """Sample a homogeneous PPP on ``[0, region_side)^2``.

    Returns an ``(n, 2)`` array; ``n ~ Poisson(intensity * region_side**2)``.
    """
    if not np.isfinite(intensity) or intensity <= 0:
        raise ParameterError(f"intensity must be > 0, got {intensity!r}")
    if not np.isfinite(region_side) or region_side <= 0:
        raise ParameterError(f"region_side must be > 0, got {region_side!r}")
    n = rng.poisson(intensity * region_side ** 2)
    return rng.uniform(0.0, region_side, size=(n, 2))


@dataclass(frozen=True, eq=False)
class Topology:
    """One network realization with its association structure.

    Per-requester arrays are aligned with ``requesters``. ``tagged_sbs`` holds
    ``-1`` where the requester has no sBS in range. ``sbs_neighbors`` maps
    each tagged sBS to the other sBSs within ``R_b`` of it.
    """

    params: NetworkParams
    users: np.ndarray
    sbs: np.ndarray
    mbs: np.ndarray
    requesters: np.ndarray
    tagged_sbs: np.ndarray
    serving_mbs: np.ndarray
    d2d_neighbors: tuple
    sbs_neighbors: dict = field(repr=False)

    @property
    def n_users(self):
        return len(self.users)

    @property
    def n_sbs(self):
        return len(self.sbs)

    @property
    def n_mbs(self):
        return len(self.mbs)

    @property
    def n_nodes(self):
        return self.n_users + self.n_sbs + self.n_mbs

    @property
    def indicator_s(self):
        return self.tagged_sbs >= 0

    @property
    def indicator_m(self):
        return self.tagged_sbs < 0

    def sbs_row(self, b):
        return self.n_users + b

    def mbs_row(self, m):
        return self.n_users + self.n_sbs + m

    def node_class(self):
        """Per-row labels ``'user'``, ``'sbs'`` or ``'mbs'``."""
        return np.array(
            ["user"] * self.n_users + ["sbs"] * self.n_sbs + ["mbs"] * self.n_mbs
        )

    def capacities(self, C_d, C_b, C_m):
        """Storage limit of every placement row."""
        return np.concatenate([
            np.full(self.n_users, float(C_d)),
            np.full(self.n_sbs, float(C_b)),
            np.full(self.n_mbs, float(C_m)),
        ])

    def requester_position(self, r):
        """Index ``r`` into ``requesters``; returns that user's position."""
        return self.users[self.requesters[r]]


def _tree(points, params):
    if params.torus:
        # cKDTree needs coordinates strictly inside [0, boxsize)
        wrapped = np.mod(points, params.region_side)
        return cKDTree(wrapped, boxsize=params.region_side)
    return cKDTree(points)


def _wrap(point, params):
    return np.mod(point, params.region_side) if params.torus else point


def _distances(origin, points, params):
    delta = np.abs(points - origin)
    if params.torus:
        delta = np.minimum(delta, params.region_side - delta)
    return np.hypot(delta[:, 0], delta[:, 1])


def _nearest(origin, candidates, points, params):
    """Index of the nearest candidate; ties go to the lowest index."""
    candidates = np.sort(np.asarray(candidates, dtype=np.int64))
    d = _distances(origin, points[candidates], params)
    return int(candidates[np.argmin(d)])


def associate(users, sbs, mbs, params, requesters):
    """Build a :class:`Topology` from given positions and requester indices."""
    users = np.array(users, dtype=float).reshape(-1, 2)
    sbs = np.array(sbs, dtype=float).reshape(-1, 2)
    mbs = np.array(mbs, dtype=float).reshape(-1, 2)
    requesters = np.array(requesters, dtype=np.int64).reshape(-1)
    if len(mbs) == 0:
        raise TopologyError("no MBS in the window; every user needs a serving MBS")
    if len(np.unique(requesters)) != len(requesters):
        raise ParameterError("requester indices must be distinct")
    if len(requesters) and (requesters.min() < 0 or requesters.max() >= len(users)):
        raise ParameterError("requester index out of range")

    user_tree = _tree(users, params) if len(users) else None
    sbs_tree = _tree(sbs, params) if len(sbs) else None

    tagged = np.full(len(requesters), -1, dtype=np.int64)
    serving = np.empty(len(requesters), dtype=np.int64)
    d2d = []
    for i, u in enumerate(requesters):
        pos = users[u]
        if sbs_tree is not None:
            in_range = sbs_tree.query_ball_point(_wrap(pos, params), params.R_b)
            if in_range:
                tagged[i] = _nearest(pos, in_range, sbs, params)
        serving[i] = _nearest(pos, np.arange(len(mbs)), mbs, params)
        near = user_tree.query_ball_point(_wrap(pos, params), params.R_u)
        near = np.sort(np.asarray([v for v in near if v != u], dtype=np.int64))
        d2d.append(near)

    neighbors = {}
    for b in np.unique(tagged[tagged >= 0]):
        pos = sbs[b]
        near = sbs_tree.query_ball_point(_wrap(pos, params), params.R_b)
        neighbors[int(b)] = np.sort(np.asarray([j for j in near if j != b], dtype=np.int64))

    for arr in (users, sbs, mbs, requesters, tagged, serving, *d2d, *neighbors.values()):
        arr.setflags(write=False)
    return Topology(
        params=params,
        users=users,
        sbs=sbs,
        mbs=mbs,
        requesters=requesters,
        tagged_sbs=tagged,
        serving_mbs=serving,
        d2d_neighbors=tuple(d2d),
        sbs_neighbors=neighbors,
    )


def build_topology(params, rng):
    """Sample one realization and derive its association structure.

    Raises
    ------
    TopologyError
        If the window contains no MBS.
    """
    users = sample_hppp(params.lambda_u, params.region_side, rng)
    sbs = sample_hppp(params.lambda_b, params.region_side, rng)
    mbs = sample_hppp(params.lambda_m, params.region_side, rng)
    n_req = int(np.floor(params.alpha * len(users) + 0.5))
    requesters = np.sort(rng.choice(len(users), size=n_req, replace=False))
    return associate(users, sbs, mbs, params, requesters)


def build_topology_with_mbs(params, rng, max_attempts=1000):
    """Resample until the window contains at least one MBS.

    With sparse macro cells a window often comes up empty; this conditions
    the realization on a non-empty MBS tier while staying deterministic for a
    given random stream.
    """
    for _ in range(max_attempts):
        try:
            return build_topology(params, rng)
        except TopologyError:
            continue
    raise TopologyError(f"no MBS after {max_attempts} draws; enlarge region_side")
