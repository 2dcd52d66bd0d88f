"""Content catalog, heterogeneous Zipf preferences and request probabilities.

Every user ranks the catalog with its own random permutation and draws its
own Zipf skewness, so two users rarely want the same thing with the same
intensity. Contents are equal-sized; a cache of capacity ``C`` holds ``C``
contents.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError

__all__ = [
    "CatalogParams",
    "PreferenceProfile",
    "zipf_pmf",
    "generate_preferences",
    "write_profile_csv",
    "read_profile_csv",
]


@dataclass(frozen=True)
class CatalogParams:
    """Catalog size and the range the per-user Zipf skewness is drawn from."""

    F: int = 30
    gamma_min: float = 0.1
    gamma_max: float = 2.5

    def __post_init__(self):
        if int(self.F) != self.F or self.F < 1:
            raise ParameterError(f"catalog size F must be a positive integer, got {self.F!r}")
        if not 0 <= self.gamma_min <= self.gamma_max:
            raise ParameterError(
                f"need 0 <= gamma_min <= gamma_max, got {self.gamma_min}, {self.gamma_max}"
            )


def zipf_pmf(F, gamma):
    """Zipf probability mass over ranks ``1..F``.

    Parameters
    ----------
    F : int
        Number of ranks.
    gamma : float
        Skewness, ``gamma >= 0``. Zero gives the uniform distribution.

    Returns
    -------
    ndarray of shape (F,)
        ``p[k-1] = k**-gamma / sum_j j**-gamma``.
    """
    if int(F) != F or F < 1:
        raise ParameterError(f"F must be a positive integer, got {F!r}")
    if gamma < 0 or not np.isfinite(gamma):
        raise ParameterError(f"gamma must be finite and >= 0, got {gamma!r}")
    weights = np.arange(1, int(F) + 1, dtype=float) ** (-float(gamma))
    return weights / weights.sum()


@dataclass(frozen=True, eq=False)
class PreferenceProfile:
    """Per-user preferences.

    ``rank_of_content[u, k]`` is the 1-based rank user ``u`` gives content
    ``k``; ``request_prob[u, k]`` is the probability that ``u`` asks for
    content ``k``.
    """

    rank_of_content: np.ndarray
    gamma: np.ndarray
    request_prob: np.ndarray

    @property
    def n_users(self):
        return self.request_prob.shape[0]

    @property
    def F(self):
        return self.request_prob.shape[1]

    @classmethod
    def from_ranks(cls, rank_of_content, gamma):
        ranks = np.asarray(rank_of_content, dtype=np.int64)
        gamma = np.asarray(gamma, dtype=float)
        if ranks.ndim != 2 or gamma.shape != (ranks.shape[0],):
            raise ParameterError("rank matrix must be (n_users, F) with one gamma per user")
        F = ranks.shape[1]
        expected = np.arange(1, F + 1)
        if not np.all(np.sort(ranks, axis=1) == expected):
            raise ParameterError("every rank row must be a permutation of 1..F")
        rho = np.empty(ranks.shape)
        for u, g in enumerate(gamma):
            rho[u] = zipf_pmf(F, g)[ranks[u] - 1]
        for arr in (ranks, gamma, rho):
            arr.setflags(write=False)
        return cls(ranks, gamma, rho)


def generate_preferences(n_users, params, rng):
    """Draw a random ranking and skewness for each of ``n_users`` users.

    Skewness is ``Uniform[gamma_min, gamma_max]`` and the ranking is a
    uniformly random permutation of the catalog.
    """
    if int(n_users) != n_users or n_users < 0:
        raise ParameterError(f"n_users must be a non-negative integer, got {n_users!r}")
    n_users = int(n_users)
    gamma = rng.uniform(params.gamma_min, params.gamma_max, size=n_users)
    ranks = np.empty((n_users, params.F), dtype=np.int64)
    for u in range(n_users):
        ranks[u] = rng.permutation(params.F) + 1
    return PreferenceProfile.from_ranks(ranks, gamma)


_PROFILE_HEADER = ["user_id", "content_id", "rank", "rho", "gamma"]


def write_profile_csv(profile, path):
    """Write one row per (user, content) pair."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_PROFILE_HEADER)
        for u in range(profile.n_users):
            for k in range(profile.F):
                writer.writerow([
                    u, k, int(profile.rank_of_content[u, k]),
                    repr(float(profile.request_prob[u, k])),
                    repr(float(profile.gamma[u])),
                ])
    return path


def read_profile_csv(path):
    """Inverse of :func:`write_profile_csv`; ``rho`` is recomputed from ranks."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParameterError(f"{path}: empty profile")
    n_users = 1 + max(int(r["user_id"]) for r in rows)
    F = 1 + max(int(r["content_id"]) for r in rows)
    ranks = np.zeros((n_users, F), dtype=np.int64)
    gamma = np.zeros(n_users)
    for r in rows:
        u, k = int(r["user_id"]), int(r["content_id"])
        ranks[u, k] = int(r["rank"])
        gamma[u] = float(r["gamma"])
    return PreferenceProfile.from_ranks(ranks, gamma)
