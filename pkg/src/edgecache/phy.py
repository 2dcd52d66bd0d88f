"""Transmission success probabilities for the five link types.

Closed forms assume Rayleigh fading (unit-mean exponential power gain), PPP
interferers and serving distances distributed as the nearest point of a PPP
truncated to the communication radius. Active requesters (intensity
``alpha * lambda_u``) act as user-tier interferers.

:func:`mc_success_oracle` estimates the same probabilities by drawing
node positions and fading explicitly, with no shared code path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

import numpy as np
from scipy import integrate

from .errors import ModelDomainError, NumericError, ParameterError

__all__ = [
    "PhyParams",
    "SuccessProbs",
    "LINKS",
    "db_to_linear",
    "dbm_to_watt",
    "sinc_norm",
    "inner_exclusion_integral",
    "closed_form_success",
    "mc_success_oracle",
]

LINKS = ("d2d", "tagged_sbs", "neighbor_sbs", "mbs_via_sbs", "mbs_direct")

_QUAD_EPSABS = 1e-9
_QUAD_EPSREL = 1e-9
_DOMAIN_SLACK = 1e-9


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class PhyParams:
    """Radio parameters. Powers in dBm, threshold in dB; linear views as properties.

    ``zeta_bar`` defaults to ``zeta * p_b`` in watts, the residual
    self-interference power of a full-duplex base station.
    """

    p_u_dbm: float = 23.0
    p_b_dbm: float = 26.0
    p_m_dbm: float = 43.0
    beta: float = 4.0
    phi_db: float = 1e-8
    sigma2_dbm_hz: float = -174.0
    bandwidth_hz: float = 1.0
    zeta: float = 0.01
    zeta_bar: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 2:
            raise ParameterError(f"path-loss exponent beta must be > 2, got {self.beta!r}")
        if not 0 <= self.zeta <= 1:
            raise ParameterError(f"zeta must lie in [0, 1], got {self.zeta!r}")
        for name in ("p_u_dbm", "p_b_dbm", "p_m_dbm", "phi_db", "sigma2_dbm_hz"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.bandwidth_hz <= 0:
            raise ParameterError("bandwidth_hz must be > 0")
        if self.zeta_bar is not None and self.zeta_bar < 0:
            raise ParameterError("zeta_bar must be >= 0")

    @property
    def p_u(self):
        return float(dbm_to_watt(self.p_u_dbm))

    @property
    def p_b(self):
        return float(dbm_to_watt(self.p_b_dbm))

    @property
    def p_m(self):
        return float(dbm_to_watt(self.p_m_dbm))

    @property
    def phi(self):
        return float(db_to_linear(self.phi_db))

    @property
    def sigma2(self):
        return float(dbm_to_watt(self.sigma2_dbm_hz)) * self.bandwidth_hz

    @property
    def self_interference(self):
        return self.zeta * self.p_b if self.zeta_bar is None else float(self.zeta_bar)

    def with_phi_linear(self, phi):
        """Copy with the threshold given in linear units."""
        return _replace(self, phi_db=10.0 * math.log10(phi))


def _replace(obj, **changes):
    values = {f.name: getattr(obj, f.name) for f in fields(obj)}
    values.update(changes)
    return type(obj)(**values)


@dataclass(frozen=True)
class SuccessProbs:
    """Per-link success probabilities; content independent."""

    p_s_d2d: float
    p_s_tagged_sbs: float
    p_s_neighbor_sbs: float
    p_s_mbs_via_sbs: float
    p_s_mbs_direct: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (0.0 <= value <= 1.0):
                raise ParameterError(f"{f.name} must lie in [0, 1], got {value!r}")

    @classmethod
    def constant(cls, p):
        return cls(p, p, p, p, p)

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)])

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def sinc_norm(x):
    """Normalized sinc, ``sin(pi x) / (pi x)`` with value 1 at 0."""
    return float(np.sinc(x))


def _quad(func, a, b, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(
                func, a, b, epsabs=_QUAD_EPSABS, epsrel=_QUAD_EPSREL, limit=200, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"quadrature did not converge on [{a}, {b}]: {exc}") from exc
    if not np.isfinite(value):
        raise NumericError(f"quadrature returned {value!r} on [{a}, {b}]")
    return value


def inner_exclusion_integral(phi, beta):
    """``int_{phi**(-2/beta)}^inf du / (1 + u**(beta/2))``.

    Mapped onto ``[0, 1)`` with ``u = a + t / (1 - t)`` before integrating.
    """
    if beta <= 2:
        raise ParameterError(f"beta must be > 2, got {beta!r}")
    a = phi ** (-2.0 / beta)
    half = beta / 2.0

    def integrand(t):
        s = 1.0 - t
        if s <= 0.0:
            # limit of (1-t)^(beta/2 - 2) as t -> 1; finite only for beta >= 4
            return 1.0 if half == 2.0 else (0.0 if half > 2.0 else np.inf)
        u = a + t / s
        return 1.0 / (s * s * (1.0 + u ** half))

    return _quad(integrand, 0.0, 1.0)


def _truncated_contact_integral(lam, R, coeff, beta, phi, zeta_bar):
    """``int_0^R f(r) exp(-coeff r^2) exp(-phi r^beta zeta_bar) dr``.

    ``f`` is the nearest-neighbour distance density of a PPP of intensity
    ``lam`` conditioned on the nearest point lying within ``R``.
    """
    norm = -math.expm1(-math.pi * lam * R * R)
    k = phi * zeta_bar

    def integrand(r):
        r2 = r * r
        return 2.0 * math.pi * lam * r * math.exp(-(math.pi * lam + coeff) * r2 - k * r ** beta) / norm

    points = None
    if k > 0:
        # self-interference confines the mass to r below this scale
        scale = k ** (-1.0 / beta)
        if scale < R:
            points = [scale, min(4.0 * scale, 0.5 * (scale + R))]
    return _quad(integrand, 0.0, R, points=points)


def _checked(name, value):
    if not (-_DOMAIN_SLACK <= value <= 1.0 + _DOMAIN_SLACK) or not np.isfinite(value):
        raise ModelDomainError(
            f"{name} = {value!r} lies outside [0, 1]; the approximation breaks down here"
        )
    return min(max(value, 0.0), 1.0)


def closed_form_success(params, net):
    """Closed-form success probability of every link type.

    Parameters
    ----------
    params : PhyParams
    net : NetworkParams
        Supplies intensities, radii and the requester fraction ``alpha``.

    Returns
    -------
    SuccessProbs

    Raises
    ------
    ModelDomainError
        If any probability falls outside ``[0, 1]``.
    NumericError
        If a quadrature fails to converge.
    """
    beta = params.beta
    if beta <= 2:
        raise ParameterError(f"beta must be > 2, got {beta!r}")
    delta = 2.0 / beta
    sinc = sinc_norm(delta)
    if sinc <= 0:
        raise ParameterError(f"sinc(2/beta) = {sinc} is not positive")
    phi = params.phi
    p_u, p_b, p_m = params.p_u, params.p_b, params.p_m
    lam_u, lam_b, lam_m = net.lambda_u, net.lambda_b, net.lambda_m
    alpha = net.alpha
    R_u, R_b, R_m = net.R_u, net.R_b, net.R_m
    phi_d = phi ** delta

    # D2D: server is the nearest non-requesting user within R_u
    lam_idle = (1.0 - alpha) * lam_u
    if lam_idle > 0:
        A = lam_idle / -math.expm1(-math.pi * lam_idle * R_u ** 2)
    else:
        A = 0.0
    B = (
        lam_u * ((1.0 - alpha) + alpha * phi_d / sinc)
        + lam_b * (phi * p_b / p_u) ** delta / sinc
        + lam_m * (phi * p_m / p_u) ** delta / sinc
    )
    p_d2d = A / B * -math.expm1(-math.pi * R_u ** 2 * B)

    # tagged sBS: nearest sBS within R_b; other sBSs lie farther away
    A1 = lam_b / -math.expm1(-math.pi * lam_b * R_b ** 2)
    B1 = (
        lam_b * (1.0 + 2.0 * phi_d * inner_exclusion_integral(phi, beta))
        + alpha * lam_u * (phi * p_u / p_b) ** delta / sinc
        + lam_m * (phi * p_m / p_b) ** delta / sinc
    )
    p_tagged = A1 / B1 * -math.expm1(-math.pi * R_b ** 2 * B1)

    # MBS straight to a user without sBS coverage
    A2 = lam_m / -math.expm1(-math.pi * lam_m * R_m ** 2)
    B2 = lam_m * (1.0 + phi_d / sinc) + alpha * lam_u * (phi * p_u / p_m) ** delta / sinc
    p_direct = A2 / B2 * -math.expm1(-math.pi * R_m ** 2 * B2)

    zeta_bar = params.self_interference
    coeff_b = math.pi * (
        alpha * lam_u * (phi * p_u / p_b) ** delta
        + lam_b * phi_d
        + lam_m * (phi * p_m / p_b) ** delta
    ) / sinc
    coeff_m = math.pi * (
        alpha * lam_u * (phi * p_u / p_m) ** delta
        + lam_b * (phi * p_b / p_m) ** delta
        + lam_m * phi_d
    ) / sinc
    hop_b = _truncated_contact_integral(lam_b, R_b, coeff_b, beta, phi, zeta_bar)
    hop_m = _truncated_contact_integral(lam_m, R_m, coeff_m, beta, phi, zeta_bar)
    p_neighbor = hop_b * p_tagged
    p_via = hop_m * p_tagged

    return SuccessProbs(
        p_s_d2d=_checked("p_s_d2d", p_d2d),
        p_s_tagged_sbs=_checked("p_s_tagged_sbs", p_tagged),
        p_s_neighbor_sbs=_checked("p_s_neighbor_sbs", p_neighbor),
        p_s_mbs_via_sbs=_checked("p_s_mbs_via_sbs", p_via),
        p_s_mbs_direct=_checked("p_s_mbs_direct", p_direct),
    )


# ---------------------------------------------------------------------------
# Monte Carlo oracle


@dataclass(frozen=True)
class _Tier:
    intensity: float
    power: float


def _disc_points(rng, intensity, radius, n_trials):
    """PPP in a disc around the origin for each trial: (trial index, distance)."""
    counts = rng.poisson(intensity * math.pi * radius * radius, size=n_trials)
    owner = np.repeat(np.arange(n_trials), counts)
    dist = radius * np.sqrt(rng.random(owner.size))
    return owner, dist


def _interference(rng, tiers, radius, n_trials, beta, activity):
    total = np.zeros(n_trials)
    for tier, act in zip(tiers, activity):
        if tier.intensity <= 0:
            continue
        owner, dist = _disc_points(rng, tier.intensity * act, radius, n_trials)
        if owner.size:
            power = tier.power * rng.exponential(size=owner.size) * np.maximum(dist, 1e-3) ** (-beta)
            total += np.bincount(owner, weights=power, minlength=n_trials)
    return total


def _hop(rng, n, *, serving, serving_R, serving_interferes, others, beta, phi, noise,
         self_interference, radius, activity):
    """Simulate ``n`` receptions at the origin conditioned on a server in range.

    The server is the nearest point of the ``serving`` tier. Returns a boolean
    success array of length ``n``.
    """
    out = []
    need = n
    while need > 0:
        # expected acceptance is 1 - exp(-lam pi R^2); oversample accordingly
        accept = -math.expm1(-serving.intensity * math.pi * serving_R ** 2)
        batch = int(min(max(need / max(accept, 1e-6) * 1.1, 64), 200_000))
        owner, dist = _disc_points(rng, serving.intensity, radius, batch)
        dmin = np.full(batch, np.inf)
        np.minimum.at(dmin, owner, dist)
        ok = dmin <= serving_R
        keep = np.flatnonzero(ok)[:need]
        if keep.size == 0:
            continue
        m = keep.size
        remap = np.full(batch, -1)
        remap[keep] = np.arange(m)
        signal = serving.power * rng.exponential(size=m) * dmin[keep] ** (-beta)
        interference = np.zeros(m)
        if serving_interferes:
            sel = (remap[owner] >= 0) & (dist > dmin[owner])
            if activity[0] < 1.0:
                sel &= rng.random(sel.size) < activity[0]
            idx = remap[owner[sel]]
            power = serving.power * rng.exponential(size=idx.size) * dist[sel] ** (-beta)
            interference += np.bincount(idx, weights=power, minlength=m)
        interference += _interference(rng, others, radius, m, beta, activity[1:])
        if self_interference > 0:
            interference += rng.exponential(size=m) * self_interference
        out.append(signal >= phi * (noise + interference))
        need -= m
    return np.concatenate(out)


def mc_success_oracle(link, params, net, trials, rng, activity=1.0, radius_factor=10.0):
    """Empirical ``Pr[SINR >= phi]`` for one link type.

    Each trial places the receiver at the origin, draws every tier as a PPP
    in a disc of radius ``radius_factor`` times the serving radius, picks the
    nearest in-range node of the serving tier (trials without one are
    redrawn) and draws unit-mean exponential fading on every link.

    Parameters
    ----------
    link : str
        One of :data:`LINKS`.
    activity : float
        Probability that an interfering base station is active.
    """
    if link not in LINKS:
        raise ParameterError(f"unknown link {link!r}; expected one of {LINKS}")
    if int(trials) != trials or trials < 1:
        raise ParameterError(f"trials must be a positive integer, got {trials!r}")
    if not 0 <= activity <= 1:
        raise ParameterError("activity must lie in [0, 1]")
    trials = int(trials)
    beta, phi, noise = params.beta, params.phi, params.sigma2
    p_u, p_b, p_m = params.p_u, params.p_b, params.p_m
    active_users = net.alpha * net.lambda_u
    users = lambda p: _Tier(active_users, p)  # noqa: E731
    common = dict(beta=beta, phi=phi, noise=noise)
    si = params.self_interference

    def tagged(n):
        return _hop(
            rng, n,
            serving=_Tier(net.lambda_b, p_b), serving_R=net.R_b, serving_interferes=True,
            others=[users(p_u), _Tier(net.lambda_m, p_m)],
            self_interference=0.0, radius=radius_factor * net.R_b,
            activity=(activity, 1.0, activity), **common,
        )

    if link == "d2d":
        ok = _hop(
            rng, trials,
            serving=_Tier((1.0 - net.alpha) * net.lambda_u, p_u), serving_R=net.R_u,
            serving_interferes=False,
            others=[users(p_u), _Tier(net.lambda_b, p_b), _Tier(net.lambda_m, p_m)],
            self_interference=0.0, radius=radius_factor * net.R_u,
            activity=(1.0, 1.0, activity, activity), **common,
        )
    elif link == "tagged_sbs":
        ok = tagged(trials)
    elif link == "mbs_direct":
        ok = _hop(
            rng, trials,
            serving=_Tier(net.lambda_m, p_m), serving_R=net.R_m, serving_interferes=True,
            others=[users(p_u)],
            self_interference=0.0, radius=radius_factor * net.R_m,
            activity=(activity, 1.0), **common,
        )
    elif link == "neighbor_sbs":
        second = _hop(
            rng, trials,
            serving=_Tier(net.lambda_b, p_b), serving_R=net.R_b, serving_interferes=True,
            others=[users(p_u), _Tier(net.lambda_m, p_m)],
            self_interference=si, radius=radius_factor * net.R_b,
            activity=(activity, 1.0, activity), **common,
        )
        ok = second & tagged(trials)
    else:  # mbs_via_sbs
        second = _hop(
            rng, trials,
            serving=_Tier(net.lambda_m, p_m), serving_R=net.R_m, serving_interferes=True,
            others=[users(p_u), _Tier(net.lambda_b, p_b)],
            self_interference=si, radius=radius_factor * net.R_m,
            activity=(activity, 1.0, activity), **common,
        )
        ok = second & tagged(trials)
    return float(np.mean(ok))
