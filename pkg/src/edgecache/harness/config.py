"""Experiment specifications, the built-in preset and the INI config format.

A config file has one flat section per component::

    [experiment]
    preset = paper-sec5
    schemes = mpso, random, equal
    seeds = 0-19

    [catalog]
    F = 30

    [sweep]
    param = F
    values = 10, 30, 50

Any key left out keeps the preset's value.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..content import CatalogParams
from ..errors import ParameterError
from ..optimizer import PsoConfig
from ..phy import PhyParams
from ..topology import NetworkParams

__all__ = [
    "Capacities",
    "Sweep",
    "ExperimentSpec",
    "SCHEMES",
    "SWEEP_PARAMS",
    "PRESETS",
    "preset",
    "load_config",
    "parse_config",
    "dump_config",
    "default_seed",
]

SCHEMES = ("mpso", "random", "equal")
SWEEP_PARAMS = ("F", "alpha", "cd", "cb", "cm")
SEED_ENV = "EDGECACHE_SEED"


@dataclass(frozen=True)
class Capacities:
    """Cache sizes in contents for users, sBSs and MBSs."""

    C_d: int = 2
    C_b: int = 4
    C_m: int = 8

    def __post_init__(self):
        for name in ("C_d", "C_b", "C_m"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ParameterError(f"{name} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True)
class Sweep:
    """One swept parameter with its values and optional per-point iteration budget."""

    param: str
    values: tuple
    iters: tuple | None = None

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ParameterError(f"sweep param must be one of {SWEEP_PARAMS}, got {self.param!r}")
        if not self.values:
            raise ParameterError("sweep needs at least one value")
        if self.iters is not None and len(self.iters) != len(self.values):
            raise ParameterError("iters must list one budget per sweep value")
        for v in self.values:
            if self.param == "alpha":
                if not 0 <= v <= 1:
                    raise ParameterError(f"alpha sweep value {v} outside [0, 1]")
            elif int(v) != v or v < 1:
                raise ParameterError(f"{self.param} sweep value {v!r} must be a positive integer")


@dataclass(frozen=True)
class ExperimentSpec:
    network: NetworkParams = field(default_factory=NetworkParams)
    catalog: CatalogParams = field(default_factory=CatalogParams)
    phy: PhyParams = field(default_factory=PhyParams)
    capacities: Capacities = field(default_factory=Capacities)
    pso: PsoConfig = field(default_factory=PsoConfig)
    schemes: tuple = SCHEMES
    seeds: tuple = tuple(range(20))
    sweep: Sweep | None = None
    name: str = "custom"

    def __post_init__(self):
        if not self.seeds:
            raise ParameterError("at least one seed is required")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise ParameterError(f"schemes must be a non-empty subset of {SCHEMES}, got {self.schemes}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def points(self):
        """``(sweep_param, sweep_value, spec_at_point)`` for every sweep point."""
        if self.sweep is None:
            return [("", "", self)]
        out = []
        for i, value in enumerate(self.sweep.values):
            spec = _apply(self, self.sweep.param, value)
            if self.sweep.iters is not None:
                spec = spec.replace(pso=dataclasses.replace(spec.pso, max_iters=int(self.sweep.iters[i])))
            out.append((self.sweep.param, value, spec))
        return out


def _apply(spec, param, value):
    if param == "F":
        return spec.replace(catalog=dataclasses.replace(spec.catalog, F=int(value)))
    if param == "alpha":
        return spec.replace(network=dataclasses.replace(spec.network, alpha=float(value)))
    key = {"cd": "C_d", "cb": "C_b", "cm": "C_m"}[param]
    return spec.replace(capacities=dataclasses.replace(spec.capacities, **{key: int(value)}))


PRESETS = {
    "paper-sec5": ExperimentSpec(
        network=NetworkParams(
            lambda_u=1e-4, lambda_b=1e-5, lambda_m=1.5e-7,
            R_u=15.0, R_b=150.0, R_m=500.0, alpha=0.2, region_side=2000.0,
        ),
        catalog=CatalogParams(F=30, gamma_min=0.1, gamma_max=2.5),
        phy=PhyParams(
            p_u_dbm=23.0, p_b_dbm=26.0, p_m_dbm=43.0, beta=4.0,
            phi_db=1e-8, sigma2_dbm_hz=-174.0, zeta=0.01,
        ),
        capacities=Capacities(C_d=2, C_b=4, C_m=8),
        pso=PsoConfig(n_particles=20, a=0.9, psi1=0.4, psi2=0.4, max_iters=100, seed=0),
        schemes=SCHEMES,
        seeds=tuple(range(20)),
        name="paper-sec5",
    ),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def default_seed():
    """Seed from ``$EDGECACHE_SEED`` (default 0)."""
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _parse_list(text, cast):
    items = [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]
    out = []
    for item in items:
        if cast is int and "-" in item[1:]:
            # inclusive range of non-negative seeds, e.g. 0-19
            lo, hi = item.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(cast(item))
    return tuple(out)


def _coerce(template, key, text):
    current = getattr(template, key)
    if isinstance(current, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(text)
    if isinstance(current, float):
        return float(text)
    if current is None:
        if text.strip().lower() in ("", "none"):
            return None
        try:
            return int(text)
        except ValueError:
            return float(text)
    return type(current)(text)


def _update(obj, section, name):
    known = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, text in section.items():
        if key not in known:
            raise ParameterError(f"[{name}] unknown key {key!r}; expected one of {sorted(known)}")
        changes[key] = _coerce(obj, key, text)
    return dataclasses.replace(obj, **changes) if changes else obj


def parse_config(text, source="<string>"):
    """Build an :class:`ExperimentSpec` from INI text."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ParameterError(f"{source}: {exc}") from exc
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    spec = preset(exp.get("preset", "paper-sec5"))
    spec = spec.replace(
        network=_update(spec.network, parser["network"], "network") if parser.has_section("network") else spec.network,
        catalog=_update(spec.catalog, parser["catalog"], "catalog") if parser.has_section("catalog") else spec.catalog,
        phy=_update(spec.phy, parser["phy"], "phy") if parser.has_section("phy") else spec.phy,
        capacities=_update(spec.capacities, parser["capacity"], "capacity")
        if parser.has_section("capacity") else spec.capacities,
        pso=_update(spec.pso, parser["pso"], "pso") if parser.has_section("pso") else spec.pso,
    )
    if "schemes" in exp:
        spec = spec.replace(schemes=_parse_list(exp["schemes"], str))
    if "seeds" in exp:
        spec = spec.replace(seeds=_parse_list(exp["seeds"], int))
    if "name" in exp:
        spec = spec.replace(name=exp["name"])
    if parser.has_section("sweep"):
        sw = parser["sweep"]
        param = sw.get("param")
        cast = float if param == "alpha" else int
        iters = _parse_list(sw["iters"], int) if sw.get("iters") else None
        spec = spec.replace(sweep=Sweep(param, _parse_list(sw.get("values", ""), cast), iters))
    return spec


def load_config(source):
    """Load a config file, or a preset when ``source`` names one."""
    if str(source) in PRESETS:
        return PRESETS[str(source)]
    path = Path(source)
    if not path.is_file():
        raise ParameterError(f"{source!r} is neither a config file nor a preset name")
    return parse_config(path.read_text(), source=path)


def dump_config(spec):
    """Serialize ``spec`` to INI text that :func:`parse_config` reads back."""
    lines = ["[experiment]", f"name = {spec.name}",
             f"schemes = {', '.join(spec.schemes)}",
             f"seeds = {', '.join(str(s) for s in spec.seeds)}", ""]
    for title, obj in (("network", spec.network), ("catalog", spec.catalog), ("phy", spec.phy),
                       ("capacity", spec.capacities), ("pso", spec.pso)):
        lines.append(f"[{title}]")
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            lines.append(f"{f.name} = {'none' if value is None else value!r}".replace("'", ""))
        lines.append("")
    if spec.sweep is not None:
        lines += ["[sweep]", f"param = {spec.sweep.param}",
                  f"values = {', '.join(str(v) for v in spec.sweep.values)}"]
        if spec.sweep.iters is not None:
            lines.append(f"iters = {', '.join(str(v) for v in spec.sweep.iters)}")
        lines.append("")
    return "\n".join(lines)
