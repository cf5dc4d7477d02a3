"""Orbit catalog: named reference orbits and spacecraft shipped in-repo."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .dynamics import ReferenceOrbit, SystemParams
from .errors import ConfigError


@dataclass(frozen=True)
class OrbitCatalogEntry:
    """One catalog row; all values in canonical units."""

    name: str
    mu_star: float
    initial_state: tuple
    period: float
    provenance: str = ""

    def __post_init__(self):
        state = tuple(float(v) for v in self.initial_state)
        if len(state) != 6:
            raise ConfigError(f"orbit '{self.name}': initial_state needs 6 values")
        object.__setattr__(self, "initial_state", state)

    def to_orbit(self) -> ReferenceOrbit:
        try:
            params = SystemParams(mu_star=self.mu_star, label=self.name)
            return ReferenceOrbit(params=params,
                                  initial_state=list(self.initial_state),
                                  period=self.period, name=self.name)
        except ValueError as exc:
            raise ConfigError(f"orbit '{self.name}': {exc}") from exc


@dataclass(frozen=True)
class SpacecraftEntry:
    """Representative spacecraft for thrust-to-energy conversion."""

    name: str
    mass_kg: float
    thrust_n: float
    u_max_m_s2: float
    note: str = ""


def default_catalog_path() -> Path:
    return Path(resources.files("haloreach") / "data" / "orbits.json")


def load_catalog(path=None):
    """Load the catalog; returns (orbits dict, spacecraft dict) by name."""
    path = Path(path) if path is not None else default_catalog_path()
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read orbit catalog {path}: {exc}") from exc
    orbits = {}
    for row in raw.get("orbits", []):
        try:
            entry = OrbitCatalogEntry(**row)
        except TypeError as exc:
            raise ConfigError(f"malformed catalog row in {path}: {exc}") from exc
        orbits[entry.name] = entry
    craft = {}
    for row in raw.get("spacecraft", []):
        try:
            entry = SpacecraftEntry(**row)
        except TypeError as exc:
            raise ConfigError(f"malformed spacecraft row in {path}: {exc}") from exc
        craft[entry.name] = entry
    return orbits, craft


def save_catalog(orbits, spacecraft, path):
    """Write a catalog file that round-trips every float exactly."""
    payload = {
        "orbits": [asdict(entry) for entry in orbits],
        "spacecraft": [asdict(entry) for entry in spacecraft],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def get_orbit_entry(name, path=None) -> OrbitCatalogEntry:
    orbits, _ = load_catalog(path)
    if name not in orbits:
        known = ", ".join(sorted(orbits)) or "<none>"
        raise ConfigError(f"unknown orbit '{name}' (catalog has: {known})")
    return orbits[name]
