"""Run configuration: thresholds for geometry, flow rules and canyon shape."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from typing import Optional

from .flow import FlowRuleConfig
from .geometry import GeoConfig
from .ontology import ShapeThresholds

ENV_VAR = "AIRCANYON_CONFIG"

_SECTIONS = {"geometry": GeoConfig, "flow": FlowRuleConfig, "shape": ShapeThresholds}


class ConfigError(ValueError):
    pass


def default_albedo_table() -> dict[str, float]:
    doc = json.loads(resources.files("aircanyon").joinpath("data/albedo.json").read_text())
    return {k: float(v) for k, v in doc["albedo"].items()}


def read_albedo_table(path: str) -> dict[str, float]:
    with open(path) as fh:
        doc = json.load(fh)
    table = doc.get("albedo", doc)
    out = {}
    for k, v in table.items():
        if not isinstance(v, (int, float)) or not 0 <= v <= 1:
            raise ConfigError(f"albedo for {k!r} must be a number in [0, 1]")
        out[str(k)] = float(v)
    return out


@dataclass(frozen=True)
class RunConfig:
    geometry: GeoConfig = GeoConfig()
    flow: FlowRuleConfig = FlowRuleConfig()
    shape: ShapeThresholds = ShapeThresholds()
    albedo_table_path: Optional[str] = None
    albedo_table: dict = field(default_factory=default_albedo_table, compare=False)
    inventory_out: Optional[str] = None
    report_out: Optional[str] = None

    def snapshot(self) -> dict:
        return {
            "geometry": asdict(self.geometry),
            "flow": asdict(self.flow),
            "shape": asdict(self.shape),
            "albedo_table_path": self.albedo_table_path,
            "albedo_table": dict(sorted(self.albedo_table.items())),
        }


def _section_of(key: str) -> Optional[str]:
    for name, cls in _SECTIONS.items():
        if key in {f.name for f in fields(cls)}:
            return name
    return None


def load_config(path: Optional[str] = None) -> RunConfig:
    """Load a JSON run configuration, filling absent keys with defaults.

    Keys may be nested under ``geometry``/``flow``/``shape`` or given flat.
    Without ``path`` the ``AIRCANYON_CONFIG`` environment variable is tried;
    failing both, every default applies.
    """
    path = path or os.environ.get(ENV_VAR) or None
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")

    values: dict[str, dict] = {name: {} for name in _SECTIONS}
    albedo_path = None
    outputs: dict = {}
    for key, val in doc.items():
        if key in _SECTIONS:
            if not isinstance(val, dict):
                raise ConfigError(f"section {key!r} must be an object")
            known = {f.name for f in fields(_SECTIONS[key])}
            for k, v in val.items():
                if k not in known:
                    raise ConfigError(f"unknown key {key}.{k}")
                values[key][k] = v
        elif key == "albedo_table":
            albedo_path = val
        elif key == "output":
            if not isinstance(val, dict) or set(val) - {"inventory", "report"}:
                raise ConfigError("output accepts only 'inventory' and 'report'")
            outputs = val
        elif _section_of(key):
            values[_section_of(key)][key] = val
        else:
            raise ConfigError(f"unknown config key {key!r}")

    try:
        sections = {name: _SECTIONS[name](**kw) for name, kw in values.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    table = default_albedo_table()
    if albedo_path is not None:
        if not os.path.isabs(albedo_path):
            albedo_path = os.path.join(os.path.dirname(os.path.abspath(path)), albedo_path)
        if not os.path.isfile(albedo_path):
            raise ConfigError(f"albedo table not found: {albedo_path}")
        try:
            table = read_albedo_table(albedo_path)
        except (OSError, json.JSONDecodeError, AttributeError) as exc:
            raise ConfigError(f"bad albedo table {albedo_path}: {exc}") from None
    return RunConfig(sections["geometry"], sections["flow"], sections["shape"],
                     albedo_path, table, outputs.get("inventory"), outputs.get("report"))


def config_from_snapshot(snap: dict) -> RunConfig:
    """Rebuild the configuration embedded in an output document."""
    try:
        sections = {name: cls(**snap.get(name, {})) for name, cls in _SECTIONS.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad embedded config: {exc}") from None
    table = snap.get("albedo_table") or default_albedo_table()
    return RunConfig(sections["geometry"], sections["flow"], sections["shape"],
                     snap.get("albedo_table_path"), dict(table))
