"""Air-quality ontology: street-canyon concepts as closed-enum value types.

Enum values are the exact tokens written to the inventory and report JSON.
Instances may be built from raw strings (as when read back from JSON);
:func:`validate_instance` reports anything outside the closed vocabularies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Optional

from .citygml import CityModel


class Token(str, Enum):
    def __str__(self) -> str:
        return self.value


class CanyonShape(Token):
    WIDE = "wide"
    SQUARE = "square"
    NARROW = "narrow"


class Level(Token):
    STREET = "street-level"
    BUILDING = "building-level"
    ROOF = "roof-level"


class Side(Token):
    BUILDINGS_1 = "buildings_1"
    BUILDINGS_2 = "buildings_2"

    @property
    def other(self) -> "Side":
        return Side.BUILDINGS_2 if self is Side.BUILDINGS_1 else Side.BUILDINGS_1


class SourceOrigin(Token):
    TRAFFIC = "traffic-related"
    CHEMICAL = "chemical toxics"
    BIOLOGICAL = "biological toxics"


class Reactivity(Token):
    REACTIVE = "reactive"
    NON_REACTIVE = "non-reactive"


class SourceLocation(Token):
    STREET_LEVEL = "street-level"
    ADVECTED = "advected"


class EmissionRate(Token):
    CONTINUOUS = "continuous"
    NON_CONTINUOUS = "non-continuous"


class FlowRegime(Token):
    ISOLATED_ROUGHNESS = "isolated-roughness"
    WAKE_INTERFERENCE = "wake-interference"
    SKIMMING = "skimming"


class VortexIntensity(Token):
    WEAK = "weak"
    STRONG = "strong"


class Rotation(Token):
    CLOCKWISE = "clockwise"
    COUNTER_CLOCKWISE = "counter-clockwise"


class VortexOrigin(Token):
    MECHANICAL = "mechanically induced"
    THERMAL = "thermally induced"


class VortexShape(Token):
    PORTAL = "portal"
    ROLL = "roll-type"
    HORSESHOE = "horseshoe"


ENUMS = (CanyonShape, Level, SourceOrigin, Reactivity, SourceLocation, EmissionRate,
         FlowRegime, VortexIntensity, Rotation, VortexOrigin, VortexShape)


@dataclass(frozen=True)
class ShapeThresholds:
    """H/W below ``wide_max`` is wide, above ``narrow_min`` is narrow."""

    wide_max: float = 0.5
    narrow_min: float = 1.5

    def __post_init__(self):
        if not (0 < self.wide_max <= self.narrow_min and math.isfinite(self.narrow_min)):
            raise ValueError(f"need 0 < wide_max <= narrow_min, got {self}")


def classify_canyon_shape(hw_ratio: float, thresholds: ShapeThresholds = ShapeThresholds()) -> CanyonShape:
    if not (hw_ratio > 0 and math.isfinite(hw_ratio)):
        raise ValueError(f"height-to-width ratio must be positive, got {hw_ratio}")
    if hw_ratio < thresholds.wide_max:
        return CanyonShape.WIDE
    if hw_ratio <= thresholds.narrow_min:
        return CanyonShape.SQUARE
    return CanyonShape.NARROW


# --------------------------------------------------------------------------
# concepts


@dataclass(frozen=True)
class AqStreet:
    location: tuple[float, float]
    width: float
    orientation: float
    albedo: float


@dataclass(frozen=True)
class AqBuilding:
    location: tuple[float, float]
    height: float
    roof_slope: Optional[float]
    albedo: float


@dataclass(frozen=True)
class AqStreetCanyon:
    shape: CanyonShape
    height_to_width_ratio: float
    height_to_height_ratio: float
    orientation: float
    leeward_side: Optional[Side] = None
    windward_side: Optional[Side] = None
    level: Optional[Level] = None


@dataclass(frozen=True)
class AmbientWindConditions:
    speed: float
    direction_from: float
    turbulence_intensity: Optional[float] = None


@dataclass(frozen=True)
class ThermalConditions:
    sunshine_duration: Optional[float] = None
    t_air: Optional[float] = None
    t_street_bottom: Optional[float] = None
    t_leeward_wall: Optional[float] = None
    t_windward_wall: Optional[float] = None


@dataclass(frozen=True)
class MeteorologicalConditions:
    wind: AmbientWindConditions
    thermal: Optional[ThermalConditions] = None


@dataclass(frozen=True)
class Isosurface:
    value_range: tuple[float, float]
    geometry: Optional[str] = None  # id of a surface-bearing object in the CityModel


@dataclass(frozen=True)
class ScalarField:
    isosurfaces: tuple[Isosurface, ...] = ()


@dataclass(frozen=True)
class VectorField:
    """Marker base; numeric field values are never materialized."""


@dataclass(frozen=True)
class PollutantDispersionDistribution(ScalarField):
    source: Optional["PollutantSource"] = None


@dataclass(frozen=True)
class PollutantSource:
    emitted_product: str
    origin: SourceOrigin
    reactivity: Reactivity
    source_location: SourceLocation
    emission_rate: EmissionRate
    dispersion: Optional[PollutantDispersionDistribution] = None


@dataclass(frozen=True)
class Vortex(VectorField):
    intensity: VortexIntensity = VortexIntensity.WEAK
    rotation_direction: Rotation = Rotation.CLOCKWISE
    location: Level = Level.BUILDING
    origin: VortexOrigin = VortexOrigin.MECHANICAL
    shape: Optional[VortexShape] = None


@dataclass(frozen=True)
class Flow(VectorField):
    regime: FlowRegime = FlowRegime.ISOLATED_ROUGHNESS
    vortices: tuple[Vortex, ...] = field(default=())


# --------------------------------------------------------------------------
# validation

_ENUM_FIELDS: dict[type, dict[str, type]] = {
    AqStreetCanyon: {"shape": CanyonShape, "leeward_side": Side, "windward_side": Side, "level": Level},
    PollutantSource: {"origin": SourceOrigin, "reactivity": Reactivity,
                      "source_location": SourceLocation, "emission_rate": EmissionRate},
    Vortex: {"intensity": VortexIntensity, "rotation_direction": Rotation, "location": Level,
             "origin": VortexOrigin, "shape": VortexShape},
    Flow: {"regime": FlowRegime},
}
_OPTIONAL_ENUMS = {"leeward_side", "windward_side", "level", "shape"}


def _in_enum(value: Any, enum: type) -> bool:
    if isinstance(value, enum):
        return True
    return isinstance(value, str) and value in {m.value for m in enum}


def _positive(v) -> bool:
    return isinstance(v, (int, float)) and math.isfinite(v) and v > 0


def validate_instance(obj: Any, model: Optional[CityModel] = None, path: str = "") -> list[str]:
    """All enum and invariant violations of an ontology instance.

    When ``model`` is given, isosurface geometry references must resolve to
    an object in it.
    """
    name = path or type(obj).__name__
    out: list[str] = []
    for fname, enum in _ENUM_FIELDS.get(type(obj), {}).items():
        v = getattr(obj, fname)
        if v is None and fname in _OPTIONAL_ENUMS and not (type(obj) is AqStreetCanyon and fname == "shape"):
            continue
        if not _in_enum(v, enum):
            out.append(f"{name}.{fname}: {v!r} is not one of {[m.value for m in enum]}")

    if isinstance(obj, AqStreet):
        if not _positive(obj.width):
            out.append(f"{name}.width must be > 0")
        if not (0 <= obj.albedo <= 1):
            out.append(f"{name}.albedo must be in [0, 1]")
        if not (0 <= obj.orientation < 180):
            out.append(f"{name}.orientation must be in [0, 180)")
    elif isinstance(obj, AqBuilding):
        if not _positive(obj.height):
            out.append(f"{name}.height must be > 0")
        if not (0 <= obj.albedo <= 1):
            out.append(f"{name}.albedo must be in [0, 1]")
        if obj.roof_slope is not None and not (0 <= obj.roof_slope <= 90):
            out.append(f"{name}.roof_slope must be in [0, 90]")
    elif isinstance(obj, AqStreetCanyon):
        for r in ("height_to_width_ratio", "height_to_height_ratio"):
            if not _positive(getattr(obj, r)):
                out.append(f"{name}.{r} must be > 0")
        if not (0 <= obj.orientation < 180):
            out.append(f"{name}.orientation must be in [0, 180)")
        if (obj.leeward_side is None) != (obj.windward_side is None):
            out.append(f"{name}: leeward and windward sides must be set together")
        elif obj.leeward_side is not None and obj.leeward_side == obj.windward_side:
            out.append(f"{name}: leeward and windward sides must differ")
    elif isinstance(obj, AmbientWindConditions):
        if not (obj.speed >= 0):
            out.append(f"{name}.speed must be >= 0")
        if not (0 <= obj.direction_from < 360):
            out.append(f"{name}.direction_from must be in [0, 360)")
        if obj.turbulence_intensity is not None and not (obj.turbulence_intensity >= 0):
            out.append(f"{name}.turbulence_intensity must be >= 0")
    elif isinstance(obj, ThermalConditions):
        for f in fields(obj):
            v = getattr(obj, f.name)
            if f.name.startswith("t_") and v is not None and not _positive(v):
                out.append(f"{name}.{f.name} must be > 0 K")
        if obj.sunshine_duration is not None and not (obj.sunshine_duration >= 0):
            out.append(f"{name}.sunshine_duration must be >= 0")
    elif isinstance(obj, MeteorologicalConditions):
        out += validate_instance(obj.wind, model, f"{name}.wind")
        if obj.thermal is not None:
            out += validate_instance(obj.thermal, model, f"{name}.thermal")
    elif isinstance(obj, PollutantSource):
        if obj.dispersion is not None:
            out += validate_instance(obj.dispersion, model, f"{name}.dispersion")
    elif isinstance(obj, Flow):
        for i, v in enumerate(obj.vortices):
            out += validate_instance(v, model, f"{name}.vortices[{i}]")
    if isinstance(obj, ScalarField):
        for i, iso in enumerate(obj.isosurfaces):
            out += validate_instance(iso, model, f"{name}.isosurfaces[{i}]")
    if isinstance(obj, Isosurface):
        lo, hi = obj.value_range
        if not lo <= hi:
            out.append(f"{name}.value_range min exceeds max")
        if obj.geometry is not None and model is not None:
            known = {b.id for b in model.buildings} | {s.id for s in model.streets}
            if obj.geometry not in known:
                out.append(f"{name}.geometry: {obj.geometry!r} does not resolve in the city model")
    return out

