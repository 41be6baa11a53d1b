"""Mediation between the city model and the air-quality ontology.

Interconnection concepts bind a source street/building to its derived AQ
counterpart; a street canyon is materialized only for streets bordered on
both sides by continuously aligned building rows.  Every derived value keeps
a :class:`Provenance` record.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, is_dataclass, replace
from typing import Any, Callable, Mapping, Optional

from . import geometry as geo
from .citygml import CgBuilding, CgStreet, CityModel
from .geometry import GeoConfig, StreetAxis
from .ontology import (AqBuilding, AqStreet, AqStreetCanyon, Flow, Isosurface,
                       MeteorologicalConditions, ScalarField, ShapeThresholds,
                       classify_canyon_shape)

log = logging.getLogger(__name__)

SCFUS_HH_BOUNDS = (0.9, 1.1)
SCFUS_HW_BOUNDS = (1.9, 2.1)


def config_digest(*configs: Any) -> str:
    """Short stable hash of the configuration objects a value was derived under."""
    payload = [asdict(c) if is_dataclass(c) else c for c in configs]
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Provenance:
    operation: str
    sources: tuple[str, ...]
    config_digest: str = ""


@dataclass(frozen=True)
class OuppStreet:
    in_aq: AqStreet
    in_cg: CgStreet
    provenance: Mapping[str, Provenance] = field(default_factory=dict, compare=False)

    @property
    def id(self) -> str:
        return self.in_cg.id


@dataclass(frozen=True)
class OuppBuilding:
    in_aq: AqBuilding
    in_cg: CgBuilding
    provenance: Mapping[str, Provenance] = field(default_factory=dict, compare=False)

    @property
    def id(self) -> str:
        return self.in_cg.id


@dataclass(frozen=True)
class OuppStreetCanyon:
    id: str
    in_aq: AqStreetCanyon
    street: CgStreet
    buildings_1: tuple[CgBuilding, ...]
    buildings_2: tuple[CgBuilding, ...]
    axis: StreetAxis
    street_width: float
    provenance: Mapping[str, Provenance] = field(default_factory=dict, compare=False)

    def side(self, which) -> tuple[CgBuilding, ...]:
        return self.buildings_1 if str(which) == "buildings_1" else self.buildings_2

    def building_ids(self, which) -> list[str]:
        return [b.id for b in self.side(which)]


# --------------------------------------------------------------------------
# pattern 1: one-to-one derivations


def derive_aq_street(street: CgStreet, cfg: GeoConfig = GeoConfig(),
                     albedo_table: Mapping[str, float] = {}) -> OuppStreet:
    axis = geo.street_axis(street)
    digest = config_digest(cfg)
    src = (street.id,)
    aq = AqStreet(
        location=geo.street_centroid(street),
        width=geo.street_width(street, axis, cfg),
        orientation=axis.orientation_deg,
        albedo=geo.albedo(street, albedo_table),
    )
    prov = {
        "location": Provenance("street_centroid", src, digest),
        "width": Provenance("street_width", src, digest),
        "orientation": Provenance("street_axis", src, digest),
        "albedo": Provenance("albedo", src, digest),
    }
    return OuppStreet(aq, street, prov)


def derive_aq_building(building: CgBuilding, albedo_table: Mapping[str, float] = {}) -> OuppBuilding:
    slope = geo.roof_slope(building)
    src = (building.id,)
    aq = AqBuilding(
        location=geo.polygon_centroid(building.footprint),
        height=building.measured_height,
        roof_slope=slope,
        albedo=geo.albedo(building, albedo_table),
    )
    prov = {
        "location": Provenance("polygon_centroid", src),
        "height": Provenance("measured_height", src),
        "roof_slope": Provenance("roof_slope" if slope is not None else "roof_slope:absent(flat-roof assumed)", src),
        "albedo": Provenance("albedo", src),
    }
    return OuppBuilding(aq, building, prov)


# --------------------------------------------------------------------------
# pattern 2: canyons from sets of instances


def _canyon_ratios(b1, b2, width: float) -> tuple[float, float]:
    h1, h2 = geo.average_height(b1), geo.average_height(b2)
    return (h1 + h2) / 2 / width, h1 / h2


def make_canyon(street: CgStreet, side_1, side_2, cfg: GeoConfig = GeoConfig(),
                shapes: ShapeThresholds = ShapeThresholds(), axis: Optional[StreetAxis] = None,
                width: Optional[float] = None) -> OuppStreetCanyon:
    """Bind a street and its two building rows into a canyon with derived AQ properties."""
    axis = geo.street_axis(street) if axis is None else axis
    width = geo.street_width(street, axis, cfg) if width is None else width
    hw, hh = _canyon_ratios(side_1, side_2, width)
    digest = config_digest(cfg, shapes)
    ids_1 = tuple(b.id for b in side_1)
    ids_2 = tuple(b.id for b in side_2)
    every = (street.id, *ids_1, *ids_2)
    prov = {
        "buildings_1": Provenance("borders+split_sides", (street.id, *ids_1), digest),
        "buildings_2": Provenance("borders+split_sides", (street.id, *ids_2), digest),
        "height_to_width_ratio": Provenance("mean(average_height)/street_width", every, digest),
        "height_to_height_ratio": Provenance("average_height(buildings_1)/average_height(buildings_2)",
                                             (*ids_1, *ids_2), digest),
        "shape": Provenance("classify_canyon_shape", every, digest),
        "orientation": Provenance("street_axis", (street.id,), digest),
    }
    in_aq = AqStreetCanyon(shape=classify_canyon_shape(hw, shapes), height_to_width_ratio=hw,
                           height_to_height_ratio=hh, orientation=axis.orientation_deg)
    return OuppStreetCanyon(f"canyon-{street.id}", in_aq, street, tuple(side_1), tuple(side_2),
                            axis, width, prov)


def extract_street_canyons(model: CityModel, cfg: GeoConfig = GeoConfig(),
                           shapes: ShapeThresholds = ShapeThresholds()) -> list[OuppStreetCanyon]:
    """One canyon per street whose bordering buildings form two aligned rows.

    Streets are visited in id order, so the result is deterministic.
    """
    canyons = []
    for street in sorted(model.streets, key=lambda s: s.id):
        try:
            axis = geo.street_axis(street)
            width = geo.street_width(street, axis, cfg)
        except geo.GeometryError as exc:
            log.warning("street %s skipped: %s", street.id, exc)
            continue
        surface = geo.street_surface(street)
        bordering = [b for b in model.buildings if geo.borders(b, street, cfg, surface)]
        unambiguous = []
        for b in bordering:
            if axis.across(geo.polygon_centroid(b.footprint)) == 0:
                log.warning("building %s lies on the axis of %s; left out", b.id, street.id)
            else:
                unambiguous.append(b)
        side_1, side_2 = geo.split_sides(unambiguous, axis)
        if not side_1 or not side_2:
            continue
        if not (geo.continuously_aligned(side_1, street, axis, cfg)
                and geo.continuously_aligned(side_2, street, axis, cfg)):
            continue
        canyons.append(make_canyon(street, side_1, side_2, cfg, shapes, axis, width))
    return canyons


def compute_hh_ratio(canyon: OuppStreetCanyon, met: Optional[MeteorologicalConditions] = None) -> float:
    """Height-to-height ratio of the canyon.

    Without wind the stored row order is used.  With wind the numerator is the
    windward (downwind row) average and the denominator the leeward one; for
    wind along the canyon the stored order is kept.
    """
    if not canyon.buildings_1 or not canyon.buildings_2:
        raise ValueError(f"{canyon.id}: both sides must be non-empty")
    h1 = geo.average_height(canyon.buildings_1)
    h2 = geo.average_height(canyon.buildings_2)
    if met is None:
        return h1 / h2
    from .flow import assign_sides

    ctx = assign_sides(canyon, met.wind)
    if ctx.downwind_side is None:
        return h1 / h2
    windward = canyon.side(ctx.downwind_side)
    leeward = canyon.side(ctx.upwind_side)
    return geo.average_height(windward) / geo.average_height(leeward)


def scfus_holds(hh_ratio: float, hw_ratio: float) -> bool:
    """Favourable-upwind-side test with strict bounds on both ratios."""
    return (SCFUS_HH_BOUNDS[0] < hh_ratio < SCFUS_HH_BOUNDS[1]
            and SCFUS_HW_BOUNDS[0] < hw_ratio < SCFUS_HW_BOUNDS[1])


def classify_scfus(canyon: OuppStreetCanyon) -> bool:
    return scfus_holds(canyon.in_aq.height_to_height_ratio, canyon.in_aq.height_to_width_ratio)


def classify_potentially_polluted(canyon: OuppStreetCanyon, flow: Flow) -> bool:
    return len(flow.vortices) >= 1


# --------------------------------------------------------------------------
# knowledge base


class DanglingReferenceError(LookupError):
    pass


class MissingProvenanceError(ValueError):
    pass


_REQUIRED_PROVENANCE = {
    OuppStreet: ("location", "width", "orientation", "albedo"),
    OuppBuilding: ("location", "height", "roof_slope", "albedo"),
    OuppStreetCanyon: ("buildings_1", "buildings_2", "height_to_width_ratio",
                       "height_to_height_ratio", "shape", "orientation"),
}


class KnowledgeBase:
    """Single-writer store of mediated instances over one city model."""

    def __init__(self, model: CityModel):
        self.model = model
        self._instances: dict[str, Any] = {}
        self._cg_ids = {b.id for b in model.buildings} | {s.id for s in model.streets}

    def __len__(self) -> int:
        return len(self._instances)

    def _check_refs(self, inst) -> None:
        refs: list[str] = []
        if isinstance(inst, (OuppStreet, OuppBuilding)):
            refs.append(inst.in_cg.id)
        elif isinstance(inst, OuppStreetCanyon):
            refs += [inst.street.id, *(b.id for b in inst.buildings_1), *(b.id for b in inst.buildings_2)]
        elif isinstance(inst, Isosurface):
            if inst.geometry is not None:
                refs.append(inst.geometry)
        elif isinstance(inst, ScalarField):
            refs += [iso.geometry for iso in inst.isosurfaces if iso.geometry is not None]
        missing = [r for r in refs if r not in self._cg_ids]
        if missing:
            raise DanglingReferenceError(f"unresolved references: {', '.join(missing)}")

    def kb_assert(self, instance, id: Optional[str] = None) -> str:
        self._check_refs(instance)
        for cls, needed in _REQUIRED_PROVENANCE.items():
            if isinstance(instance, cls):
                lacking = [f for f in needed if f not in instance.provenance]
                if lacking:
                    raise MissingProvenanceError(f"no provenance for {', '.join(lacking)}")
        key = id or getattr(instance, "id", None) or f"{type(instance).__name__}-{len(self._instances)}"
        self._instances[key] = instance
        return key

    def get(self, key: str):
        return self._instances[key]

    def kb_query(self, type_: type, predicate: Callable[[Any], bool] = lambda _: True) -> list:
        return [v for v in self._instances.values() if isinstance(v, type_) and predicate(v)]

    def provenance(self, key: str) -> Mapping[str, Provenance]:
        return getattr(self._instances[key], "provenance", {})


def build_knowledge_base(model: CityModel, cfg: GeoConfig = GeoConfig(),
                         shapes: ShapeThresholds = ShapeThresholds(),
                         albedo_table: Mapping[str, float] = {}) -> KnowledgeBase:
    kb = KnowledgeBase(model)
    for b in model.buildings:
        kb.kb_assert(derive_aq_building(b, albedo_table), f"building:{b.id}")
    for s in model.streets:
        try:
            kb.kb_assert(derive_aq_street(s, cfg, albedo_table), f"street:{s.id}")
        except geo.GeometryError as exc:
            log.warning("street %s not mediated: %s", s.id, exc)
    for c in extract_street_canyons(model, cfg, shapes):
        kb.kb_assert(c)
    return kb


def with_sides(canyon: OuppStreetCanyon, windward, leeward) -> OuppStreetCanyon:
    return replace(canyon, in_aq=replace(canyon.in_aq, windward_side=windward, leeward_side=leeward))
