"""Canyon inventory and report documents, GeoJSON and text rendering.

Documents are written with sorted keys and derived numbers rounded to nine
significant digits, so identical inputs always give identical bytes.  Source
coordinates are passed through unrounded.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, replace
from typing import Any, Optional

from . import __version__
from .citygml import CityModel, model_from_json, model_to_json
from .config import RunConfig, config_from_snapshot
from .flow import (Advisory, WindContext, assign_sides, derive_vortices,
                   dispersion_advisory, orient_canyon)
from .mediator import (OuppStreetCanyon, classify_potentially_polluted,
                       classify_scfus, compute_hh_ratio, config_digest,
                       extract_street_canyons, make_canyon)
from .ontology import Flow, MeteorologicalConditions

SCHEMA_VERSION = "1.0"
SIG_DIGITS = 9
CRS_NOTE = "source local planar CRS (metres, no reprojection)"
FIDELITY_RTOL = 1e-6


class InventoryError(ValueError):
    """Inventory or report content that does not resolve against its city model."""


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def _rounded(obj: Any) -> Any:
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(kind: str, cfg: RunConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "tool": {"name": "aircanyon", "version": __version__},
        "config": _rounded(cfg.snapshot()),
        "config_digest": config_digest(cfg.snapshot()),
    }


def _provenance(canyon: OuppStreetCanyon) -> dict:
    return {k: {"operation": p.operation, "sources": list(p.sources), "config_digest": p.config_digest}
            for k, p in sorted(canyon.provenance.items())}


def canyon_record(canyon: OuppStreetCanyon) -> dict:
    aq = canyon.in_aq
    return _rounded({
        "id": canyon.id,
        "street_id": canyon.street.id,
        "buildings_1": [b.id for b in canyon.buildings_1],
        "buildings_2": [b.id for b in canyon.buildings_2],
        "hw_ratio": aq.height_to_width_ratio,
        "hh_ratio": aq.height_to_height_ratio,
        "shape": str(aq.shape),
        "orientation_deg": aq.orientation,
        "street_width": canyon.street_width,
        "scfus": classify_scfus(canyon),
        "provenance": _provenance(canyon),
    })


def inventory_document(model: CityModel, canyons: list[OuppStreetCanyon], cfg: RunConfig) -> dict:
    doc = _header("canyon-inventory", cfg)
    doc["city"] = model_to_json(model)
    doc["canyons"] = [canyon_record(c) for c in canyons]
    return doc


def build_inventory(model: CityModel, cfg: RunConfig = RunConfig()) -> dict:
    return inventory_document(model, extract_street_canyons(model, cfg.geometry, cfg.shape), cfg)


def canyons_from_inventory(doc: dict, cfg: RunConfig = RunConfig()
                           ) -> tuple[CityModel, list[OuppStreetCanyon]]:
    """Rebuild canyons from an inventory and check them against the embedded city.

    Ratios are re-derived from the source heights and geometry; a stored ratio
    that disagrees beyond ``FIDELITY_RTOL`` raises :class:`InventoryError`.
    """
    if doc.get("kind") not in ("canyon-inventory", "canyon-report") or "city" not in doc:
        raise InventoryError("not a canyon inventory")
    model = model_from_json(doc["city"])
    streets = {s.id: s for s in model.streets}
    buildings = {b.id: b for b in model.buildings}
    seen = set()
    out = []
    for rec in doc.get("canyons", []):
        cid = rec.get("id")
        if cid in seen:
            raise InventoryError(f"duplicate canyon id {cid}")
        seen.add(cid)
        if rec.get("street_id") not in streets:
            raise InventoryError(f"{cid}: unknown street id {rec.get('street_id')!r}")
        missing = [b for b in (*rec.get("buildings_1", []), *rec.get("buildings_2", [])) if b not in buildings]
        if missing:
            raise InventoryError(f"{cid}: unknown building ids {missing}")
        if not rec.get("buildings_1") or not rec.get("buildings_2"):
            raise InventoryError(f"{cid}: both sides need buildings")
        canyon = make_canyon(streets[rec["street_id"]],
                             [buildings[b] for b in rec["buildings_1"]],
                             [buildings[b] for b in rec["buildings_2"]], cfg.geometry, cfg.shape)
        for key, value in (("hw_ratio", canyon.in_aq.height_to_width_ratio),
                           ("hh_ratio", canyon.in_aq.height_to_height_ratio)):
            stored = rec.get(key)
            if stored is None or not math.isclose(stored, value, rel_tol=FIDELITY_RTOL):
                raise InventoryError(f"{cid}: stored {key} {stored} disagrees with re-derived {value}")
        if canyon.id != cid:
            canyon = replace(canyon, id=cid)
        out.append(canyon)
    return model, out


# --------------------------------------------------------------------------
# classification


def _vortex_record(v) -> dict:
    return {"intensity": str(v.intensity), "rotation_direction": str(v.rotation_direction),
            "location": str(v.location), "origin": str(v.origin),
            "shape": str(v.shape) if v.shape is not None else None}


def _advisory_record(adv: Advisory, canyon: OuppStreetCanyon) -> Optional[dict]:
    if not adv.available:
        return None
    return {"lower_region_hotspot": str(adv.lower_region_hotspot),
            "lower_region_hotspot_buildings": canyon.building_ids(adv.lower_region_hotspot),
            "upper_region_hotspot": str(adv.upper_region_hotspot),
            "recommended_side": str(adv.recommended_side),
            "recommended_side_buildings": canyon.building_ids(adv.recommended_side),
            "recommendation": adv.recommendation,
            "source": adv.source}


def classify_canyon(canyon: OuppStreetCanyon, met: MeteorologicalConditions,
                    cfg: RunConfig = RunConfig()) -> dict:
    ctx: WindContext = assign_sides(canyon, met.wind)
    oriented = orient_canyon(canyon, ctx)
    flow: Flow = derive_vortices(canyon, met, cfg.flow)
    adv = dispersion_advisory(canyon, ctx)
    rec = canyon_record(canyon)
    side = lambda s: str(s) if s is not None else None  # noqa: E731
    rec.update(_rounded({
        "hh_ratio_wind": compute_hh_ratio(canyon, met) if ctx.cross_wind else None,
        "relative_wind_angle": ctx.relative_angle,
        "upwind_side": side(ctx.upwind_side),
        "downwind_side": side(ctx.downwind_side),
        "windward_side": side(oriented.in_aq.windward_side),
        "leeward_side": side(oriented.in_aq.leeward_side),
        "regime": str(flow.regime),
        "vortices": [_vortex_record(v) for v in flow.vortices],
        "vortex_count": len(flow.vortices),
        "potentially_polluted": classify_potentially_polluted(canyon, flow),
        "advisory": _advisory_record(adv, canyon),
        "advisory_reason": adv.reason,
    }))
    rec["provenance"].update({
        "regime": {"operation": "classify_flow_regime", "sources": [canyon.id],
                   "config_digest": config_digest(cfg.flow)},
        "vortices": {"operation": "derive_vortices", "sources": [canyon.id, "scenario"],
                     "config_digest": config_digest(cfg.flow)},
        "advisory": {"operation": "dispersion_advisory", "sources": [canyon.id, "scenario"],
                     "config_digest": ""},
    })
    return rec


def scenario_record(met: MeteorologicalConditions) -> dict:
    doc = {"wind": {k: v for k, v in asdict(met.wind).items() if v is not None}}
    if met.thermal is not None:
        doc["thermal"] = {k: v for k, v in asdict(met.thermal).items() if v is not None}
    return _rounded(doc)


def report_document(model: CityModel, canyons: list[OuppStreetCanyon],
                    met: MeteorologicalConditions, cfg: RunConfig = RunConfig()) -> dict:
    doc = _header("canyon-report", cfg)
    doc["scenario"] = scenario_record(met)
    doc["city"] = model_to_json(model)
    doc["canyons"] = [classify_canyon(c, met, cfg) for c in canyons]
    return doc


# --------------------------------------------------------------------------
# rendering


def canyon_extent(canyon: OuppStreetCanyon) -> list[list[float]]:
    """Ring bounding the open space between the two building rows."""
    axis = canyon.axis
    inner = []
    spans = []
    for row, sign in ((canyon.buildings_1, 1), (canyon.buildings_2, -1)):
        pts = [p for b in row for p in b.footprint.vertices]
        ts = [axis.across(p) for p in pts]
        inner.append(min(ts) if sign > 0 else max(ts))
        ss = [axis.along(p) for p in pts]
        spans.append((min(ss), max(ss)))
    lo = max(spans[0][0], spans[1][0])
    hi = min(spans[0][1], spans[1][1])
    if hi <= lo:
        lo, hi = min(spans[0][0], spans[1][0]), max(spans[0][1], spans[1][1])
    t1, t2 = inner
    corners = [(lo, t2), (hi, t2), (hi, t1), (lo, t1)]
    ring = [list(axis.to_world(s, t)) for s, t in corners]
    # axis frame is (direction, left normal): this ring is counter-clockwise
    ring.append(ring[0])
    return [[round_sig(c) for c in p] for p in ring]


def _polygon_coords(ring) -> list:
    return [[list(p) for p in ring]]


def report_geojson(doc: dict) -> dict:
    model, canyons = canyons_from_inventory(doc, config_from_snapshot(doc.get("config", {})))
    by_id = {c.id: c for c in canyons}
    membership: dict[str, dict] = {}
    for rec in doc["canyons"]:
        for side in ("buildings_1", "buildings_2"):
            for bid in rec[side]:
                membership[bid] = {"canyon_id": rec["id"], "side": side}
    street_canyon = {rec["street_id"]: rec["id"] for rec in doc["canyons"]}

    features = []
    for b in model.buildings:
        props = {"kind": "building", "id": b.id, "measured_height": b.measured_height,
                 "crs_note": CRS_NOTE, "canyon_id": None, "side": None}
        props.update(membership.get(b.id, {}))
        features.append({"type": "Feature", "id": b.id, "properties": props,
                         "geometry": {"type": "Polygon", "coordinates": _polygon_coords(b.footprint.exterior)}})
    for s in model.streets:
        props = {"kind": "street", "id": s.id, "name": s.name, "crs_note": CRS_NOTE,
                 "canyon_id": street_canyon.get(s.id)}
        if s.surface is not None:
            geom = {"type": "Polygon", "coordinates": _polygon_coords(s.surface.exterior)}
        else:
            props["nominal_width"] = s.nominal_width
            geom = {"type": "LineString", "coordinates": [list(p) for p in s.centerline]}
        features.append({"type": "Feature", "id": s.id, "properties": props, "geometry": geom})
    for rec in doc["canyons"]:
        props = {k: v for k, v in rec.items() if k != "provenance"}
        props.update({"kind": "canyon", "crs_note": CRS_NOTE})
        features.append({"type": "Feature", "id": rec["id"], "properties": props,
                         "geometry": {"type": "Polygon", "coordinates": [canyon_extent(by_id[rec["id"]])]}})
    return {"type": "FeatureCollection", "crs_note": CRS_NOTE,
            "schema_version": SCHEMA_VERSION, "features": features}


_TEXT_COLUMNS = [("id", "canyon"), ("street_id", "street"), ("hw_ratio", "H/W"), ("hh_ratio", "H/H"),
                 ("shape", "shape"), ("regime", "regime"), ("vortex_count", "vortices"),
                 ("scfus", "SCFUS"), ("potentially_polluted", "polluted"), ("advice", "advisory")]


def report_text(doc: dict) -> str:
    rows = []
    for rec in doc.get("canyons", []):
        adv = rec.get("advisory")
        row = dict(rec)
        row["advice"] = (f"{adv['recommendation']} ({adv['recommended_side']})" if adv
                         else rec.get("advisory_reason") or "-")
        rows.append([_cell(row.get(k)) for k, _ in _TEXT_COLUMNS])
    header = [h for _, h in _TEXT_COLUMNS]
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()  # noqa: E731
    out = [line(header), line(["-" * w for w in widths])]
    out += [line(r) for r in rows]
    n = len(rows)
    out.append(f"{n} canyon{'s' if n != 1 else ''}")
    return "\n".join(out) + "\n"


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)
