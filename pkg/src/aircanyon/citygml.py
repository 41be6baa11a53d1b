"""CityGML-lite ingest.

Reads the LOD1-equivalent subset used by the canyon pipeline (building
footprints, measured heights, optional roof polygons and wall finish, and
streets as surfaces or centerlines with a nominal width) from either the XML
encoding or its plain JSON twin.  Element matching ignores XML namespaces, so
both bare documents and namespaced CityGML 1.0/2.0 files are accepted.
"""

from __future__ import annotations

import json
import logging
import math
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

import jsonschema
import shapely

log = logging.getLogger(__name__)

DEDUP_TOL = 1e-9
PLANARITY_TOL = 1e-6

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]


class CityGMLError(Exception):
    """Base class for ingest failures."""


class ParseError(CityGMLError):
    """The document is not well-formed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(CityGMLError):
    """The document is well-formed but violates the subset's rules."""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


def _signed_area(ring: Sequence[Point2]) -> float:
    a = 0.0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def _dedup(points: Iterable[Sequence[float]]) -> list:
    out: list = []
    for p in points:
        if out and all(abs(a - b) <= DEDUP_TOL for a, b in zip(p, out[-1])):
            continue
        out.append(tuple(float(c) for c in p))
    while len(out) > 1 and all(abs(a - b) <= DEDUP_TOL for a, b in zip(out[0], out[-1])):
        out.pop()
    return out


def _collinear(pts: Sequence[Sequence[float]]) -> bool:
    # true when every point lies on the line through the two farthest-apart ones
    p0 = pts[0]
    far = max(pts, key=lambda p: sum((a - b) ** 2 for a, b in zip(p, p0)))
    d = [a - b for a, b in zip(far, p0)]
    dn = math.sqrt(sum(c * c for c in d))
    if dn <= DEDUP_TOL:
        return True
    for p in pts:
        v = [a - b for a, b in zip(p, p0)]
        if len(d) == 2:
            cr = abs(d[0] * v[1] - d[1] * v[0])
        else:
            cx = d[1] * v[2] - d[2] * v[1]
            cy = d[2] * v[0] - d[0] * v[2]
            cz = d[0] * v[1] - d[1] * v[0]
            cr = math.sqrt(cx * cx + cy * cy + cz * cz)
        if cr / dn > DEDUP_TOL * max(1.0, dn):
            return False
    return True


@dataclass(frozen=True)
class Polygon2D:
    """Closed, counter-clockwise exterior ring in local metric coordinates."""

    exterior: tuple[Point2, ...]

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], owner: str = "?") -> "Polygon2D":
        pts = [(p[0], p[1]) for p in _dedup((p[0], p[1]) for p in points)]
        if len(pts) < 3:
            raise ValidationError(f"degenerate ring ({len(pts)} distinct vertices)", owner)
        if _collinear(pts):
            raise ValidationError("degenerate ring (collinear vertices)", owner)
        if not all(math.isfinite(c) for p in pts for c in p):
            raise ValidationError("non-finite coordinate", owner)
        if _signed_area(pts) < 0:
            pts.reverse()
        return cls(tuple(pts) + (pts[0],))

    @property
    def vertices(self) -> tuple[Point2, ...]:
        """Distinct vertices (ring without the closing point)."""
        return self.exterior[:-1]

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    def is_simple(self) -> bool:
        return bool(shapely.LinearRing(self.exterior).is_simple)

    def to_shapely(self) -> shapely.Polygon:
        return shapely.Polygon(self.exterior)


@dataclass(frozen=True)
class Polygon3D:
    ring: tuple[Point3, ...]

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]], owner: str = "?") -> "Polygon3D":
        pts = _dedup((p[0], p[1], p[2]) for p in points)
        if len(pts) < 3 or _collinear(pts):
            raise ValidationError("degenerate roof ring", owner)
        if not all(math.isfinite(c) for p in pts for c in p):
            raise ValidationError("non-finite coordinate", owner)
        return cls(tuple(pts) + (pts[0],))

    @property
    def vertices(self) -> tuple[Point3, ...]:
        return self.ring[:-1]

    def newell_normal(self) -> tuple[float, float, float]:
        """Area vector; its length is twice the polygon area."""
        nx = ny = nz = 0.0
        v = self.vertices
        for i in range(len(v)):
            x0, y0, z0 = v[i]
            x1, y1, z1 = v[(i + 1) % len(v)]
            nx += (y0 - y1) * (z0 + z1)
            ny += (z0 - z1) * (x0 + x1)
            nz += (x0 - x1) * (y0 + y1)
        return nx, ny, nz

    def planarity_error(self) -> float:
        """Largest vertex distance from the best-fit (Newell) plane."""
        n = self.newell_normal()
        nn = math.sqrt(sum(c * c for c in n))
        if nn == 0.0:
            return math.inf
        v = self.vertices
        c = [sum(p[i] for p in v) / len(v) for i in range(3)]
        return max(abs(sum((p[i] - c[i]) * n[i] for i in range(3))) / nn for p in v)

    def diameter(self) -> float:
        v = self.vertices
        return max(math.dist(a, b) for a in v for b in v)


@dataclass(frozen=True)
class CgBuilding:
    id: str
    footprint: Polygon2D
    measured_height: float
    roof_surfaces: tuple[Polygon3D, ...] = ()
    wall_material: Optional[str] = None
    wall_color: Optional[tuple[int, int, int]] = None


@dataclass(frozen=True)
class CgStreet:
    """A street given either as a surface polygon or as centerline + width."""

    id: str
    surface: Optional[Polygon2D] = None
    centerline: Optional[tuple[Point2, ...]] = None
    nominal_width: Optional[float] = None
    name: Optional[str] = None

    @property
    def is_centerline(self) -> bool:
        return self.surface is None


@dataclass(frozen=True)
class CityModel:
    buildings: tuple[CgBuilding, ...] = ()
    streets: tuple[CgStreet, ...] = ()
    source_name: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def building(self, bid: str) -> CgBuilding:
        for b in self.buildings:
            if b.id == bid:
                return b
        raise KeyError(bid)

    def street(self, sid: str) -> CgStreet:
        for s in self.streets:
            if s.id == sid:
                return s
        raise KeyError(sid)


@dataclass(frozen=True)
class Finding:
    object_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.object_id}: {self.message}"


# --------------------------------------------------------------------------
# validation


def validate_model(model: CityModel) -> list[Finding]:
    """Report every invariant violation in ``model``; an empty list means valid."""
    findings: list[Finding] = []
    seen: dict[str, int] = {}
    for obj in (*model.buildings, *model.streets):
        seen[obj.id] = seen.get(obj.id, 0) + 1
    for oid, n in seen.items():
        if n > 1:
            findings.append(Finding(oid, f"duplicate identifier ({n} objects)"))

    def check_ring(oid: str, poly: Polygon2D, what: str) -> None:
        if not all(math.isfinite(c) for p in poly.exterior for c in p):
            findings.append(Finding(oid, f"{what} has non-finite coordinates"))
        elif not poly.is_simple():
            findings.append(Finding(oid, f"{what} ring is self-intersecting"))

    for b in model.buildings:
        if not (math.isfinite(b.measured_height) and b.measured_height > 0):
            findings.append(Finding(b.id, f"measured_height must be > 0, got {b.measured_height}"))
        check_ring(b.id, b.footprint, "footprint")
        for k, roof in enumerate(b.roof_surfaces):
            tol = PLANARITY_TOL * roof.diameter()
            if roof.planarity_error() > tol:
                findings.append(Finding(b.id, f"roof surface {k} is not planar"))
        if b.wall_color is not None and not all(0 <= c <= 255 for c in b.wall_color):
            findings.append(Finding(b.id, f"wall_color out of range: {b.wall_color}"))

    for s in model.streets:
        if s.surface is not None:
            check_ring(s.id, s.surface, "surface")
        else:
            if s.centerline is None or len(s.centerline) < 2:
                findings.append(Finding(s.id, "centerline needs at least 2 points"))
            elif not all(math.isfinite(c) for p in s.centerline for c in p):
                findings.append(Finding(s.id, "centerline has non-finite coordinates"))
            w = s.nominal_width
            if w is None or not (math.isfinite(w) and w > 0):
                findings.append(Finding(s.id, f"nominal_width must be > 0, got {w}"))
    return findings


# --------------------------------------------------------------------------
# XML


def _local(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1]


def _child(el: ET.Element, name: str) -> Optional[ET.Element]:
    for c in el:
        if _local(c.tag) == name:
            return c
    return None


def _descend(el: ET.Element, *names: str) -> Optional[ET.Element]:
    for n in names:
        if el is None:
            return None
        el = _child(el, n)
    return el


def _iter_local(el: ET.Element, name: str):
    for c in el.iter():
        if _local(c.tag) == name:
            yield c


def _gml_id(el: ET.Element) -> Optional[str]:
    for k, v in el.attrib.items():
        if _local(k) == "id":
            return v
    return None


def _poslist(el: ET.Element, owner: str, default_dim: int = 3) -> list[tuple[float, ...]]:
    dim = int(el.attrib.get("srsDimension", default_dim))
    try:
        vals = [float(t) for t in (el.text or "").split()]
    except ValueError as exc:
        raise ValidationError(f"non-numeric posList: {exc}", owner) from None
    if dim not in (2, 3) or len(vals) % dim:
        raise ValidationError(f"posList length {len(vals)} is not a multiple of {dim}", owner)
    pts = [tuple(vals[i:i + dim]) for i in range(0, len(vals), dim)]
    if dim == 2:
        pts = [(x, y, 0.0) for x, y in pts]
    return pts


def _ring_poslist(polygon_parent: ET.Element, owner: str) -> Optional[ET.Element]:
    return _descend(polygon_parent, "Polygon", "exterior", "LinearRing", "posList")


def _float_text(el: Optional[ET.Element], owner: str, what: str) -> Optional[float]:
    if el is None or el.text is None or not el.text.strip():
        return None
    try:
        return float(el.text)
    except ValueError:
        raise ValidationError(f"{what} is not a number: {el.text.strip()!r}", owner) from None


def _parse_color(text: str, owner: str) -> tuple[int, int, int]:
    parts = text.split()
    try:
        rgb = tuple(int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"wallColor must be three integers, got {text!r}", owner) from None
    if len(rgb) != 3 or not all(0 <= c <= 255 for c in rgb):
        raise ValidationError(f"wallColor must be three integers in 0..255, got {text!r}", owner)
    return rgb  # type: ignore[return-value]


_BUILDING_CHILDREN = {"measuredHeight", "lod1Footprint", "boundedBy", "wallMaterial", "wallColor", "name"}
_ROAD_CHILDREN = {"lod1Surface", "centerLine", "nominalWidth", "name"}


def _xml_building(el: ET.Element, warnings: list[str]) -> CgBuilding:
    bid = _gml_id(el)
    if bid is None:
        raise ValidationError("Building without gml:id")
    height = _float_text(_child(el, "measuredHeight"), bid, "measuredHeight")
    if height is None:
        raise ValidationError("missing measuredHeight", bid)
    if not (math.isfinite(height) and height > 0):
        raise ValidationError(f"measuredHeight must be > 0, got {height}", bid)
    fp = _child(el, "lod1Footprint")
    pl = _ring_poslist(fp, bid) if fp is not None else None
    if pl is None:
        raise ValidationError("missing lod1Footprint ring", bid)
    footprint = Polygon2D.from_points(_poslist(pl, bid), bid)

    roofs = []
    for bb in el:
        if _local(bb.tag) != "boundedBy":
            continue
        for surf in bb:
            if _local(surf.tag) != "RoofSurface":
                continue
            for ring in _iter_local(surf, "exterior"):
                pos = _descend(ring, "LinearRing", "posList")
                if pos is not None:
                    roofs.append(Polygon3D.from_points(_poslist(pos, bid), bid))

    material = _child(el, "wallMaterial")
    color = _child(el, "wallColor")
    for c in el:
        if _local(c.tag) not in _BUILDING_CHILDREN:
            warnings.append(f"{bid}: skipped unknown element <{_local(c.tag)}>")
    return CgBuilding(
        id=bid,
        footprint=footprint,
        measured_height=height,
        roof_surfaces=tuple(roofs),
        wall_material=material.text.strip() if material is not None and material.text else None,
        wall_color=_parse_color(color.text or "", bid) if color is not None else None,
    )


def _xml_road(el: ET.Element, warnings: list[str]) -> CgStreet:
    sid = _gml_id(el)
    if sid is None:
        raise ValidationError("Road without gml:id")
    name_el = _child(el, "name")
    name = name_el.text.strip() if name_el is not None and name_el.text else None
    for c in el:
        if _local(c.tag) not in _ROAD_CHILDREN:
            warnings.append(f"{sid}: skipped unknown element <{_local(c.tag)}>")
    surf = _child(el, "lod1Surface")
    if surf is not None:
        pl = _ring_poslist(surf, sid)
        if pl is None:
            raise ValidationError("lod1Surface without exterior ring", sid)
        return CgStreet(id=sid, surface=Polygon2D.from_points(_poslist(pl, sid), sid), name=name)
    cl = _child(el, "centerLine")
    if cl is None:
        raise ValidationError("Road needs lod1Surface or centerLine", sid)
    pos = next(_iter_local(cl, "posList"), None)
    if pos is None:
        raise ValidationError("centerLine without posList", sid)
    return _centerline_street(sid, _poslist(pos, sid),
                              _float_text(_child(el, "nominalWidth"), sid, "nominalWidth"), name)


def _centerline_street(sid, pts, width, name) -> CgStreet:
    line = [(p[0], p[1]) for p in _dedup((p[0], p[1]) for p in pts)]
    if len(line) < 2:
        raise ValidationError("centerline needs at least 2 distinct points", sid)
    if width is None:
        raise ValidationError("missing nominalWidth", sid)
    if not (math.isfinite(width) and width > 0):
        raise ValidationError(f"nominalWidth must be > 0, got {width}", sid)
    return CgStreet(id=sid, centerline=tuple(line), nominal_width=width, name=name)


def parse_citygml(document: bytes, source_name: str = "") -> CityModel:
    """Parse a CityGML-lite XML document.

    Raises :class:`ParseError` for malformed XML (with the line number) and
    :class:`ValidationError` for subset violations such as a Building without
    ``measuredHeight`` or a degenerate ring.  Unknown city objects and unknown
    child elements are skipped and recorded in ``CityModel.warnings``.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise ParseError(str(exc), exc.position[0]) from None
    if _local(root.tag) != "CityModel":
        raise ValidationError(f"root element is <{_local(root.tag)}>, expected <CityModel>")

    warnings: list[str] = []
    buildings, streets = [], []
    for member in root:
        if _local(member.tag) != "cityObjectMember":
            if _local(member.tag) not in ("name", "boundedBy", "description"):
                warnings.append(f"skipped unknown element <{_local(member.tag)}>")
            continue
        for obj in member:
            kind = _local(obj.tag)
            if kind == "Building":
                buildings.append(_xml_building(obj, warnings))
            elif kind == "Road":
                streets.append(_xml_road(obj, warnings))
            else:
                warnings.append(f"skipped unsupported city object <{kind}> {_gml_id(obj) or ''}".rstrip())
    for w in warnings:
        log.warning("%s: %s", source_name or "<citygml>", w)
    return CityModel(tuple(buildings), tuple(streets), source_name, tuple(warnings))


# --------------------------------------------------------------------------
# JSON twin


def cityjson_lite_schema() -> dict:
    text = resources.files("aircanyon").joinpath("schemas/cityjson_lite.schema.json").read_text()
    return json.loads(text)


def _json_path(path: Iterable) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def parse_cityjson_lite(document: bytes, source_name: str = "") -> CityModel:
    """Parse the JSON twin of the XML subset into a :class:`CityModel`."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    validator = jsonschema.Draft202012Validator(cityjson_lite_schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        raise ValidationError(err.message, _json_path(err.absolute_path))

    buildings = []
    for i, b in enumerate(data.get("buildings", [])):
        owner = b["id"]
        buildings.append(CgBuilding(
            id=owner,
            footprint=Polygon2D.from_points(b["footprint"], owner),
            measured_height=float(b["measured_height"]),
            roof_surfaces=tuple(Polygon3D.from_points(r, owner) for r in b.get("roof_surfaces", [])),
            wall_material=b.get("wall_material"),
            wall_color=tuple(b["wall_color"]) if b.get("wall_color") is not None else None,
        ))
    streets = []
    for s in data.get("streets", []):
        if "surface" in s:
            streets.append(CgStreet(id=s["id"], surface=Polygon2D.from_points(s["surface"], s["id"]),
                                    name=s.get("name")))
        else:
            streets.append(_centerline_street(s["id"], s["centerline"], float(s["nominal_width"]),
                                              s.get("name")))
    return CityModel(tuple(buildings), tuple(streets), data.get("source_name", source_name) or source_name)


def model_to_json(model: CityModel) -> dict:
    """JSON twin of ``model``; ``parse_cityjson_lite`` reads it back unchanged."""
    out_b = []
    for b in model.buildings:
        d: dict = {"id": b.id, "measured_height": b.measured_height,
                   "footprint": [list(p) for p in b.footprint.exterior]}
        if b.roof_surfaces:
            d["roof_surfaces"] = [[list(p) for p in r.ring] for r in b.roof_surfaces]
        if b.wall_material is not None:
            d["wall_material"] = b.wall_material
        if b.wall_color is not None:
            d["wall_color"] = list(b.wall_color)
        out_b.append(d)
    out_s = []
    for s in model.streets:
        d = {"id": s.id}
        if s.name is not None:
            d["name"] = s.name
        if s.surface is not None:
            d["surface"] = [list(p) for p in s.surface.exterior]
        else:
            d["centerline"] = [list(p) for p in s.centerline]
            d["nominal_width"] = s.nominal_width
        out_s.append(d)
    out = {"buildings": out_b, "streets": out_s}
    if model.source_name:
        out["source_name"] = model.source_name
    return out


def model_from_json(data: dict) -> CityModel:
    return parse_cityjson_lite(json.dumps(data).encode())


def load_city(path: str) -> CityModel:
    """Read a city file, choosing the decoder by extension (.json → JSON twin)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    if path.lower().endswith(".json"):
        return parse_cityjson_lite(raw, name)
    return parse_citygml(raw, name)


# --------------------------------------------------------------------------
# XML writer

_NS = {
    "core": "http://www.opengis.net/citygml/2.0",
    "bldg": "http://www.opengis.net/citygml/building/2.0",
    "tran": "http://www.opengis.net/citygml/transportation/2.0",
    "gml": "http://www.opengis.net/gml",
    "lite": "urn:aircanyon:citygml-lite",
}


def _fmt(x: float) -> str:
    return repr(float(x))


def _poslist_text(points, z: float = 0.0) -> str:
    return " ".join(
        f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2] if len(p) > 2 else z)}" for p in points
    )


def write_citygml(model: CityModel) -> bytes:
    """Serialize ``model`` to the XML subset read by :func:`parse_citygml`."""
    for prefix, uri in _NS.items():
        ET.register_namespace(prefix, uri)
    q = lambda ns, tag: f"{{{_NS[ns]}}}{tag}"  # noqa: E731

    def ring(parent, ns, tag, points, z=0.0):
        holder = ET.SubElement(parent, q(ns, tag))
        lr = ET.SubElement(ET.SubElement(ET.SubElement(holder, q("gml", "Polygon")),
                                         q("gml", "exterior")), q("gml", "LinearRing"))
        ET.SubElement(lr, q("gml", "posList"), srsDimension="3").text = _poslist_text(points, z)
        return holder

    root = ET.Element(q("core", "CityModel"))
    for b in model.buildings:
        el = ET.SubElement(ET.SubElement(root, q("core", "cityObjectMember")), q("bldg", "Building"))
        el.set(q("gml", "id"), b.id)
        ET.SubElement(el, q("bldg", "measuredHeight"), uom="m").text = _fmt(b.measured_height)
        ring(el, "bldg", "lod1Footprint", b.footprint.exterior)
        for roof in b.roof_surfaces:
            rs = ET.SubElement(ET.SubElement(el, q("bldg", "boundedBy")), q("bldg", "RoofSurface"))
            ring(rs, "bldg", "lod2MultiSurface", roof.ring)
        if b.wall_material is not None:
            ET.SubElement(el, q("lite", "wallMaterial")).text = b.wall_material
        if b.wall_color is not None:
            ET.SubElement(el, q("lite", "wallColor")).text = " ".join(str(c) for c in b.wall_color)
    for s in model.streets:
        el = ET.SubElement(ET.SubElement(root, q("core", "cityObjectMember")), q("tran", "Road"))
        el.set(q("gml", "id"), s.id)
        if s.name is not None:
            ET.SubElement(el, q("gml", "name")).text = s.name
        if s.surface is not None:
            ring(el, "tran", "lod1Surface", s.surface.exterior)
        else:
            cl = ET.SubElement(el, q("lite", "centerLine"))
            ls = ET.SubElement(cl, q("gml", "LineString"))
            ET.SubElement(ls, q("gml", "posList"), srsDimension="3").text = _poslist_text(s.centerline)
            ET.SubElement(el, q("lite", "nominalWidth"), uom="m").text = _fmt(s.nominal_width)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"
