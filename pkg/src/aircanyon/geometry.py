"""Geometric derivations and predicates behind the canyon axioms.

Bearings are degrees clockwise from north.  Street orientations are axial and
folded into [0, 180); the canonical axis direction for orientation ``t`` is
``(sin t, cos t)``.  Distances and overlap tests are delegated to shapely;
width sampling, projections and side assignment are done here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import shapely

from .citygml import CgBuilding, CgStreet, Polygon2D

DEFAULT_ALBEDO = 0.20
LUMINANCE_ALBEDO_RANGE = (0.05, 0.85)
OVERLAP_AREA_TOL = 1e-9


class GeometryError(ValueError):
    """Geometry too degenerate for the requested derivation."""


class AmbiguousSideError(GeometryError):
    def __init__(self, building_id: str):
        self.building_id = building_id
        super().__init__(f"centroid of {building_id} lies on the street axis")


@dataclass(frozen=True)
class GeoConfig:
    border_distance_max: float = 3.0
    gap_max: float = 5.0
    coverage_min: float = 0.8
    width_sample_count: int = 64

    def __post_init__(self):
        for name in ("border_distance_max", "gap_max", "coverage_min", "width_sample_count"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.coverage_min > 1:
            raise ValueError(f"coverage_min must be in (0, 1], got {self.coverage_min}")
        if int(self.width_sample_count) != self.width_sample_count:
            raise ValueError("width_sample_count must be an integer")


@dataclass(frozen=True)
class StreetAxis:
    origin: tuple[float, float]
    direction: tuple[float, float]
    orientation_deg: float

    @classmethod
    def from_bearing(cls, origin, bearing_deg: float) -> "StreetAxis":
        t = bearing_deg % 180.0
        if t >= 180.0 - 1e-9:
            t = 0.0
        r = math.radians(t)
        return cls((float(origin[0]), float(origin[1])), (math.sin(r), math.cos(r)), t)

    @property
    def normal(self) -> tuple[float, float]:
        """Left-hand unit normal (positive cross product side)."""
        dx, dy = self.direction
        return -dy, dx

    def along(self, p) -> float:
        return (p[0] - self.origin[0]) * self.direction[0] + (p[1] - self.origin[1]) * self.direction[1]

    def across(self, p) -> float:
        """Signed cross product direction x (p - origin)."""
        dx, dy = self.direction
        return dx * (p[1] - self.origin[1]) - dy * (p[0] - self.origin[0])

    def to_world(self, s: float, t: float) -> tuple[float, float]:
        nx, ny = self.normal
        return (self.origin[0] + s * self.direction[0] + t * nx,
                self.origin[1] + s * self.direction[1] + t * ny)


def bearing(dx: float, dy: float) -> float:
    return math.degrees(math.atan2(dx, dy)) % 360.0


# --------------------------------------------------------------------------
# street shape


def polyline_centroid(points: Sequence[Sequence[float]]) -> tuple[float, float]:
    total = cx = cy = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        L = math.hypot(x1 - x0, y1 - y0)
        total += L
        cx += L * (x0 + x1) / 2
        cy += L * (y0 + y1) / 2
    if total == 0:
        raise GeometryError("zero-length polyline")
    return cx / total, cy / total


def polygon_centroid(poly: Polygon2D) -> tuple[float, float]:
    v = poly.vertices
    # shift for numerical stability far from the origin
    ox, oy = v[0]
    a = cx = cy = 0.0
    for i in range(len(v)):
        x0, y0 = v[i][0] - ox, v[i][1] - oy
        x1, y1 = v[(i + 1) % len(v)][0] - ox, v[(i + 1) % len(v)][1] - oy
        c = x0 * y1 - x1 * y0
        a += c
        cx += (x0 + x1) * c
        cy += (y0 + y1) * c
    if abs(a) < 1e-300:
        xs, ys = zip(*v)
        return sum(xs) / len(xs), sum(ys) / len(ys)
    return ox + cx / (3 * a), oy + cy / (3 * a)


def street_centroid(street: CgStreet) -> tuple[float, float]:
    if street.surface is not None:
        return polygon_centroid(street.surface)
    return polyline_centroid(street.centerline)


def street_axis(street: CgStreet) -> StreetAxis:
    """Absolute orientation of a street, folded into [0, 180).

    Centerline streets use the length-weighted mean direction of their
    segments; surface streets use the principal axis of the ring vertices.
    """
    if street.surface is None:
        pts = street.centerline
        if pts is None or len(pts) < 2:
            raise GeometryError(f"{street.id}: centerline needs 2 points")
        sx = sum(b[0] - a[0] for a, b in zip(pts, pts[1:]))
        sy = sum(b[1] - a[1] for a, b in zip(pts, pts[1:]))
        if math.hypot(sx, sy) <= 1e-12 * max(1.0, _extent(pts)):
            raise GeometryError(f"{street.id}: centerline has no mean direction")
        return StreetAxis.from_bearing(polyline_centroid(pts), bearing(sx, sy))

    v = np.asarray(street.surface.vertices, dtype=float)
    c = v.mean(axis=0)
    d = v - c
    cov = d.T @ d
    w, vec = np.linalg.eigh(cov)
    if w[-1] <= 0:
        raise GeometryError(f"{street.id}: degenerate street polygon")
    ex, ey = vec[:, -1]
    return StreetAxis.from_bearing(polygon_centroid(street.surface), bearing(ex, ey))


def _extent(pts) -> float:
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return max(max(xs) - min(xs), max(ys) - min(ys))


def chord_length(ring: Sequence[Sequence[float]], axis: StreetAxis, s: float) -> float:
    """Length of the polygon's intersection with the perpendicular line at station ``s``."""
    ts = []
    n = len(ring) - 1
    for i in range(n):
        a, b = ring[i], ring[i + 1]
        sa, sb = axis.along(a), axis.along(b)
        # half-open crossing rule: vertices on the line count once, edges on it never
        if (sa < s) == (sb < s):
            continue
        u = (s - sa) / (sb - sa)
        ta, tb = axis.across(a), axis.across(b)
        ts.append(ta + u * (tb - ta))
    ts.sort()
    return sum(ts[i + 1] - ts[i] for i in range(0, len(ts) - 1, 2))


def street_width(street: CgStreet, axis: StreetAxis, cfg: GeoConfig = GeoConfig()) -> float:
    """Mean perpendicular chord of the street surface, or its nominal width."""
    if street.surface is None:
        return float(street.nominal_width)
    ring = street.surface.exterior
    along = [axis.along(p) for p in ring]
    lo, hi = min(along), max(along)
    n = int(cfg.width_sample_count)
    step = (hi - lo) / n
    chords = [chord_length(ring, axis, lo + (i + 0.5) * step) for i in range(n)]
    chords = [c for c in chords if c > 0]
    if not chords:
        raise GeometryError(f"{street.id}: no station intersects the street polygon")
    return sum(chords) / len(chords)


def street_surface(street: CgStreet) -> shapely.Geometry:
    """Street as an areal shapely geometry (centerlines buffered by half the width)."""
    if street.surface is not None:
        return street.surface.to_shapely()
    return shapely.LineString(street.centerline).buffer(
        street.nominal_width / 2, cap_style="flat", join_style="mitre")


def street_interval(street: CgStreet, axis: StreetAxis) -> tuple[float, float]:
    pts = street.surface.vertices if street.surface is not None else street.centerline
    s = [axis.along(p) for p in pts]
    return min(s), max(s)


# --------------------------------------------------------------------------
# building predicates


def borders(building: CgBuilding, street: CgStreet, cfg: GeoConfig = GeoConfig(),
            surface: Optional[shapely.Geometry] = None) -> bool:
    """True when the footprint lies within ``border_distance_max`` of the street
    without overlapping the street surface interior (touching is allowed)."""
    surf = street_surface(street) if surface is None else surface
    fp = building.footprint.to_shapely()
    if fp.distance(surf) > cfg.border_distance_max:
        return False
    overlap = fp.intersection(surf).area
    return overlap <= OVERLAP_AREA_TOL * max(1.0, fp.area)


def footprint_interval(building: CgBuilding, axis: StreetAxis) -> tuple[float, float]:
    s = [axis.along(p) for p in building.footprint.vertices]
    return min(s), max(s)


def merge_intervals(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(a, b) for a, b in merged]


def continuously_aligned(buildings: Iterable[CgBuilding], street: CgStreet, axis: StreetAxis,
                         cfg: GeoConfig = GeoConfig()) -> bool:
    """Frontage coverage and gap test along the street axis.

    Each footprint is projected onto the axis.  The row is aligned when the
    union covers at least ``coverage_min`` of the street's own axis extent and
    no gap between consecutive projections exceeds ``gap_max``.
    """
    merged = merge_intervals(footprint_interval(b, axis) for b in buildings)
    if not merged:
        return False
    lo, hi = street_interval(street, axis)
    length = hi - lo
    if length <= 0:
        return False
    covered = sum(max(0.0, min(b, hi) - max(a, lo)) for a, b in merged)
    if covered < cfg.coverage_min * length:
        return False
    return all(b[0] - a[1] <= cfg.gap_max for a, b in zip(merged, merged[1:]))


def split_sides(buildings: Iterable[CgBuilding], axis: StreetAxis
                ) -> tuple[tuple[CgBuilding, ...], tuple[CgBuilding, ...]]:
    """Partition by side of the axis: left of the canonical direction first."""
    left, right = [], []
    for b in buildings:
        c = axis.across(polygon_centroid(b.footprint))
        if c > 0:
            left.append(b)
        elif c < 0:
            right.append(b)
        else:
            raise AmbiguousSideError(b.id)
    return tuple(left), tuple(right)


def average_height(buildings: Iterable[CgBuilding]) -> float:
    hs = [b.measured_height for b in buildings]
    if not hs:
        raise ValueError("average_height of an empty building set")
    return math.fsum(hs) / len(hs)


def roof_slope(building: CgBuilding) -> Optional[float]:
    """Area-weighted tilt of the roof surfaces from horizontal, in degrees.

    Returns None when the building carries no roof surfaces.
    """
    total = acc = 0.0
    for roof in building.roof_surfaces:
        nx, ny, nz = roof.newell_normal()
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        if norm == 0:
            continue
        tilt = math.degrees(math.atan2(math.hypot(nx, ny), abs(nz)))
        acc += norm * tilt
        total += norm
    if total == 0:
        return None
    return acc / total


def _srgb_to_linear(c: float) -> float:
    c /= 255.0
    return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4


def relative_luminance(rgb: Sequence[int]) -> float:
    r, g, b = (_srgb_to_linear(c) for c in rgb)
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def albedo(entity, table: Mapping[str, float]) -> float:
    material = getattr(entity, "wall_material", None)
    if material is not None and material in table:
        return float(table[material])
    color = getattr(entity, "wall_color", None)
    if color is not None:
        lo, hi = LUMINANCE_ALBEDO_RANGE
        return lo + (hi - lo) * relative_luminance(color)
    return DEFAULT_ALBEDO
