"""Random city scenes and rigid-motion helpers for property tests."""

import math

import numpy as np

from aircanyon.citygml import CgBuilding, CgStreet, CityModel, Polygon2D, Polygon3D


def _frame(cx, cy, theta):
    d = np.array([math.sin(theta), math.cos(theta)])
    n = np.array([-d[1], d[0]])
    c = np.array([cx, cy])
    return lambda s, t: tuple(float(v) for v in c + s * d + t * n)


def random_scene(rng: np.random.Generator, max_buildings=10, max_streets=3) -> CityModel:
    """Streets with building rows along them; rows are jittered so that some
    scenes satisfy the canyon axiom and others miss it on offset, gaps or coverage."""
    n_streets = min(max_streets, int(rng.choice([1, 2, 3], p=[0.5, 0.3, 0.2])))
    budget = int(rng.integers(max(2, max_buildings // 2), max_buildings + 1))
    streets, buildings = [], []
    for k in range(n_streets):
        theta = rng.uniform(0, 2 * math.pi)
        cx, cy = rng.uniform(-300, 300, 2)
        to_world = _frame(cx, cy, theta)
        length = rng.uniform(60, 160)
        width = rng.uniform(8, 40)
        half = width / 2
        sid = f"s{k}"
        if rng.random() < 0.5:
            streets.append(CgStreet(sid, centerline=(to_world(-length / 2, 0), to_world(length / 2, 0)),
                                    nominal_width=float(width)))
        else:
            streets.append(CgStreet(sid, surface=Polygon2D.from_points([
                to_world(-length / 2, -half), to_world(length / 2, -half),
                to_world(length / 2, half), to_world(-length / 2, half)])))
        share = budget if k == n_streets - 1 else int(rng.integers(min(2, budget), budget + 1))
        budget -= share
        for i in range(share):
            sign = 1 if (i % 2 == 0) ^ (rng.random() < 0.1) else -1
            row_idx = i // 2
            per_row = max(1, (share + 1) // 2)
            seg = length / per_row
            s0 = -length / 2 + row_idx * seg + rng.uniform(-1, 1)
            s1 = s0 + seg - rng.choice([rng.uniform(0.2, 3), rng.uniform(3, 15)], p=[0.95, 0.05])
            if rng.random() < 0.05:
                s1 = s0 + seg * rng.uniform(0.2, 0.6)
            offset = rng.choice([rng.uniform(0.1, 2.9), rng.uniform(3.1, 8.0), -rng.uniform(0.5, 3)],
                                p=[0.9, 0.05, 0.05])
            depth = rng.uniform(6, 20)
            t0 = sign * (half + offset)
            t1 = sign * (half + offset + depth)
            ring = [to_world(s0, t0), to_world(s1, t0), to_world(s1, t1), to_world(s0, t1)]
            h = float(rng.choice([rng.uniform(5, 90), 80.0, 40.0]))
            buildings.append(CgBuilding(f"b{k}_{i}", Polygon2D.from_points(ring), h))
    return CityModel(tuple(buildings), tuple(streets), "random")


def ns_canyon(west_heights, east_heights, width=40.0, length=100.0):
    """North-south surface street with one building row filling each side."""
    half = width / 2

    def rect(x0, y0, x1, y1):
        return Polygon2D.from_points([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    def row(prefix, x0, x1, hs):
        seg = length / len(hs)
        return [CgBuilding(f"{prefix}{i}", rect(x0, i * seg, x1, (i + 1) * seg - 1), float(h))
                for i, h in enumerate(hs)]

    west = row("W", -half - 15, -half - 1, west_heights)
    east = row("E", half + 1, half + 15, east_heights)
    return CityModel(tuple(west + east), (CgStreet("s", surface=rect(-half, 0, half, length)),))


def rotate_point(p, angle_deg, dx=0.0, dy=0.0):
    r = math.radians(angle_deg)
    # clockwise rotation keeps bearings (clockwise from north) additive
    c, s = math.cos(r), math.sin(r)
    x, y = p[0], p[1]
    out = (x * c + y * s + dx, -x * s + y * c + dy)
    return out + tuple(p[2:]) if len(p) > 2 else out


def transform_model(model: CityModel, angle_deg=0.0, dx=0.0, dy=0.0, scale=1.0, dz=0.0) -> CityModel:
    """Rotate clockwise by ``angle_deg``, translate, and scale geometry and heights together."""
    def tp(p):
        q = rotate_point((p[0] * scale, p[1] * scale), angle_deg, dx, dy)
        return q if len(p) == 2 else q + (p[2] * scale + dz,)

    buildings = tuple(
        CgBuilding(b.id, Polygon2D.from_points([tp(p) for p in b.footprint.exterior]),
                   b.measured_height * scale,
                   tuple(Polygon3D.from_points([tp(p) for p in r.ring]) for r in b.roof_surfaces),
                   b.wall_material, b.wall_color)
        for b in model.buildings)
    streets = []
    for s in model.streets:
        if s.surface is not None:
            streets.append(CgStreet(s.id, surface=Polygon2D.from_points([tp(p) for p in s.surface.exterior]),
                                    name=s.name))
        else:
            streets.append(CgStreet(s.id, centerline=tuple(tp(p) for p in s.centerline),
                                    nominal_width=s.nominal_width * scale, name=s.name))
    return CityModel(buildings, tuple(streets), model.source_name)
