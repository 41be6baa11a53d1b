"""Regenerate the bundled conformance corpus (XML + JSON twins).

    python scripts/make_corpus.py [outdir]

Each fixture is authored here as a CityModel and written in both encodings.
The XML of ``centerline_square`` additionally carries a city object and a
building attribute outside the subset, to exercise skip-with-warning.
"""

import json
import os
import sys

from aircanyon.citygml import (CgBuilding, CgStreet, CityModel, Polygon2D, Polygon3D,
                               model_to_json, write_citygml)

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_OUT = os.path.join(HERE, "..", "src", "aircanyon", "data", "corpus")


def rect(x0, y0, x1, y1):
    return Polygon2D.from_points([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def flat_roof(x0, y0, x1, y1, z):
    return Polygon3D.from_points([(x0, y0, z), (x1, y0, z), (x1, y1, z), (x0, y1, z)])


def canyon_80_40(with_east=True):
    """Two rows of four 80 m buildings (45 m frontage, 3 m gaps) 1 m off a 40 x 189 m street."""
    street = CgStreet("s-main", surface=rect(-20, 0, 20, 189), name="Canyon Street")
    buildings = []
    for k in range(4):
        y0, y1 = 48.0 * k, 48.0 * k + 45.0
        buildings.append(CgBuilding(
            f"W{k + 1}", rect(-35, y0, -21, y1), 80.0,
            roof_surfaces=(flat_roof(-35, y0, -21, y1, 80.0),) if k == 0 else (),
            wall_material="concrete"))
    if with_east:
        for k in range(4):
            y0, y1 = 48.0 * k, 48.0 * k + 45.0
            buildings.append(CgBuilding(
                f"E{k + 1}", rect(21, y0, 35, y1), 80.0,
                wall_material="brick" if k != 3 else None,
                wall_color=(200, 180, 160) if k == 3 else None))
    return CityModel(tuple(buildings), (street,), "canyon_80_40" if with_east else "one_sided")


def centerline_square():
    """East-west centerline street, 20 m wide; 30 m rows north, 24/36 m rows south."""
    street = CgStreet("s-ew", centerline=((0.0, 0.0), (60.0, 0.0), (120.0, 0.0)),
                      nominal_width=20.0, name="Ridge Lane")
    north = [(0, 38), (41, 79), (82, 120)]
    buildings = []
    for i, (x0, x1) in enumerate(north):
        roofs = ()
        if i == 1:
            # gable roof: two planes sloping 30 degrees each side of a ridge at y = 18
            import math
            rise = 7.0 * math.tan(math.radians(30))
            roofs = (
                Polygon3D.from_points([(x0, 11, 30), (x1, 11, 30), (x1, 18, 30 + rise), (x0, 18, 30 + rise)]),
                Polygon3D.from_points([(x0, 18, 30 + rise), (x1, 18, 30 + rise), (x1, 25, 30), (x0, 25, 30)]),
            )
        buildings.append(CgBuilding(f"N{i + 1}", rect(x0, 11, x1, 25), 30.0, roof_surfaces=roofs))
    buildings.append(CgBuilding("S1", rect(0, -25, 58, -11), 24.0, wall_material="stone"))
    buildings.append(CgBuilding("S2", rect(61, -25, 120, -11), 36.0, wall_color=(255, 255, 255)))
    return CityModel(tuple(buildings), (street,), "centerline_square")


def two_streets():
    """A canyon street plus a cross street lined on one side only, and a detached building."""
    main = CgStreet("a-main", surface=rect(0, -6, 100, 6), name="Main")
    cross = CgStreet("b-cross", centerline=((120.0, -60.0), (120.0, 60.0)), nominal_width=10.0)
    buildings = [
        CgBuilding("M1", rect(0, 8, 48, 20), 12.0),
        CgBuilding("M2", rect(52, 8, 100, 20), 18.0),
        CgBuilding("M3", rect(0, -20, 100, -8), 15.0),
        CgBuilding("C1", rect(127, -60, 140, 60), 9.0),
        CgBuilding("far", rect(300, 300, 320, 320), 40.0),
    ]
    return CityModel(tuple(buildings), (main, cross), "two_streets")


def empty():
    return CityModel((), (), "empty")


FIXTURES = [canyon_80_40(), canyon_80_40(with_east=False), centerline_square(), two_streets(), empty()]


def main(out=DEFAULT_OUT):
    os.makedirs(out, exist_ok=True)
    for model in FIXTURES:
        name = model.source_name
        xml = write_citygml(model)
        if name == "centerline_square":
            xml = xml.replace(
                b"<bldg:measuredHeight",
                b"<bldg:yearOfConstruction>1931</bldg:yearOfConstruction>\n      <bldg:measuredHeight", 1)
            xml = xml.replace(
                b"</core:CityModel>",
                b'  <core:cityObjectMember>\n    <frn:CityFurniture xmlns:frn="http://www.opengis.net/'
                b'citygml/cityfurniture/2.0" gml:id="bench-1" />\n  </core:cityObjectMember>\n'
                b"</core:CityModel>")
        with open(os.path.join(out, f"{name}.gml"), "wb") as fh:
            fh.write(xml)
        doc = model_to_json(model)
        doc.pop("source_name", None)
        with open(os.path.join(out, f"{name}.json"), "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {name}.gml / {name}.json")


if __name__ == "__main__":
    main(*sys.argv[1:])
