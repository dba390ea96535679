#!/usr/bin/env python3
"""Builds the bundled scene files in data/scenes.

Each map is a small road network (6 m roads with 2 m sidewalks) plus
buildings, vegetation, street furniture and parked or walking traffic.
Obstacles carry a density level: 0 always present, 1 from "moderate",
2 only in "dense". Routes are road-centerline polylines with rounded
corners, sampled into route points 12 m apart.
"""

import argparse
import json
import math
import random
from pathlib import Path

from shapely.geometry import LineString, Point, Polygon, box
from shapely.ops import unary_union
from shapely import affinity

ROAD_WIDTH = 6.0
SIDEWALK = 2.0
ROUTE_GAP = 12.0
FILLET = 6.0
METERS_PER_DEG_LAT = 40_008_000.0 / 360.0
METERS_PER_DEG_LON_EQ = 40_075_000.0 / 360.0

ROAD, PARKING, SIDEWALK_CLS, TERRAIN = 9, 10, 11, 17
CAR, BICYCLE, TRUCK, OTHER_VEHICLE, PERSON = 1, 2, 4, 5, 6
BUILDING, FENCE, VEGETATION, TRUNK, POLE, SIGN = 13, 14, 15, 16, 18, 19


def arc(center, radius, a0, a1, step_deg=6.0):
    n = max(2, int(abs(a1 - a0) / step_deg) + 1)
    return [(center[0] + radius * math.cos(math.radians(a0 + (a1 - a0) * i / (n - 1))),
             center[1] + radius * math.sin(math.radians(a0 + (a1 - a0) * i / (n - 1))))
            for i in range(n)]


def strip(points, width):
    """Segment rectangles with square caps so joints and corners are filled."""
    pieces = []
    for a, b in zip(points, points[1:]):
        pieces.append(LineString([a, b]).buffer(width / 2.0, cap_style=3, join_style=2))
    return pieces


def fillet_path(corners, radius=FILLET, step=0.5):
    """Dense polyline through `corners` with circular fillets at each bend."""
    pts = [corners[0]]
    for i in range(1, len(corners) - 1):
        p0, p1, p2 = map(lambda c: complex(*c), corners[i - 1:i + 2])
        d0 = (p1 - p0) / abs(p1 - p0)
        d1 = (p2 - p1) / abs(p2 - p1)
        turn = math.atan2((d1 / d0).imag, (d1 / d0).real)
        if abs(turn) < 1e-6:
            pts.append(corners[i])
            continue
        cut = radius * math.tan(abs(turn) / 2.0)
        cut = min(cut, abs(p1 - p0) / 2.0, abs(p2 - p1) / 2.0)
        r = cut / math.tan(abs(turn) / 2.0)
        start = p1 - d0 * cut
        normal = d0 * (1j if turn > 0 else -1j)
        center = start + normal * r
        a0 = math.atan2((start - center).imag, (start - center).real)
        n = max(2, int(abs(turn) * r / step) + 1)
        for k in range(n):
            a = a0 + turn * k / (n - 1)
            q = center + r * complex(math.cos(a), math.sin(a))
            pts.append((q.real, q.imag))
    pts.append(corners[-1])
    return densify(pts, step)


def densify(pts, step):
    out = [pts[0]]
    for a, b in zip(pts, pts[1:]):
        seg = math.dist(a, b)
        n = max(1, int(math.ceil(seg / step)))
        for k in range(1, n + 1):
            out.append((a[0] + (b[0] - a[0]) * k / n, a[1] + (b[1] - a[1]) * k / n))
    return [p for i, p in enumerate(out) if i == 0 or math.dist(p, out[i - 1]) > 1e-9]


def route_points(path, gap=ROUTE_GAP):
    """Points on the path whose consecutive Euclidean distance is `gap`."""
    pts = [path[0]]
    i = 0
    while True:
        anchor = pts[-1]
        found = None
        while i + 1 < len(path):
            a, b = path[i], path[i + 1]
            if math.dist(anchor, b) >= gap:
                # Solve |a + t (b - a) - anchor| = gap for t in [0, 1].
                dx, dy = b[0] - a[0], b[1] - a[1]
                fx, fy = a[0] - anchor[0], a[1] - anchor[1]
                qa = dx * dx + dy * dy
                qb = 2 * (fx * dx + fy * dy)
                qc = fx * fx + fy * fy - gap * gap
                t = (-qb + math.sqrt(max(qb * qb - 4 * qa * qc, 0.0))) / (2 * qa)
                found = (a[0] + t * dx, a[1] + t * dy)
                break
            i += 1
        if found is None:
            return pts
        pts.append(found)


def truncate_path(path, end):
    """Path up to the vertex nearest `end`, then `end` itself."""
    best = min(range(len(path)), key=lambda k: math.dist(path[k], end))
    out = path[:best]
    if not out or math.dist(out[-1], end) > 1e-9:
        out.append(end)
    return out


def to_geo(origin, p):
    # World +X is west, +Y north.
    east, north = -p[0], p[1]
    lat = origin[0] + north / METERS_PER_DEG_LAT
    lon = origin[1] + east / (METERS_PER_DEG_LON_EQ * math.cos(math.radians(origin[0])))
    return {"lat": lat, "lon": lon}


def rect(cx, cy, length, width, angle_deg):
    r = box(-length / 2, -width / 2, length / 2, width / 2)
    return affinity.translate(affinity.rotate(r, angle_deg, origin=(0, 0)), cx, cy)


def poly_coords(p):
    c = list(p.exterior.coords)[:-1]
    # Counter-clockwise, rounded for compact files.
    if Polygon(c).exterior.is_ccw is False:
        c = c[::-1]
    return [[round(x, 3), round(y, 3)] for x, y in c]


class MapBuilder:
    def __init__(self, name, origin, seed):
        self.name = name
        self.origin = origin
        self.rng = random.Random(seed)
        self.roads = []        # centerline point lists
        self.road_geoms = []
        self.sidewalk_geoms = []
        self.extra_regions = []  # (class, polygon)
        self.obstacles = []    # dicts with shapely polygon under "geom"
        self.routes = []       # dense paths

    def road(self, points):
        self.roads.append(points)
        self.road_geoms += strip(points, ROAD_WIDTH)
        self.sidewalk_geoms += strip(points, ROAD_WIDTH + 2 * SIDEWALK)

    def route(self, corners):
        self.routes.append(fillet_path(corners))

    def region(self, cls, geom):
        self.extra_regions.append((cls, geom))

    # Placement helpers -------------------------------------------------
    def free(self, geom, min_route_gap, min_center_gap=None, allow_walkable=False):
        if any(geom.intersects(o["geom"].buffer(0.3)) for o in self.obstacles):
            return False
        if self.route_union.distance(geom) < min_route_gap:
            return False
        if min_center_gap is not None and self.centerlines.distance(geom) < min_center_gap:
            return False
        if not allow_walkable and geom.intersects(self.walkable):
            return False
        return True

    def add(self, cls, geom, height, density=0, velocity=None, period=0.0):
        o = {"class": cls, "geom": geom, "height": round(height, 2), "density": density}
        if velocity is not None:
            o["velocity"] = [round(velocity[0], 3), round(velocity[1], 3)]
            o["period"] = period
        self.obstacles.append(o)

    def samples_along_roads(self, spacing):
        for pts in self.roads:
            for a, b in zip(pts, pts[1:]):
                seg = math.dist(a, b)
                d = ((b[0] - a[0]) / seg, (b[1] - a[1]) / seg)
                n = int(seg // spacing)
                for k in range(n):
                    s = (k + 0.5) * seg / max(n, 1)
                    yield (a[0] + d[0] * s, a[1] + d[1] * s), d

    def populate(self):
        self.road_union = unary_union(self.road_geoms)
        self.walkable = unary_union(self.road_geoms + self.sidewalk_geoms +
                                    [g for c, g in self.extra_regions if c == PARKING])
        self.route_union = unary_union([LineString(r) for r in self.routes])
        self.centerlines = unary_union([LineString(r) for r in self.roads])
        rng = self.rng
        side_off = ROAD_WIDTH / 2 + SIDEWALK

        # Buildings set back from the sidewalks.
        for (p, d) in self.samples_along_roads(16.0):
            for side in (-1, 1):
                if rng.random() < 0.25:
                    continue
                n = (-d[1] * side, d[0] * side)
                depth = rng.uniform(6, 10)
                length = rng.uniform(8, 14)
                off = side_off + rng.uniform(2.0, 5.0) + depth / 2
                c = (p[0] + n[0] * off, p[1] + n[1] * off)
                g = rect(c[0], c[1], length, depth, math.degrees(math.atan2(d[1], d[0])))
                if self.free(g, 6.0):
                    self.add(BUILDING, g, rng.uniform(5, 12))

        # Trees, bushes and fences just off the sidewalks.
        for (p, d) in self.samples_along_roads(7.0):
            side = rng.choice((-1, 1))
            n = (-d[1] * side, d[0] * side)
            off = side_off + rng.uniform(0.8, 1.6)
            c = (p[0] + n[0] * off, p[1] + n[1] * off)
            kind = rng.random()
            if kind < 0.45:
                g = rect(c[0], c[1], 0.4, 0.4, rng.uniform(0, 90))
                if self.free(g, 3.0):
                    self.add(TRUNK, g, rng.uniform(2.5, 4.0))
                    crown = Point(c).buffer(1.1, 6)
                    crown = affinity.translate(crown, n[0] * 1.3, n[1] * 1.3)
                    if self.free(crown, 3.5):
                        self.add(VEGETATION, crown.convex_hull, rng.uniform(1.0, 1.6))
            elif kind < 0.7:
                g = rect(c[0], c[1], rng.uniform(1.5, 3.0), rng.uniform(1.0, 1.6),
                         math.degrees(math.atan2(d[1], d[0])))
                if self.free(g, 3.0):
                    self.add(VEGETATION, g, rng.uniform(0.8, 1.4))
            else:
                g = rect(c[0], c[1], rng.uniform(4.0, 6.5), 0.2, math.degrees(math.atan2(d[1], d[0])))
                if self.free(g, 3.0):
                    self.add(FENCE, g, rng.uniform(1.0, 1.5))

        # Poles and signs on the sidewalk edge.
        for (p, d) in self.samples_along_roads(15.0):
            side = rng.choice((-1, 1))
            n = (-d[1] * side, d[0] * side)
            off = ROAD_WIDTH / 2 + rng.uniform(0.4, 1.0)
            c = (p[0] + n[0] * off, p[1] + n[1] * off)
            cls = POLE if rng.random() < 0.6 else SIGN
            g = rect(c[0], c[1], 0.25, 0.25, 0)
            if self.free(g, 2.5, allow_walkable=True):
                self.add(cls, g, 4.5 if cls == POLE else 2.2)

        # Parked vehicles at the road edge (moderate and dense traffic).
        for (p, d) in self.samples_along_roads(9.0):
            if rng.random() < 0.45:
                continue
            side = rng.choice((-1, 1))
            n = (-d[1] * side, d[0] * side)
            density = 1 if rng.random() < 0.5 else 2
            truck = density == 2 and rng.random() < 0.3
            width = 2.3 if truck else 1.8
            length = 6.5 if truck else rng.uniform(3.8, 4.6)
            off = ROAD_WIDTH / 2 - width / 2 - 0.05
            c = (p[0] + n[0] * off, p[1] + n[1] * off)
            g = rect(c[0], c[1], length, width, math.degrees(math.atan2(d[1], d[0])))
            if self.free(g, 1.05, min_center_gap=1.05, allow_walkable=True):
                if truck:
                    self.add(TRUCK, g, 3.0, density)
                else:
                    self.add(CAR if rng.random() < 0.85 else OTHER_VEHICLE, g, rng.uniform(1.4, 1.7), density)

        # People and bicycles on the sidewalks; some walk back and forth.
        for (p, d) in self.samples_along_roads(6.0):
            if rng.random() < 0.5:
                continue
            side = rng.choice((-1, 1))
            n = (-d[1] * side, d[0] * side)
            off = ROAD_WIDTH / 2 + rng.uniform(0.6, 1.4)
            c = (p[0] + n[0] * off, p[1] + n[1] * off)
            density = 1 if rng.random() < 0.4 else 2
            if rng.random() < 0.3:
                g = rect(c[0], c[1], 1.8, 0.6, math.degrees(math.atan2(d[1], d[0])))
                if self.free(g, 2.5, allow_walkable=True):
                    self.add(BICYCLE, g, 1.1, density)
                continue
            g = rect(c[0], c[1], 0.5, 0.5, 0)
            walking = density == 2 and rng.random() < 0.5
            if walking:
                speed = rng.uniform(0.5, 1.0) * rng.choice((-1, 1))
                period = 8.0
                sweep = LineString([c, (c[0] + d[0] * speed * period / 2, c[1] + d[1] * speed * period / 2)]).buffer(0.4)
                if self.free(sweep, 2.5, allow_walkable=True) and sweep.within(self.walkable) \
                        and not sweep.intersects(self.road_union):
                    self.add(PERSON, g, 1.7, density, (d[0] * speed, d[1] * speed), period)
            elif self.free(g, 2.5, allow_walkable=True) and not g.intersects(self.road_union):
                self.add(PERSON, g, rng.uniform(1.5, 1.85), density)

    def to_json(self):
        self.populate()
        regions = []
        for cls, g in self.extra_regions:
            if cls != PARKING:
                regions.append({"class": cls, "polygon": poly_coords(g)})
        for cls, g in self.extra_regions:
            if cls == PARKING:
                regions.append({"class": cls, "polygon": poly_coords(g)})
        for g in self.sidewalk_geoms:
            regions.append({"class": SIDEWALK_CLS, "polygon": poly_coords(g)})
        for g in self.road_geoms:
            regions.append({"class": ROAD, "polygon": poly_coords(g)})

        routes, paths = [], []
        for dense in self.routes:
            pts = route_points(dense)
            path = truncate_path(dense, pts[-1])
            routes.append([to_geo(self.origin, p) for p in pts])
            paths.append([[round(x, 4), round(y, 4)] for x, y in path])
        obstacles = []
        for o in self.obstacles:
            j = {k: v for k, v in o.items() if k != "geom"}
            j["polygon"] = poly_coords(o["geom"].convex_hull)
            obstacles.append(j)
        return {
            "name": self.name,
            "origin": {"lat": self.origin[0], "lon": self.origin[1]},
            "default_class": 12,
            "regions": regions,
            "obstacles": obstacles,
            "routes": routes,
            "route_paths": paths,
        }


def campus_a():
    m = MapBuilder("campus_a", (43.0712, 12.3851), 11)
    m.road([(-80, 0), (80, 0)])
    m.road([(-30, 0), (-30, 70)])
    m.road([(30, -60), (30, 0)])
    m.road([(-30, 70), (50, 70)])
    m.road([(50, 70), (50, 0)])
    m.region(TERRAIN, box(-24, 8, 44, 62))
    m.region(PARKING, box(-70, -20, -45, -3))
    m.route([(-75, 0), (-30, 0), (-30, 50)])
    m.route([(-30, 30), (-30, 70), (20, 70)])
    m.route([(72, 0), (0, 0)])
    m.route([(30, -55), (30, 0), (75, 0)])
    m.route([(0, 70), (-30, 70), (-30, 12)])
    m.route([(30, -50), (30, 0), (-15, 0)])
    return m


def campus_b():
    m = MapBuilder("campus_b", (43.0751, 12.3912), 23)
    bend = arc((60, 25), 25, -90, 0)
    m.road([(-60, 0), (60, 0)])
    m.road([(0, 0), (0, -60)])
    m.road(bend + [(85, 80)])
    m.road([(-60, 0), (-60, 60)])
    m.road([(-60, 60), (40, 60)])
    m.road([(0, 60), (0, 100)])
    m.region(TERRAIN, box(-54, 7, -6, 54))
    m.region(PARKING, box(8, 8, 40, 30))
    m.route([(-40, 0)] + bend + [(85, 50)])
    m.route([(-20, 60), (-60, 60), (-60, 0), (-30, 0)])
    m.route([(0, -55), (0, 0), (45, 0)])
    m.route([(45, 0), (-25, 0)])
    m.route([(35, 60), (0, 60), (0, 95)])
    m.route([(85, 72)] + bend[::-1] + [(15, 0)])
    return m


def campus_c():
    m = MapBuilder("campus_c", (43.0803, 12.3774), 37)
    m.road([(-75, 0), (75, 0)])
    m.road([(-20, 0), (-20, 60)])
    m.road([(40, 0), (40, -60)])
    m.road([(-20, 60), (55, 60)])
    m.road([(40, -60), (-15, -60)])
    m.region(TERRAIN, box(-13, 7, 50, 53))
    m.region(PARKING, box(-60, -25, -30, -4))
    m.route([(-65, 0), (-20, 0), (-20, 45)])
    m.route([(68, 0), (40, 0), (40, -50)])
    m.route([(-20, 12), (-20, 60), (45, 60)])
    m.route([(40, -30), (40, -60), (-8, -60)])
    m.route([(-8, 0), (68, 0)])
    m.route([(45, 60), (-20, 60), (-20, 0), (-62, 0)])
    return m


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "scenes"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for build in (campus_a, campus_b, campus_c):
        m = build()
        scene = m.to_json()
        path = out / f"{m.name}.json"
        path.write_text(json.dumps(scene, indent=1) + "\n")
        counts = [sum(1 for o in scene["obstacles"] if o["density"] <= k) for k in range(3)]
        print(f"{path}: {len(scene['routes'])} routes, obstacles by condition {counts}, "
              f"route points {[len(r) for r in scene['routes']]}")


if __name__ == "__main__":
    main()
