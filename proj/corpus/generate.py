#!/usr/bin/env python3
"""Regenerates the fixture surfaces in this directory."""

import json
import math
from fractions import Fraction as F
from pathlib import Path

HERE = Path(__file__).resolve().parent


def fmt(q):
    q = F(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def polygon_from_sides(start, sides):
    pts = [tuple(map(F, start))]
    for dx, dy in sides[:-1]:
        x, y = pts[-1]
        pts.append((x + F(dx), y + F(dy)))
    return pts


def write(name, polygons, gluings, marked=(), boundary=(), comment=None, extra=None):
    doc = {}
    if comment:
        doc["comment"] = comment
    doc["polygons"] = [[[fmt(x), fmt(y)] for x, y in p] for p in polygons]
    doc["gluings"] = [{"from": list(a), "to": list(b)} for a, b in gluings]
    doc["marked_points"] = [list(m) for m in marked]
    doc["boundary"] = [list(b) for b in boundary]
    if extra:
        doc.update(extra)
    (HERE / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")


def rect(w, h):
    return [(F(0), F(0)), (F(w), F(0)), (F(w), F(h)), (F(0), F(h))]


def rational_dir(t):
    q = t / (math.pi / 4)
    if abs(q - round(q)) < 1e-12:
        tab = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
        return tuple(map(F, tab[round(q) % 8]))
    return (F(math.cos(t)).limit_denominator(10**9), F(math.sin(t)).limit_denominator(10**9))


def dilation_cylinder(theta, lam):
    k = max(1, math.ceil(theta / (math.pi / 2) - 1e-12))
    rays = [rational_dir(theta * i / k) for i in range(k + 1)]
    lam = F(lam)
    verts = [rays[0]] + [(lam * x, lam * y) for x, y in rays] + [rays[i] for i in range(k, 0, -1)]
    n = len(verts)
    gl = [((0, n - 1 - i), (0, 1 + i)) for i in range(k)]
    return verts, gl, [(0, 0), (0, k + 1)]


def main():
    write("square_torus", [rect(1, 1)], [((0, 3), (0, 1)), ((0, 0), (0, 2))], marked=[(0, 0)],
          comment="unit square, opposite sides glued by translation, one marked point")
    write("rect_torus_2x1", [rect(2, 1)], [((0, 3), (0, 1)), ((0, 0), (0, 2))], marked=[(0, 0)],
          comment="2x1 rectangle torus with one marked point")
    write("rect_torus_2x1_long", [[(0, 0), (2, 0), (4, 1)], [(0, 0), (4, 1), (2, 1)]],
          [((0, 0), (1, 1)), ((0, 1), (1, 2)), ((0, 2), (1, 0))], marked=[(0, 0)],
          comment="the 2x1 torus as two triangles split along the long diagonal (4,1)")
    hexa = polygon_from_sides((0, 0), [(2, 0), (1, 1), (0, 1), (-2, 0), (-1, -1), (0, -1)])
    write("hexagon_torus", [hexa], [((0, i), (0, i + 3)) for i in range(3)], marked=[(0, 0), (0, 1)],
          comment="centrally symmetric hexagon, opposite sides glued, both vertex classes marked")
    dt = polygon_from_sides((0, 0), [(1, 0), (0, 1), (-1, 1), (F(-1, 2), 0), (0, F(-3, 2)), (F(1, 2), F(-1, 2))])
    write("dilation_torus", [dt], [((0, i), (0, i + 3)) for i in range(3)], marked=[(0, 0), (0, 1)],
          comment="hexagon with opposite sides glued by dilations of ratios 1/2, 3/2, 1/2")
    for name, theta, lam in [("cylinder_pi3", math.pi / 3, 3), ("cylinder_pi2", math.pi / 2, 2), ("cylinder_pi", math.pi, 2)]:
        v, gl, bd = dilation_cylinder(theta, lam)
        write(name, [v], gl, boundary=bd, comment=f"dilation cylinder, angle {theta:.6f}, multiplier {lam}")

    # two pentagons: P with sides z_i, Q with sides -c_i z_i, side i of P glued to side i of Q
    z = [(2, 0), (1, 2), (-2, 1), (-2, -1), (1, -2)]
    c = [F(1), F(2), F(1), F(9, 5), F(8, 5)]
    P = polygon_from_sides((0, 0), z)
    Q = polygon_from_sides((0, 0), [(-ci * dx, -ci * dy) for ci, (dx, dy) in zip(c, z)])
    write("fig1_genus2", [P, Q], [((0, i), (1, i)) for i in range(5)],
          comment="two pentagons glued by dilations along parallel sides; genus 2, one singularity")

    # closed surface containing a dilation cylinder of angle pi (multiplier 2)
    H = [(F(1), F(0)), (F(2), F(0)), (F(0), F(2)), (F(-2), F(0)), (F(-1), F(0)), (F(0), F(1))]
    R = [(F(0), F(-1)), (F(3), F(-1)), (F(3), F(0)), (F(2), F(0)), (F(1), F(0)), (F(0), F(0))]
    write("pi_cylinder_closed", [H, R],
          [((0, 5), (0, 1)), ((0, 4), (0, 2)), ((0, 0), (1, 4)), ((0, 3), (1, 3)), ((1, 0), (1, 2)), ((1, 5), (1, 1))],
          comment="half-annulus of angle pi modulo z -> 2z, closed up by a slit rectangle")

    # L-shaped table of three unit squares: genus 2, one cone point of angle 6pi
    write("l_shape_genus2", [rect(1, 1), rect(1, 1), rect(1, 1)],
          [((0, 1), (1, 3)), ((1, 1), (0, 3)), ((2, 1), (2, 3)), ((0, 2), (2, 0)), ((2, 2), (0, 0)), ((1, 2), (1, 0))],
          comment="three unit squares in an L; a translation surface of genus 2 made of flat cylinders")


if __name__ == "__main__":
    main()
