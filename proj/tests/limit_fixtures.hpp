#pragma once
// Hand-built pre-limits. Degenerate faces are drawn thin but finite; their
// labels are given rather than measured.

#include <dilatone/exotic.hpp>

namespace dilatone::testing {

using LK = DegenerationLabel::Kind;

inline DegenerationLabel label(LK k, std::vector<int> long_sides = {})
{
    DegenerationLabel l;
    l.kind = k;
    l.long_sides = std::move(long_sides);
    return l;
}

/// A torus with one boundary side: sides 0,2 and 1,3 glued with ratio 2,
/// side 4 open.
inline Polygon holed_pentagon(int sign = 1)
{
    Scalar s(sign);
    return Polygon{{{0, 0}, {s, 0}, {s, s}, {-s, s}, {-s, s / 2}}};
}

/// Parallelogram spanned by (len, 0) and w.
inline Polygon sliver(const Scalar& len, const Vector& w) { return Polygon{{{0, 0}, {len, 0}, Point(len, 0) + w, Point(0, 0) + w}}; }

struct FaceSet {
    std::vector<LimitFace> faces;
    std::vector<std::pair<SideRef, SideRef>> pairings;

    void pair(int p, int s, int q, int t) { pairings.push_back({{p, s}, {q, t}}); }
    PreLimit prelimit() const { return assemble_prelimit(faces, pairings); }
};

/// Two holed tori whose boundary sides sit at the two ends of a pair of thin
/// slivers glued into a flat cylinder.
inline FaceSet two_tori_c_edge()
{
    Vector w{frac(-1, 100), frac(1, 200)};
    FaceSet f;
    f.faces = {{holed_pentagon(1), label(LK::Convergent)},
               {holed_pentagon(-1), label(LK::Convergent)},
               {sliver(4, w), label(LK::Type2, {0, 2})},
               {sliver(4, w), label(LK::Type2, {0, 2})}};
    for (int p : {0, 1}) {
        f.pair(p, 0, p, 2);
        f.pair(p, 1, p, 3);
    }
    f.pair(2, 0, 3, 2);
    f.pair(2, 2, 3, 0);
    f.pair(0, 4, 2, 1);
    f.pair(1, 4, 3, 3);
    f.pair(2, 3, 3, 1);
    return f;
}

/// Flat triangle with long side 0 along v.
inline Polygon flat_triangle(const Vector& v)
{
    Vector n = rot90(v) / 100;
    return Polygon{{{0, 0}, Point(0, 0) + v, Point(0, 0) + v / 2 + n}};
}

/// A core triangle whose three sides meet three one-long-side triangles
/// glued long side to short side in a cycle.
inline FaceSet cyclic_type1()
{
    FaceSet f;
    f.faces = {{Polygon{{{0, 0}, {1, 0}, {0, 1}}}, label(LK::Convergent)}};
    for (int k = 0; k < 3; ++k) f.faces.push_back({flat_triangle({1, 0}), label(LK::Type1, {0})});
    for (int k = 0; k < 3; ++k) {
        f.pair(1 + k, 0, 1 + (k + 1) % 3, 1);
        f.pair(1 + k, 2, 0, k);
    }
    return f;
}

/// The two holed tori of `two_tori_c_edge` closed up by a cycle of two one-long-side
/// triangles instead of the slivers.
inline FaceSet tori_and_hole()
{
    FaceSet f;
    f.faces = {{holed_pentagon(1), label(LK::Convergent)},
               {holed_pentagon(-1), label(LK::Convergent)},
               {flat_triangle({1, 0}), label(LK::Type1, {0})},
               {flat_triangle({1, 0}), label(LK::Type1, {0})}};
    for (int p : {0, 1}) {
        f.pair(p, 0, p, 2);
        f.pair(p, 1, p, 3);
    }
    f.pair(2, 0, 3, 1);
    f.pair(3, 0, 2, 1);
    f.pair(2, 2, 0, 4);
    f.pair(3, 2, 1, 4);
    return f;
}

/// A square whose horizontal sides both meet a thin sliver.
inline FaceSet edge_on_polygon()
{
    FaceSet f;
    f.faces = {{Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}, label(LK::Convergent)},
               {sliver(1, Vector(0, frac(1, 100))), label(LK::Type2, {0, 2})}};
    f.pair(0, 1, 0, 3);
    f.pair(1, 0, 0, 2);
    f.pair(1, 2, 0, 0);
    f.pair(1, 1, 1, 3);
    return f;
}

/// A square with a one-long-side triangle on its bottom side; the first
/// short side of the triangle meets the top side, the second stays open.
inline FaceSet subdivided_square()
{
    FaceSet f;
    f.faces = {{Polygon{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}}, label(LK::Convergent)},
               {Polygon{{{1, 0}, {0, 0}, {frac(1, 2), frac(-1, 100)}}}, label(LK::Type1, {0})}};
    f.pair(0, 1, 0, 3);
    f.pair(1, 0, 0, 0);
    f.pair(1, 1, 0, 2);
    return f;
}

}  // namespace dilatone::testing
