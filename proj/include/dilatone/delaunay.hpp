#pragma once
// Delaunay polygonations by exact Lawson flips on a geodesic triangulation, with
// cocircular triangles merged into faces afterwards.

#include "cylinders.hpp"
#include "surface.hpp"
#include "tracer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace dilatone {

/// Triangles in their own charts; side k runs from corner k to corner k+1.
struct GeodesicTriangulation {
    std::vector<std::array<Point, 3>> tri;
    std::vector<std::array<Gluing, 3>> adj;  ///< map: this chart -> partner chart
    std::vector<std::array<int, 3>> vertex;  ///< vertex cycle of the source surface
    std::vector<bool> marked;                ///< by vertex cycle
    std::vector<bool> removable;             ///< regular vertices still to be removed

    int size() const { return static_cast<int>(tri.size()); }
    const Point& at(int t, int k) const { return tri[static_cast<std::size_t>(t)][static_cast<std::size_t>((k % 3 + 3) % 3)]; }
    Gluing& glue(SideRef s) { return adj[static_cast<std::size_t>(s.polygon)][static_cast<std::size_t>(s.side)]; }
    const Gluing& glue(SideRef s) const { return adj[static_cast<std::size_t>(s.polygon)][static_cast<std::size_t>(s.side)]; }
    int vertex_at(int t, int k) const { return vertex[static_cast<std::size_t>(t)][static_cast<std::size_t>((k % 3 + 3) % 3)]; }

    /// Canonical representative of the edge through side s.
    SideRef edge_key(SideRef s) const { return std::min(s, glue(s).to); }

    /// The opposite vertex of the partner triangle, in the chart of s.polygon.
    Point opposite(SideRef s) const
    {
        const auto& g = glue(s);
        return invert(g.map)(at(g.to.polygon, g.to.side + 2));
    }

    /// Sign of the incircle test of the edge at s: +1 when it is not locally Delaunay.
    int edge_incircle(SideRef s) const
    {
        return incircle(at(s.polygon, s.side), at(s.polygon, s.side + 1), at(s.polygon, s.side + 2), opposite(s));
    }

    std::vector<SideRef> edges() const
    {
        std::vector<SideRef> out;
        for (int t = 0; t < size(); ++t)
            for (int k = 0; k < 3; ++k)
                if (edge_key({t, k}) == SideRef{t, k}) out.push_back({t, k});
        return out;
    }

    SurfaceSpec to_spec() const
    {
        SurfaceSpec sp;
        for (int t = 0; t < size(); ++t) {
            Polygon p;
            p.vertices.assign(tri[static_cast<std::size_t>(t)].begin(), tri[static_cast<std::size_t>(t)].end());
            sp.polygons.push_back(std::move(p));
        }
        for (auto e : edges()) {
            sp.pairings.push_back({e, glue(e).to});
            sp.declared_ratios.push_back(std::nullopt);
        }
        std::set<int> seen;
        for (int t = 0; t < size(); ++t)
            for (int k = 0; k < 3; ++k) {
                int v = vertex_at(t, k);
                if (marked[static_cast<std::size_t>(v)] && seen.insert(v).second) sp.marked_points.push_back({t, k});
            }
        return sp;
    }
    DilationSurface surface() const { return DilationSurface::from_spec(to_spec()); }
};

namespace delaunay_detail {

struct Rewire {
    SideRef old_side, new_side;
    DilationMap chart;  ///< old chart -> new chart
};

/// Reconnects the outer sides of a local move. Every old side in `moves` is replaced by
/// its new side; partners outside the move keep their place and get the new map.
inline void rewire(GeodesicTriangulation& T, const std::vector<Rewire>& moves, const std::vector<Gluing>& before)
{
    auto find = [&](SideRef s) -> const Rewire* {
        for (const auto& m : moves)
            if (m.old_side == s) return &m;
        return nullptr;
    };
    for (std::size_t i = 0; i < moves.size(); ++i) {
        const auto& m = moves[i];
        const Gluing& g = before[i];
        DilationMap from_new = invert(m.chart);
        if (const Rewire* y = find(g.to)) {
            T.glue(m.new_side) = {y->new_side, compose(y->chart, compose(g.map, from_new))};
        } else {
            DilationMap mm = compose(g.map, from_new);
            T.glue(m.new_side) = {g.to, mm};
            T.glue(g.to) = {m.new_side, invert(mm)};
        }
    }
}

inline std::vector<Gluing> snapshot(const GeodesicTriangulation& T, const std::vector<Rewire>& moves)
{
    std::vector<Gluing> out;
    for (const auto& m : moves) out.push_back(T.glue(m.old_side));
    return out;
}

}  // namespace delaunay_detail

/// Flips the edge at side e inside its developed quadrilateral. Returns false when the
/// quadrilateral is not strictly convex or both sides belong to one triangle.
inline bool flip_edge(GeodesicTriangulation& T, SideRef e)
{
    using namespace delaunay_detail;
    const int t = e.polygon, i = e.side;
    const Gluing g = T.glue(e);
    const int u = g.to.polygon, j = g.to.side;
    if (t == u) return false;
    const DilationMap back = invert(g.map);
    const Point A = T.at(t, i), B = T.at(t, i + 1), C = T.at(t, i + 2), D = back(T.at(u, j + 2));
    if (orient2d(A, D, C) <= 0 || orient2d(D, B, C) <= 0) return false;
    const int la = T.vertex_at(t, i), lb = T.vertex_at(t, i + 1), lc = T.vertex_at(t, i + 2), ld = T.vertex_at(u, j + 2);
    const DilationMap id;
    std::vector<Rewire> moves{
        {{u, (j + 1) % 3}, {t, 0}, back},
        {{t, (i + 2) % 3}, {t, 2}, id},
        {{u, (j + 2) % 3}, {u, 0}, back},
        {{t, (i + 1) % 3}, {u, 1}, id},
    };
    auto before = snapshot(T, moves);
    T.tri[static_cast<std::size_t>(t)] = {A, D, C};
    T.vertex[static_cast<std::size_t>(t)] = {la, ld, lc};
    T.tri[static_cast<std::size_t>(u)] = {D, B, C};
    T.vertex[static_cast<std::size_t>(u)] = {ld, lb, lc};
    T.glue({t, 1}) = {{u, 2}, id};
    T.glue({u, 2}) = {{t, 1}, id};
    rewire(T, moves, before);
    return true;
}

struct StarCorner {
    SideRef corner;   ///< triangle and corner index
    DilationMap dev;  ///< triangle chart -> chart of the first corner
};

/// Corners around the vertex at corner c, counterclockwise, developed into c's chart.
inline std::vector<StarCorner> star(const GeodesicTriangulation& T, SideRef c, int limit = 100000)
{
    std::vector<StarCorner> out{{c, DilationMap{}}};
    SideRef cur = c;
    DilationMap dev;
    for (int guard = 0; guard < limit; ++guard) {
        const Gluing& g = T.glue({cur.polygon, (cur.side + 2) % 3});
        dev = compose(dev, invert(g.map));
        cur = {g.to.polygon, g.to.side};
        if (cur == c) return out;
        out.push_back({cur, dev});
    }
    throw DomainError("vertex star does not close");
}

/// One step of removing a vertex of cone angle 2 pi and trivial holonomy. When the
/// vertex has no loop edges its star is retriangulated without it; otherwise an
/// incident edge is flipped, preferring flips whose new diagonal misses the vertex.
/// Returns the flipped side, or nothing once the vertex is gone.
inline std::optional<SideRef> removal_step(GeodesicTriangulation& T, int v)
{
    using namespace delaunay_detail;
    std::optional<SideRef> c;
    for (int t = 0; t < T.size() && !c; ++t)
        for (int k = 0; k < 3; ++k)
            if (T.vertex_at(t, k) == v) {
                c = SideRef{t, k};
                break;
            }
    if (!c) return std::nullopt;
    auto st = star(T, *c);
    const std::size_t n = st.size();
    if (n < 3) throw DomainError("regular vertex of degree below three");
    auto link = [&](std::size_t m) {
        const auto& sc = st[m % n];
        return T.vertex_at(sc.corner.polygon, sc.corner.side + 1);
    };
    std::set<int> slots;
    bool loops = false;
    for (std::size_t m = 0; m < n; ++m) {
        slots.insert(st[m].corner.polygon);
        loops = loops || link(m) == v;
    }
    if (loops || slots.size() != n) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t m = 0; m < n; ++m) {
                if (pass == 0 && (link(m + n - 1) == v || link(m + 1) == v)) continue;
                SideRef e = st[m].corner;
                if (flip_edge(T, e)) return e;
            }
        throw DomainError("regular vertex could not be removed");
    }

    // the developed link is a simple polygon around the vertex: triangulate it
    Polygon link_poly;
    std::vector<int> labels;
    for (std::size_t m = 0; m < n; ++m) {
        const auto& sc = st[m];
        link_poly.vertices.push_back(sc.dev(T.at(sc.corner.polygon, sc.corner.side + 1)));
        labels.push_back(link(m));
    }
    auto ears = tracer_detail::triangulate_polygon(link_poly);
    std::vector<int> slot(slots.begin(), slots.end());
    std::map<std::pair<int, int>, SideRef> side_of;  // link edge (a, b) -> new side
    for (std::size_t e = 0; e < ears.size(); ++e)
        for (int k = 0; k < 3; ++k)
            side_of[{ears[e][static_cast<std::size_t>(k)], ears[e][static_cast<std::size_t>((k + 1) % 3)]}] = {slot[e], k};
    std::vector<Rewire> moves;
    for (std::size_t m = 0; m < n; ++m) {
        const auto& sc = st[m];
        int a = static_cast<int>(m), b = static_cast<int>((m + 1) % n);
        moves.push_back({{sc.corner.polygon, (sc.corner.side + 1) % 3}, side_of.at({a, b}), sc.dev});
    }
    auto before = snapshot(T, moves);
    for (std::size_t e = 0; e < ears.size(); ++e) {
        std::size_t sl = static_cast<std::size_t>(slot[e]);
        for (std::size_t k = 0; k < 3; ++k) {
            T.tri[sl][k] = link_poly.vertex(ears[e][k]);
            T.vertex[sl][k] = labels[static_cast<std::size_t>(ears[e][k])];
        }
    }
    for (const auto& [ab, sd] : side_of) {
        auto [a, b] = ab;
        if ((a + 1) % static_cast<int>(n) != b) T.glue(sd) = {side_of.at({b, a}), DilationMap{}};
    }
    rewire(T, moves, before);
    // drop the two unused slots, moving the last triangles into them
    std::vector<int> gone(slot.begin() + static_cast<std::ptrdiff_t>(ears.size()), slot.end());
    std::sort(gone.rbegin(), gone.rend());
    for (int d : gone) {
        int last = T.size() - 1;
        if (d != last) {
            T.tri[static_cast<std::size_t>(d)] = T.tri[static_cast<std::size_t>(last)];
            T.vertex[static_cast<std::size_t>(d)] = T.vertex[static_cast<std::size_t>(last)];
            T.adj[static_cast<std::size_t>(d)] = T.adj[static_cast<std::size_t>(last)];
            for (int k = 0; k < 3; ++k) {
                SideRef to = T.adj[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)].to;
                // a side of `last` glued to another side of `last`
                if (to.polygon == last) {
                    to.polygon = d;
                    T.adj[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)].to = to;
                }
                T.glue(to).to = {d, k};
            }
        }
        T.tri.pop_back();
        T.vertex.pop_back();
        T.adj.pop_back();
    }
    return std::nullopt;
}

struct TriangulationOptions {
    /// Keep vertices that are neither singular nor marked, to be flipped away by
    /// flip_to_delaunay, instead of failing.
    bool remove_regular = false;
};

inline GeodesicTriangulation initial_triangulation(const DilationSurface& s, const TriangulationOptions& opt = {})
{
    if (!s.closed()) throw DomainError("triangulation needs a closed surface");
    if (singularities(s).empty()) throw DomainError("needs at least one singularity");
    GeodesicTriangulation T;
    const auto& cycles = s.vertex_cycles();
    T.marked.resize(cycles.size());
    for (std::size_t i = 0; i < cycles.size(); ++i) T.marked[i] = cycles[i].marked;
    T.removable.assign(cycles.size(), false);
    for (int p = 0; p < s.polygon_count(); ++p)
        for (int v = 0; v < s.polygon(p).size(); ++v)
            if (!s.corner_singular({p, v})) {
                if (!opt.remove_regular) throw DomainError("vertices must be singular or marked");
                T.removable[static_cast<std::size_t>(s.cycle_of({p, v}))] = true;
            }

    // polygon side -> triangle side
    std::map<std::tuple<int, int, int>, SideRef> by_edge;
    for (int p = 0; p < s.polygon_count(); ++p) {
        const Polygon& P = s.polygon(p);
        for (auto tv : tracer_detail::triangulate_polygon(P)) {
            int id = T.size();
            std::array<Point, 3> pts;
            std::array<int, 3> lab;
            for (int k = 0; k < 3; ++k) {
                pts[static_cast<std::size_t>(k)] = P.vertex(tv[static_cast<std::size_t>(k)]);
                lab[static_cast<std::size_t>(k)] = s.cycle_of({p, tv[static_cast<std::size_t>(k)]});
                by_edge[{p, tv[static_cast<std::size_t>(k)], tv[static_cast<std::size_t>((k + 1) % 3)]}] = {id, k};
            }
            T.tri.push_back(pts);
            T.vertex.push_back(lab);
            T.adj.emplace_back();
        }
    }
    for (const auto& [key, side] : by_edge) {
        auto [p, a, b] = key;
        const int n = s.polygon(p).size();
        if ((a + 1) % n == b) {
            const auto& g = s.gluing({p, a});
            int n2 = s.polygon(g->to.polygon).size();
            T.glue(side) = {by_edge.at({g->to.polygon, g->to.side, (g->to.side + 1) % n2}), g->map};
        } else {
            T.glue(side) = {by_edge.at({p, b, a}), DilationMap{}};
        }
    }
    return T;
}

/// Side-count check against the complexity 4g - 4 + 2s.
inline bool euler_consistent(const GeodesicTriangulation& T, const Complexity& c) { return T.size() == c.n_triangles; }

// ---------------------------------------------------------------------------
// Polygonations

/// Relabeling-invariant code of a polygon gluing pattern.
struct PatternSignature {
    std::string code;
    friend bool operator==(const PatternSignature&, const PatternSignature&) = default;
};

struct DelaunayEdge {
    SideRef side, partner;
    Vector holonomy;  ///< side vector in the chart of side.polygon
};

struct DelaunayPolygonation {
    std::vector<Polygon> faces;
    std::vector<std::pair<SideRef, SideRef>> pairings;
    std::vector<std::vector<int>> vertex;  ///< source vertex cycle of each face corner
    std::vector<bool> marked;
    std::vector<DelaunayEdge> edges;
    PatternSignature pattern;
    GeodesicTriangulation triangulation;  ///< the final Delaunay triangulation
    int flips = 0;
    std::vector<SideRef> flip_trace;

    SurfaceSpec to_spec() const
    {
        SurfaceSpec sp;
        sp.polygons = faces;
        sp.pairings = pairings;
        sp.declared_ratios.assign(pairings.size(), std::nullopt);
        std::set<int> seen;
        for (std::size_t f = 0; f < faces.size(); ++f)
            for (std::size_t k = 0; k < vertex[f].size(); ++k)
                if (marked[static_cast<std::size_t>(vertex[f][k])] && seen.insert(vertex[f][k]).second)
                    sp.marked_points.push_back({static_cast<int>(f), static_cast<int>(k)});
        return sp;
    }
    DilationSurface surface() const { return DilationSurface::from_spec(to_spec()); }
};

/// Canonical relabelings of a gluing pattern. Each component lists every
/// (face, rotation) ordering that attains its minimal code; components are
/// sorted by code.
struct PatternLabeling {
    struct Component {
        std::string code;
        std::vector<std::vector<std::pair<int, int>>> optimal;
    };
    std::vector<Component> components;
    PatternSignature signature() const
    {
        PatternSignature sig;
        for (const auto& c : components) sig.code += c.code;
        return sig;
    }
};

inline PatternLabeling pattern_labeling(const std::vector<Polygon>& faces, const std::vector<std::pair<SideRef, SideRef>>& pairings)
{
    std::map<SideRef, SideRef> partner;
    for (auto [a, b] : pairings) {
        partner[a] = b;
        partner[b] = a;
    }
    const int nf = static_cast<int>(faces.size());
    std::vector<bool> done(static_cast<std::size_t>(nf));
    PatternLabeling out;
    for (int root = 0; root < nf; ++root) {
        if (done[static_cast<std::size_t>(root)]) continue;
        PatternLabeling::Component comp;
        bool have = false;
        std::set<int> members;
        for (int f0 = 0; f0 < nf; ++f0)
            for (int r0 = 0; r0 < faces[static_cast<std::size_t>(f0)].size(); ++r0) {
                // breadth-first relabeling from (f0, r0); a face entered through side s gets s as side 0
                std::map<int, std::pair<int, int>> label;  // face -> (label, rotation)
                std::vector<int> order{f0};
                label[f0] = {0, r0};
                std::string code;
                for (std::size_t q = 0; q < order.size(); ++q) {
                    int f = order[q];
                    int n = faces[static_cast<std::size_t>(f)].size();
                    int rot = label[f].second;
                    code += "(" + std::to_string(n);
                    for (int k = 0; k < n; ++k) {
                        SideRef sd{f, (rot + k) % n};
                        auto it = partner.find(sd);
                        if (it == partner.end()) {
                            code += " b";
                            continue;
                        }
                        SideRef o = it->second;
                        if (!label.count(o.polygon)) {
                            label[o.polygon] = {static_cast<int>(order.size()), o.side};
                            order.push_back(o.polygon);
                        }
                        auto [lab, orot] = label[o.polygon];
                        int on = faces[static_cast<std::size_t>(o.polygon)].size();
                        code += " " + std::to_string(lab) + ":" + std::to_string(((o.side - orot) % on + on) % on);
                    }
                    code += ")";
                }
                if (label.count(root) == 0) continue;
                std::vector<std::pair<int, int>> ordering;
                for (int f : order) ordering.push_back({f, label[f].second});
                if (!have || code < comp.code) {
                    comp.code = code;
                    comp.optimal.clear();
                }
                if (code == comp.code) comp.optimal.push_back(std::move(ordering));
                have = true;
                for (auto& [f, _] : label) members.insert(f);
            }
        for (int f : members) done[static_cast<std::size_t>(f)] = true;
        out.components.push_back(std::move(comp));
    }
    std::stable_sort(out.components.begin(), out.components.end(), [](const auto& x, const auto& y) { return x.code < y.code; });
    return out;
}

inline PatternSignature pattern_signature(const std::vector<Polygon>& faces, const std::vector<std::pair<SideRef, SideRef>>& pairings)
{
    return pattern_labeling(faces, pairings).signature();
}

inline PatternSignature pattern_signature(const DelaunayPolygonation& d) { return pattern_signature(d.faces, d.pairings); }

/// Merges triangles across cocircular edges into convex faces.
inline DelaunayPolygonation merge_cocircular(const GeodesicTriangulation& T)
{
    const int n = T.size();
    std::vector<int> face(static_cast<std::size_t>(n), -1);
    std::vector<DilationMap> dev(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> members;
    // an edge is interior to a face when it is cocircular and was used to develop
    std::set<SideRef> interior;
    for (int r = 0; r < n; ++r) {
        if (face[static_cast<std::size_t>(r)] >= 0) continue;
        int f = static_cast<int>(members.size());
        members.push_back({r});
        face[static_cast<std::size_t>(r)] = f;
        dev[static_cast<std::size_t>(r)] = DilationMap{};
        for (std::size_t q = 0; q < members.back().size(); ++q) {
            int t = members.back()[q];
            for (int k = 0; k < 3; ++k) {
                SideRef sd{t, k};
                if (T.edge_incircle(sd) != 0) continue;
                const Gluing& g = T.glue(sd);
                int u = g.to.polygon;
                DilationMap du = compose(dev[static_cast<std::size_t>(t)], invert(g.map));
                if (face[static_cast<std::size_t>(u)] < 0) {
                    face[static_cast<std::size_t>(u)] = f;
                    dev[static_cast<std::size_t>(u)] = du;
                    members.back().push_back(u);
                } else if (face[static_cast<std::size_t>(u)] != f || !(dev[static_cast<std::size_t>(u)] == du)) {
                    continue;
                }
                interior.insert(sd);
                interior.insert(g.to);
            }
        }
    }

    DelaunayPolygonation out;
    out.marked = T.marked;
    std::map<SideRef, SideRef> origin_to_face;  // triangle side -> face side
    for (std::size_t f = 0; f < members.size(); ++f) {
        // boundary sides of the face, chained end to start
        std::map<Point, std::pair<SideRef, Point>> next;
        for (int t : members[f])
            for (int k = 0; k < 3; ++k) {
                SideRef sd{t, k};
                if (interior.count(sd)) continue;
                const auto& d = dev[static_cast<std::size_t>(t)];
                next[d(T.at(t, k))] = {sd, d(T.at(t, k + 1))};
            }
        Polygon P;
        std::vector<int> lab;
        Point start = next.begin()->first, cur = start;
        do {
            auto [sd, to] = next.at(cur);
            origin_to_face[sd] = {static_cast<int>(f), P.size()};
            P.vertices.push_back(cur);
            lab.push_back(T.vertex_at(sd.polygon, sd.side));
            cur = to;
        } while (cur != start && P.size() <= static_cast<int>(next.size()));
        if (P.size() != static_cast<int>(next.size())) throw DomainError("merged face is not a disk");
        out.faces.push_back(std::move(P));
        out.vertex.push_back(std::move(lab));
    }
    for (const auto& [tri_side, fs] : origin_to_face) {
        SideRef other = origin_to_face.at(T.glue(tri_side).to);
        if (fs < other) {
            out.pairings.push_back({fs, other});
            const Polygon& P = out.faces[static_cast<std::size_t>(fs.polygon)];
            out.edges.push_back({fs, other, P.side_vector(fs.side)});
        }
    }
    out.pattern = pattern_signature(out.faces, out.pairings);
    out.triangulation = T;
    return out;
}

// ---------------------------------------------------------------------------
// Flipping

struct CylinderObstruction {
    Cylinder cylinder;
    int flips = 0;
    std::vector<SideRef> flip_trace;  ///< the last flips before the budget ran out
};

class FlipNonterminating : public DomainError {
public:
    FlipNonterminating(long budget, std::vector<SideRef> trace)
        : DomainError("flip nonterminating (budget " + std::to_string(budget) + ")"), trace_(std::move(trace)) {}
    const std::vector<SideRef>& flip_trace() const { return trace_; }

private:
    std::vector<SideRef> trace_;
};

using DelaunayResult = std::variant<DelaunayPolygonation, CylinderObstruction>;

inline long default_flip_budget(const GeodesicTriangulation& T) { return 50L * T.size() * T.size(); }

namespace delaunay_detail {

/// Looks for a dilation cylinder of angle >= pi through the closed leaves of a few
/// directions. The search runs on the triangulation before flipping, whose charts
/// are still tame; a flip cycle around such a cylinder shears them without bound.
inline std::optional<Cylinder> wide_cylinder(const GeodesicTriangulation& start)
{
    DilationSurface s = start.surface();
    Tracer tr(s);
    std::set<Itinerary> tried;
    for (int k = 0; k < 16; ++k) {
        Direction d(detail::rational_direction(k * std::numbers::pi / 8));
        EdgeMap em = edge_map(s, d);
        for (const auto& pt : periodic_points(em.branches, 16, false, 20000).points) {
            if (pt.multiplier == 1) continue;
            TraceOutcome o;
            try {
                o = tr.trace(em.polygon_at(pt.x), em.point_at(s, pt.x), d, 200);
            } catch (const DomainError&) {
                continue;
            }
            if (o.kind != TraceKind::ClosedUp) continue;
            if (!tried.insert(leaf_key(s, o.itinerary())).second) continue;
            Cylinder cyl;
            try {
                cyl = assemble_cylinder(s, o, 2000);
            } catch (const DomainError&) {
                continue;
            }
            if (std::isinf(cyl.modulus) || cyl.angle >= std::numbers::pi) return cyl;
        }
    }
    return std::nullopt;
}

}  // namespace delaunay_detail

/// Strict-incircle Lawson flips in a deterministic edge order, then cocircular merging.
inline DelaunayResult flip_to_delaunay(GeodesicTriangulation T, long flip_budget = -1)
{
    if (flip_budget < 0) flip_budget = default_flip_budget(T);
    const GeodesicTriangulation start = T;
    std::vector<SideRef> trace;
    long flips = 0;
    bool blocked = false;
    auto exhausted = [&]() -> DelaunayResult {
        std::vector<SideRef> recent(trace.end() - std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(trace.size()), 200), trace.end());
        std::reverse(recent.begin(), recent.end());
        if (auto cyl = delaunay_detail::wide_cylinder(start)) return CylinderObstruction{*cyl, static_cast<int>(flips), recent};
        throw FlipNonterminating(flip_budget, recent);
    };
    for (std::size_t v = 0; v < T.removable.size(); ++v) {
        if (!T.removable[v]) continue;
        while (true) {
            if (flips >= flip_budget) return exhausted();
            auto e = removal_step(T, static_cast<int>(v));
            if (!e) break;
            ++flips;
            trace.push_back(*e);
        }
        T.removable[v] = false;
    }
    std::set<SideRef> queue;
    for (auto e : T.edges()) queue.insert(e);
    while (!queue.empty()) {
        SideRef e = *queue.begin();
        queue.erase(queue.begin());
        e = T.edge_key(e);
        if (T.edge_incircle(e) <= 0) continue;
        if (flips >= flip_budget) return exhausted();
        const int t = e.polygon, u = T.glue(e).to.polygon;
        if (!flip_edge(T, e)) {
            blocked = true;
            continue;
        }
        ++flips;
        trace.push_back(e);
        for (int tt : {t, u})
            for (int k = 0; k < 3; ++k) queue.insert(T.edge_key({tt, k}));
    }
    if (blocked)
        for (auto e : T.edges())
            if (T.edge_incircle(e) > 0) throw DomainError("non-Delaunay edge cannot be flipped");
    DelaunayPolygonation d = merge_cocircular(T);
    d.flips = static_cast<int>(flips);
    d.flip_trace = std::move(trace);
    return d;
}

// ---------------------------------------------------------------------------
// Audits

/// Edges failing the non-strict empty-disk test (incircle <= 0 from both sides).
inline std::vector<SideRef> audit_edges(const GeodesicTriangulation& T)
{
    std::vector<SideRef> bad;
    for (auto e : T.edges())
        if (T.edge_incircle(e) > 0 || T.edge_incircle(T.glue(e).to) > 0) bad.push_back(e);
    return bad;
}

/// Violations of convexity, cocircularity and empty disks on the merged faces.
inline std::vector<std::string> audit_faces(const DelaunayPolygonation& d)
{
    std::vector<std::string> out;
    DilationSurface s = d.surface();
    for (int f = 0; f < static_cast<int>(d.faces.size()); ++f) {
        const Polygon& P = d.faces[static_cast<std::size_t>(f)];
        const std::string name = "face " + std::to_string(f);
        for (int k = 0; k < P.size(); ++k) {
            if (orient2d(P.vertex(k), P.vertex(k + 1), P.vertex(k + 2)) <= 0) out.push_back(name + " not strictly convex");
            if (incircle(P.vertex(0), P.vertex(1), P.vertex(2), P.vertex(k)) != 0) out.push_back(name + " not cocircular");
        }
        for (int k = 0; k < P.size(); ++k) {
            const auto& g = s.gluing({f, k});
            const Polygon& Q = s.polygon(g->to.polygon);
            DilationMap back = invert(g->map);
            for (const auto& q : Q.vertices)
                if (incircle(P.vertex(0), P.vertex(1), P.vertex(2), back(q)) > 0) out.push_back(name + " disk not empty across side " + std::to_string(k));
        }
    }
    return out;
}

}  // namespace dilatone
