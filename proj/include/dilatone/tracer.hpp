#pragma once
// Straight-line flow of a fixed direction across the glued polygons.

#include "surface.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

namespace dilatone {

enum class TraceKind { ClosedUp, HitSingularity, HitBoundary, BudgetExhausted };

inline const char* to_string(TraceKind k)
{
    switch (k) {
    case TraceKind::ClosedUp: return "closed";
    case TraceKind::HitSingularity: return "singularity";
    case TraceKind::HitBoundary: return "boundary";
    case TraceKind::BudgetExhausted: return "budget";
    }
    return "?";
}

struct Crossing {
    SideRef side;  ///< side left through
    Point point;   ///< in the chart of side.polygon
};

struct Leg {
    int polygon = 0;
    Point from, to;
    DilationMap dev;  ///< leg chart -> start chart
};

struct TraceOutcome {
    TraceKind kind = TraceKind::BudgetExhausted;
    Direction dir;
    int start_polygon = 0;
    Point start;
    int crossings = 0;
    /// Scale of the developing map at the end (product of the inverse ratios of the
    /// crossed gluings). For a closed leaf this is its multiplier.
    Scalar accumulated_dilation = 1;
    DilationMap developing;  ///< current chart -> start chart
    std::vector<Crossing> path;
    std::vector<Leg> legs;
    int end_polygon = 0;
    Point end;
    std::optional<int> singularity;  ///< vertex cycle hit
    std::optional<CornerRef> end_corner;
    std::optional<SideRef> boundary_side;

    std::vector<SideRef> itinerary() const
    {
        std::vector<SideRef> out;
        for (const auto& c : path) out.push_back(c.side);
        return out;
    }
    /// End point minus start point, in the start chart.
    Vector developed() const { return developing(end) - start; }
};

namespace tracer_detail {

enum class Where { Inside, OnSide, AtVertex, Outside };

struct Location {
    Where where = Where::Outside;
    int index = -1;
};

inline bool on_segment(const Point& x, const Point& a, const Point& b)
{
    if (orient2d(a, b, x) != 0) return false;
    return sgn(dot(x - a, x - b)) <= 0;
}

inline Location locate(const Polygon& P, const Point& x)
{
    int n = P.size();
    for (int i = 0; i < n; ++i)
        if (P.vertex(i) == x) return {Where::AtVertex, i};
    for (int i = 0; i < n; ++i)
        if (on_segment(x, P.vertex(i), P.vertex(i + 1))) return {Where::OnSide, i};
    // crossing number with a horizontal ray to the right
    bool inside = false;
    for (int i = 0; i < n; ++i) {
        const Point& a = P.vertex(i);
        const Point& b = P.vertex(i + 1);
        if ((a.y > x.y) != (b.y > x.y)) {
            Scalar xi = a.x + (x.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (xi > x.x) inside = !inside;
        }
    }
    return {inside ? Where::Inside : Where::Outside, -1};
}

struct ExitHit {
    Scalar t;
    Point point;
    int side = -1;    ///< side crossed in its interior
    int vertex = -1;  ///< vertex hit
};

/// First boundary point of P met by the ray x + t d, t > 0. The ray must start
/// inside P, or on its boundary heading inwards or along a side.
inline ExitHit polygon_exit(const Polygon& P, const Point& x, const Vector& d)
{
    std::optional<ExitHit> best;
    auto offer = [&](ExitHit h) {
        if (!best || h.t < best->t || (h.t == best->t && h.vertex >= 0 && best->vertex < 0)) best = std::move(h);
    };
    int n = P.size();
    for (int i = 0; i < n; ++i) {
        const Point& a = P.vertex(i);
        Vector e = P.side_vector(i);
        Scalar den = cross(d, e);
        Vector w = a - x;
        if (sgn(den) == 0) {
            if (sgn(cross(w, d)) != 0) continue;
            for (int k = 0; k < 2; ++k) {
                Point q = P.vertex(i + k);
                Scalar t = dot(q - x, d) / norm2(d);
                if (sgn(t) > 0) offer({t, q, -1, (i + k) % n});
            }
            continue;
        }
        Scalar t = cross(w, e) / den;
        if (sgn(t) <= 0) continue;
        Scalar s = cross(w, d) / den;
        if (sgn(s) < 0 || s > 1) continue;
        if (sgn(s) == 0) offer({t, a, -1, i});
        else if (s == 1) offer({t, P.vertex(i + 1), -1, (i + 1) % n});
        else offer({t, x + t * d, i, -1});
    }
    if (!best) throw DomainError("leaf does not leave its polygon (start outside?)");
    return *best;
}

/// Outgoing and incoming side directions bounding the corner (p, v).
inline std::pair<Vector, Vector> corner_sector(const Polygon& P, int v)
{
    return {P.side_vector(v), P.vertex(v - 1) - P.vertex(v)};
}

/// Whether direction d leaves the corner into the polygon: d in [out, in).
/// When `closed_end` is set the incoming ray is included as well.
inline bool corner_contains(const Polygon& P, int v, const Vector& d, bool closed_end = false)
{
    auto [out, in] = corner_sector(P, v);
    if (!in_ccw_arc(d, out, in)) return false;
    if (!closed_end && Direction(d) == Direction(in)) return false;
    return true;
}

}  // namespace tracer_detail

/// Tracer over a fixed surface. Stateless apart from the surface reference.
class Tracer {
public:
    explicit Tracer(const DilationSurface& s) : s_(s) {}

    /// Leaf through a regular point.
    TraceOutcome trace(int polygon, const Point& start, const Direction& dir, int budget = 10000) const
    {
        using namespace tracer_detail;
        if (polygon < 0 || polygon >= s_.polygon_count()) throw DomainError("no such polygon");
        TraceOutcome out;
        out.dir = dir;
        out.start_polygon = polygon;
        out.start = start;
        const Vector& d = dir.vec();
        const Polygon& P = s_.polygon(polygon);
        Location loc = locate(P, start);
        State st{polygon, start, DilationMap()};
        switch (loc.where) {
        case Where::Outside: throw DomainError("start point outside polygon " + std::to_string(polygon));
        case Where::AtVertex:
            if (s_.corner_singular({polygon, loc.index})) throw DomainError("start at singularity");
            if (!turn_at_vertex(st, loc.index, d, out, budget)) return out;
            break;
        case Where::OnSide:
            if (sgn(cross(P.side_vector(loc.index), d)) < 0) {
                if (!cross_side(st, loc.index, out, budget)) return out;
            }
            break;
        case Where::Inside: break;
        }
        out.crossings = 0;  // normalisation moves are not part of the period
        out.path.clear();
        run(st, out, budget, true);
        return out;
    }

    /// Leaf leaving the corner (polygon, vertex) in direction dir; the corner
    /// must contain dir in its sector.
    TraceOutcome trace_from_corner(CornerRef c, const Direction& dir, int budget = 10000) const
    {
        TraceOutcome out;
        out.dir = dir;
        out.start_polygon = c.polygon;
        out.start = s_.polygon(c.polygon).vertex(c.vertex);
        State st{c.polygon, out.start, DilationMap()};
        run(st, out, budget, false);
        return out;
    }

    /// Leaf through a regular vertex, continuing into the corner whose sector contains dir.
    TraceOutcome trace_through_vertex(CornerRef c, const Direction& dir, int budget = 10000) const
    {
        TraceOutcome out;
        out.dir = dir;
        out.start_polygon = c.polygon;
        out.start = s_.polygon(c.polygon).vertex(c.vertex);
        State st{c.polygon, out.start, DilationMap()};
        if (!turn_at_vertex(st, c.vertex, dir.vec(), out, budget)) return out;
        run(st, out, budget, false);
        return out;
    }

    /// Where the straight path x -> x + disp (in the chart of `polygon`) ends. Empty when
    /// the path meets a singularity or the boundary on the way.
    struct Placement {
        int polygon = 0;
        Point point;
        DilationMap dev;  ///< end chart -> chart of the starting polygon
    };
    std::optional<Placement> walk(int polygon, const Point& x, const Vector& disp, int budget = 10000) const
    {
        using namespace tracer_detail;
        if (is_zero(disp)) return Placement{polygon, x, DilationMap()};
        TraceOutcome scratch;
        scratch.dir = Direction(disp);
        State st{polygon, x, DilationMap()};
        Vector d = disp;
        auto rescale = [&](const Scalar& before) { d = (before / st.dev.a) * d; };
        const Polygon& P0 = s_.polygon(polygon);
        Location loc = locate(P0, x);
        if (loc.where == Where::Outside) throw DomainError("walk starts outside polygon " + std::to_string(polygon));
        if (loc.where == Where::AtVertex) {
            Scalar a = st.dev.a;
            if (!turn_at_vertex(st, loc.index, d, scratch, budget)) return std::nullopt;
            rescale(a);
        } else if (loc.where == Where::OnSide && sgn(cross(P0.side_vector(loc.index), d)) < 0) {
            Scalar a = st.dev.a;
            if (!cross_side(st, loc.index, scratch, budget)) return std::nullopt;
            rescale(a);
        }
        while (true) {
            const Polygon& P = s_.polygon(st.polygon);
            ExitHit h = polygon_exit(P, st.x, d);
            if (h.t > 1 || (h.t == 1 && h.vertex < 0)) return Placement{st.polygon, st.x + d, st.dev};
            if (h.t == 1 && s_.corner_singular({st.polygon, h.vertex})) return std::nullopt;
            if (h.t == 1) return Placement{st.polygon, h.point, st.dev};
            d = (1 - h.t) * d;
            st.x = h.point;
            Scalar a = st.dev.a;
            if (h.vertex >= 0) {
                if (!turn_at_vertex(st, h.vertex, d, scratch, budget)) return std::nullopt;
                st.x = s_.polygon(st.polygon).vertex(current_vertex(st));
            } else if (!cross_side(st, h.side, scratch, budget)) {
                return std::nullopt;
            }
            rescale(a);
        }
    }

    const DilationSurface& surface() const { return s_; }

private:
    struct State {
        int polygon;
        Point x;
        DilationMap dev;  // current chart -> start chart
    };

    void finish(State& st, TraceOutcome& out, TraceKind k) const
    {
        out.kind = k;
        out.end_polygon = st.polygon;
        out.end = st.x;
        out.developing = st.dev;
        out.accumulated_dilation = st.dev.a;
    }

    // Crosses side `side` of the current polygon at st.x. Returns false when the trace ended.
    bool cross_side(State& st, int side, TraceOutcome& out, int budget) const
    {
        const auto& g = s_.gluing({st.polygon, side});
        if (!g) {
            out.boundary_side = SideRef{st.polygon, side};
            finish(st, out, TraceKind::HitBoundary);
            return false;
        }
        out.path.push_back({{st.polygon, side}, st.x});
        ++out.crossings;
        st.x = g->map(st.x);
        st.polygon = g->to.polygon;
        st.dev = compose(st.dev, invert(g->map));
        if (out.crossings > budget) {
            finish(st, out, TraceKind::BudgetExhausted);
            return false;
        }
        return true;
    }

    // The leaf sits at vertex v of the current polygon; moves it into the corner whose
    // sector contains d. Returns false when the trace ended.
    bool turn_at_vertex(State& st, int v, const Vector& d, TraceOutcome& out, int budget) const
    {
        using namespace tracer_detail;
        CornerRef c{st.polygon, v};
        if (s_.corner_singular(c)) {
            out.singularity = s_.cycle_of(c);
            out.end_corner = c;
            finish(st, out, TraceKind::HitSingularity);
            return false;
        }
        std::size_t n = s_.vertex_cycles()[static_cast<std::size_t>(s_.cycle_of(c))].corners.size();
        for (std::size_t k = 0; k <= n; ++k) {
            if (corner_contains(s_.polygon(c.polygon), c.vertex, d)) return true;
            if (!cross_side(st, c.vertex, out, budget)) return false;
            const auto& g = s_.gluing({c.polygon, c.vertex});
            c = {g->to.polygon, (g->to.side + 1) % s_.polygon(g->to.polygon).size()};
        }
        throw DomainError("regular vertex without a sector for the direction");
    }

    void run(State& st, TraceOutcome& out, int budget, bool regular_start) const
    {
        using namespace tracer_detail;
        const Vector& d = out.dir.vec();
        const int p0 = st.polygon;
        const Point x0 = st.x;
        // a start on a side parallel to the leaf may come back through the glued copy
        struct Copy {
            int polygon;
            Point x;
            DilationMap map;  // start chart -> copy chart
        };
        std::optional<Copy> twin;
        if (regular_start) {
            const Polygon& P0 = s_.polygon(p0);
            Location loc = locate(P0, x0);
            if (loc.where == Where::OnSide && sgn(cross(P0.side_vector(loc.index), d)) == 0)
                if (const auto& g = s_.gluing({p0, loc.index})) twin = Copy{g->to.polygon, g->map(x0), g->map};
        }
        auto close_at_twin = [&]() {
            st.polygon = p0;
            st.x = x0;
            st.dev = compose(st.dev, twin->map);
            finish(st, out, TraceKind::ClosedUp);
        };
        bool first = true;
        while (true) {
            if (!first && regular_start && st.polygon == p0 && st.x == x0) {
                finish(st, out, TraceKind::ClosedUp);
                return;
            }
            if (!first && twin && st.polygon == twin->polygon && st.x == twin->x) {
                close_at_twin();
                return;
            }
            const Polygon& P = s_.polygon(st.polygon);
            ExitHit h = polygon_exit(P, st.x, d);
            if (regular_start && st.polygon == p0 && !(st.x == x0) && on_segment(x0, st.x, h.point) && !(h.point == x0)) {
                out.legs.push_back({st.polygon, st.x, x0, st.dev});
                st.x = x0;
                finish(st, out, TraceKind::ClosedUp);
                return;
            }
            if (twin && st.polygon == twin->polygon && !(st.x == twin->x) && on_segment(twin->x, st.x, h.point) && !(h.point == twin->x)) {
                out.legs.push_back({st.polygon, st.x, twin->x, st.dev});
                close_at_twin();
                return;
            }
            out.legs.push_back({st.polygon, st.x, h.point, st.dev});
            st.x = h.point;
            first = false;
            if (h.vertex >= 0) {
                if (!turn_at_vertex(st, h.vertex, d, out, budget)) return;
                st.x = s_.polygon(st.polygon).vertex(current_vertex(st));
            } else if (!cross_side(st, h.side, out, budget)) {
                return;
            }
        }
    }

    int current_vertex(const State& st) const
    {
        const Polygon& P = s_.polygon(st.polygon);
        for (int i = 0; i < P.size(); ++i)
            if (P.vertex(i) == st.x) return i;
        throw DomainError("internal: leaf lost its vertex");
    }

    const DilationSurface& s_;
};

inline TraceOutcome trace(const DilationSurface& s, int polygon, const Point& start, const Direction& dir, int budget = 10000)
{
    return Tracer(s).trace(polygon, start, dir, budget);
}

/// Leaves leaving a singularity in direction dir, one per corner sector that contains it.
inline std::vector<TraceOutcome> separatrices(const DilationSurface& s, int cycle, const Direction& dir, int budget = 10000)
{
    using namespace tracer_detail;
    const auto& cyc = s.vertex_cycles().at(static_cast<std::size_t>(cycle));
    std::vector<TraceOutcome> out;
    Tracer tr(s);
    for (const auto& c : cyc.corners) {
        const Polygon& P = s.polygon(c.polygon);
        bool in_is_boundary = s.is_boundary({c.polygon, (c.vertex + P.size() - 1) % P.size()});
        if (!corner_contains(P, c.vertex, dir.vec(), in_is_boundary)) continue;
        out.push_back(tr.trace_from_corner(c, dir, budget));
    }
    return out;
}

// ---------------------------------------------------------------------------
// First-return maps

struct ReturnBranch {
    /// Trapped: the piece falls into a cycle of edges that avoids the transversal,
    /// so it never returns.
    enum class Kind { Resolved, Unresolved, Escapes, Trapped };
    Kind kind = Kind::Resolved;
    Scalar lo, hi;  ///< domain [lo, hi) in the transversal parameter
    Scalar slope = 1, offset = 0;
    std::vector<SideRef> itinerary;
    Scalar multiplier = 1;  ///< developed scale after one return
    Scalar apply(const Scalar& u) const { return slope * u + offset; }
};

inline const char* to_string(ReturnBranch::Kind k)
{
    switch (k) {
    case ReturnBranch::Kind::Resolved: return "resolved";
    case ReturnBranch::Kind::Unresolved: return "unresolved";
    case ReturnBranch::Kind::Escapes: return "escapes";
    case ReturnBranch::Kind::Trapped: return "trapped";
    }
    return "?";
}

/// First return of the flow in direction dir to a glued edge. The parameter u in
/// [0, 1) runs affinely along `entry`, the representative of the edge into whose
/// polygon the direction points; u * length is arclength in that chart.
struct PiecewiseAffineReturnMap {
    SideRef transversal;
    SideRef entry;
    Direction dir;
    double length = 1;
    std::vector<ReturnBranch> branches;
    std::vector<Scalar> singular;  ///< parameters whose leaf hits a singularity before returning

    bool resolved() const
    {
        return std::all_of(branches.begin(), branches.end(), [](const auto& b) { return b.kind == ReturnBranch::Kind::Resolved; });
    }
    const ReturnBranch* branch_at(const Scalar& u) const
    {
        for (const auto& b : branches)
            if (b.lo <= u && u < b.hi) return &b;
        return nullptr;
    }
    Point point_at(const DilationSurface& s, const Scalar& u) const
    {
        const Polygon& P = s.polygon(entry.polygon);
        return P.vertex(entry.side) + u * P.side_vector(entry.side);
    }
};

namespace tracer_detail {

// Landing record: parameter on the landed side as an affine function of u.
struct Landing {
    SideRef side;
    Scalar slope, offset;
    std::size_t depth;  // itinerary length at landing
    std::shared_ptr<const Landing> prev;
};

struct Piece {
    Scalar lo, hi;
    int polygon;
    Point A;   // position at u = 0 of the affine family (may lie outside the piece)
    Vector B;  // derivative in u
    std::vector<SideRef> itinerary;
    DilationMap dev;
    std::shared_ptr<const Landing> landings;
    std::size_t trap_next = 0;  // itinerary length at which to test for a trap again
};

// Whether every point of the parameter interval [lo, hi] on the entry side `L`
// follows the sides w[from..] without meeting a vertex.
inline bool follows(const DilationSurface& s, const Vector& d, SideRef L, const Scalar& lo, const Scalar& hi,
                    const std::vector<SideRef>& w, std::size_t from)
{
    const Polygon& P0 = s.polygon(L.polygon);
    Point A = P0.vertex(L.side);
    Vector B = P0.side_vector(L.side);
    int poly = L.polygon;
    for (std::size_t k = from; k < w.size(); ++k) {
        const Polygon& P = s.polygon(poly);
        Scalar den = cross(B, d);
        for (int i = 0; i < P.size(); ++i) {
            Scalar u = cross(P.vertex(i) - A, d) / den;
            if (lo < u && u < hi) return false;
        }
        ExitHit h = polygon_exit(P, A + ((lo + hi) / 2) * B, d);
        if (h.side < 0 || !(SideRef{poly, h.side} == w[k])) return false;
        const Vector e = P.side_vector(h.side);
        Scalar cde = cross(d, e);
        Point HA = A + (cross(P.vertex(h.side) - A, e) / cde) * d;
        Vector HB = B + (-cross(B, e) / cde) * d;
        const auto& g = s.gluing(w[k]);
        if (!g) return false;
        A = g->map(HA);
        B = g->map.linear(HB);
        poly = g->to.polygon;
    }
    return true;
}

// True when the piece provably cycles forever between landings on the current side.
// Only earlier landings at a lag q where the itinerary tail repeats are examined:
// either the landing interval nests inside the earlier one, or the q-step map
// contracts towards a fixed point p and the hull of the earlier interval and p
// follows the same q sides uncut.
inline bool trapped(const DilationSurface& s, const Vector& d, const Landing& now, const Scalar& lo, const Scalar& hi,
                    const std::vector<SideRef>& it, int lookback)
{
    auto range = [&](const Landing& l) {
        Scalar a = l.offset + l.slope * lo, b = l.offset + l.slope * hi;
        if (b < a) std::swap(a, b);
        return std::pair<Scalar, Scalar>{a, b};
    };
    const std::size_t n = it.size();
    const Landing* l = now.prev.get();
    for (int k = 0; l && k < lookback; ++k, l = l->prev.get()) {
        if (!(l->side == now.side)) continue;
        std::size_t q = n - l->depth;
        if (2 * q > n || !std::equal(it.end() - static_cast<std::ptrdiff_t>(q), it.end(), it.end() - static_cast<std::ptrdiff_t>(2 * q)))
            continue;
        auto [a, b] = range(now);
        auto [c, e] = range(*l);
        if (c <= a && b <= e) return true;
        Scalar S = now.slope / l->slope;
        if (sgn(S) <= 0 || S >= 1) return false;
        Scalar O = now.offset - S * l->offset;
        Scalar p = O / (1 - S);
        Scalar jl = std::min(c, p), jh = std::max(e, p);
        if (sgn(jl) <= 0 || jh >= 1) return false;
        return follows(s, d, now.side, jl, jh, it, l->depth);
    }
    return false;
}

}  // namespace tracer_detail

/// Splits the transversal by itinerary. Each piece is followed until it lands on the
/// entry side again, meets the boundary, or exceeds `budget` crossings.
inline PiecewiseAffineReturnMap return_map(const DilationSurface& s, SideRef transversal, const Direction& dir, int budget = 10000,
                                           int max_pieces = 200000)
{
    using namespace tracer_detail;
    const Polygon& T = s.polygon(transversal.polygon);
    const Vector& d = dir.vec();
    Scalar c = cross(T.side_vector(transversal.side), d);
    if (sgn(c) == 0) throw DomainError("direction parallel to the transversal");
    PiecewiseAffineReturnMap m;
    m.transversal = transversal;
    m.dir = dir;
    m.entry = transversal;
    if (sgn(c) < 0) {
        // d points out of T through this side: use the glued side
        const auto& g = s.gluing(transversal);
        if (!g) throw DomainError("direction points out of the surface at a boundary transversal");
        m.entry = g->to;
    }
    const Polygon& E = s.polygon(m.entry.polygon);
    const Point E0 = E.vertex(m.entry.side);
    const Vector Ev = E.side_vector(m.entry.side);
    m.length = length(Ev);
    const Scalar En2 = norm2(Ev);

    std::vector<Piece> stack;
    stack.push_back({0, 1, m.entry.polygon, E0, Ev, {}, DilationMap(), nullptr});
    std::set<Scalar> singular;
    int processed = 0;
    auto emit = [&](ReturnBranch b) { m.branches.push_back(std::move(b)); };

    while (!stack.empty()) {
        Piece pc = std::move(stack.back());
        stack.pop_back();
        if (++processed > max_pieces) {
            emit({ReturnBranch::Kind::Unresolved, pc.lo, pc.hi, 1, 0, pc.itinerary, 1});
            continue;
        }
        const Polygon& P = s.polygon(pc.polygon);
        Scalar den = cross(pc.B, d);
        // parameters whose ray passes through a vertex
        std::vector<Scalar> cuts{pc.lo, pc.hi};
        for (int i = 0; i < P.size(); ++i) {
            Scalar u = cross(P.vertex(i) - pc.A, d) / den;
            if (pc.lo < u && u < pc.hi) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        // a cut parameter whose ray first meets a singular vertex is a singular parameter
        for (std::size_t k = 1; k + 1 < cuts.size(); ++k) {
            Point x = pc.A + cuts[k] * pc.B;
            ExitHit h = polygon_exit(P, x, d);
            if (h.vertex >= 0 && s.corner_singular({pc.polygon, h.vertex})) singular.insert(cuts[k]);
        }
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            Scalar lo = cuts[k], hi = cuts[k + 1];
            Scalar mid = (lo + hi) / 2;
            ExitHit h = polygon_exit(P, pc.A + mid * pc.B, d);
            if (h.side < 0) throw DomainError("internal: vertex hit inside a return-map piece");
            const Point a = P.vertex(h.side);
            const Vector e = P.side_vector(h.side);
            // hit(u) = A + u B + t(u) d with t(u) = cross(a - A - u B, e) / cross(d, e)
            Scalar cde = cross(d, e);
            Scalar t0 = cross(a - pc.A, e) / cde, t1 = -cross(pc.B, e) / cde;
            Point HA = pc.A + t0 * d;
            Vector HB = pc.B + t1 * d;
            const auto& g = s.gluing({pc.polygon, h.side});
            std::vector<SideRef> it = pc.itinerary;
            it.push_back({pc.polygon, h.side});
            if (!g) {
                emit({ReturnBranch::Kind::Escapes, lo, hi, 1, 0, it, 1});
                continue;
            }
            Point NA = g->map(HA);
            Vector NB = g->map.linear(HB);
            DilationMap dev = compose(pc.dev, invert(g->map));
            if (g->to == m.entry) {
                ReturnBranch b;
                b.lo = lo;
                b.hi = hi;
                b.slope = dot(NB, Ev) / En2;
                b.offset = dot(NA - E0, Ev) / En2;
                b.itinerary = std::move(it);
                b.multiplier = dev.a;
                emit(std::move(b));
                continue;
            }
            const Polygon& L = s.polygon(g->to.polygon);
            const Vector Lv = L.side_vector(g->to.side);
            const Scalar Ln2 = norm2(Lv);
            auto land = std::make_shared<const Landing>(
                Landing{g->to, dot(NB, Lv) / Ln2, dot(NA - L.vertex(g->to.side), Lv) / Ln2, it.size(), pc.landings});
            std::size_t trap_next = pc.trap_next;
            if (it.size() >= trap_next) {
                if (trapped(s, d, *land, lo, hi, it, 256)) {
                    emit({ReturnBranch::Kind::Trapped, lo, hi, 1, 0, it, 1});
                    continue;
                }
                trap_next = it.size() + it.size() / 4 + 1;  // back off on long pieces
            }
            if (static_cast<int>(it.size()) >= budget) {
                emit({ReturnBranch::Kind::Unresolved, lo, hi, 1, 0, it, 1});
                continue;
            }
            stack.push_back({lo, hi, g->to.polygon, NA, NB, std::move(it), dev, std::move(land), trap_next});
        }
    }
    std::sort(m.branches.begin(), m.branches.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    // merge neighbours that agree everywhere and are not separated by a singular parameter
    std::vector<ReturnBranch> merged;
    for (auto& b : m.branches) {
        if (!merged.empty()) {
            auto& l = merged.back();
            if (l.hi == b.lo && l.kind == b.kind && l.itinerary == b.itinerary && l.slope == b.slope && l.offset == b.offset &&
                !singular.count(b.lo)) {
                l.hi = b.hi;
                continue;
            }
        }
        merged.push_back(std::move(b));
    }
    m.branches = std::move(merged);
    m.singular.assign(singular.begin(), singular.end());
    return m;
}

// ---------------------------------------------------------------------------
// Saddle connections

struct SaddleConnection {
    int start_cycle = 0, end_cycle = 0;
    CornerRef start_corner, end_corner;
    Direction direction;
    Vector developed;  ///< in the chart of the start polygon
    std::vector<SideRef> itinerary;
};

namespace tracer_detail {

/// Ear-clipping triangulation of a simple counterclockwise polygon, as vertex index triples.
inline std::vector<std::array<int, 3>> triangulate_polygon(const Polygon& P)
{
    std::vector<int> idx(static_cast<std::size_t>(P.size()));
    for (int i = 0; i < P.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    std::vector<std::array<int, 3>> tris;
    auto pt = [&](int i) -> const Point& { return P.vertex(i); };
    while (idx.size() > 3) {
        bool clipped = false;
        std::size_t n = idx.size();
        for (std::size_t k = 0; k < n && !clipped; ++k) {
            int a = idx[(k + n - 1) % n], b = idx[k], c = idx[(k + 1) % n];
            if (orient2d(pt(a), pt(b), pt(c)) <= 0) continue;
            bool blocked = false;
            for (int v : idx) {
                if (v == a || v == b || v == c) continue;
                if (orient2d(pt(a), pt(b), pt(v)) >= 0 && orient2d(pt(b), pt(c), pt(v)) >= 0 && orient2d(pt(c), pt(a), pt(v)) >= 0) {
                    blocked = true;
                    break;
                }
            }
            if (blocked) continue;
            tris.push_back({a, b, c});
            idx.erase(idx.begin() + static_cast<long>(k));
            clipped = true;
        }
        if (!clipped) throw DomainError("polygon could not be triangulated");
    }
    if (orient2d(pt(idx[0]), pt(idx[1]), pt(idx[2])) <= 0) throw DomainError("polygon could not be triangulated");
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

/// Triangles of all polygons, with adjacency across diagonals and glued sides.
struct TriangleMesh {
    struct Tri {
        int polygon;
        std::array<int, 3> v;
        // neighbour across side j (v[j] -> v[j+1]): triangle and side, -1 on the boundary
        std::array<int, 3> nb{-1, -1, -1}, nb_side{-1, -1, -1};
        std::array<int, 3> poly_side{-1, -1, -1};  // polygon side index, or -1 for a diagonal
    };
    std::vector<Tri> tris;

    explicit TriangleMesh(const DilationSurface& s)
    {
        std::map<std::tuple<int, int, int>, std::pair<int, int>> by_edge;  // (polygon, from, to) -> (tri, side)
        for (int p = 0; p < s.polygon_count(); ++p) {
            const Polygon& P = s.polygon(p);
            for (auto t : triangulate_polygon(P)) {
                Tri tr{p, t};
                int id = static_cast<int>(tris.size());
                for (int j = 0; j < 3; ++j) {
                    int a = t[static_cast<std::size_t>(j)], b = t[static_cast<std::size_t>((j + 1) % 3)];
                    if ((a + 1) % P.size() == b) tr.poly_side[static_cast<std::size_t>(j)] = a;
                    by_edge[{p, a, b}] = {id, j};
                }
                tris.push_back(tr);
            }
        }
        for (std::size_t id = 0; id < tris.size(); ++id) {
            Tri& tr = tris[id];
            for (std::size_t j = 0; j < 3; ++j) {
                int a = tr.v[j], b = tr.v[(j + 1) % 3];
                if (tr.poly_side[j] < 0) {
                    auto [t2, j2] = by_edge.at({tr.polygon, b, a});
                    tr.nb[j] = t2;
                    tr.nb_side[j] = j2;
                } else if (const auto& g = s.gluing({tr.polygon, tr.poly_side[j]})) {
                    int n2 = s.polygon(g->to.polygon).size();
                    auto [t2, j2] = by_edge.at({g->to.polygon, g->to.side, (g->to.side + 1) % n2});
                    tr.nb[j] = t2;
                    tr.nb_side[j] = j2;
                }
            }
        }
    }
};

}  // namespace tracer_detail

/// Saddle connections crossing at most max_crossings polygon sides, found by
/// unfolding angular windows from every singular corner. Each unoriented
/// connection is reported once, oriented into the upper half plane [0, pi).
inline std::vector<SaddleConnection> saddle_connections(const DilationSurface& s, int max_crossings, std::size_t max_windows = 2000000)
{
    using namespace tracer_detail;
    TriangleMesh mesh(s);
    std::vector<SaddleConnection> out;
    // a connection is determined by its first corner and its direction
    std::set<std::tuple<CornerRef, std::string, std::string>> seen;
    Tracer tr(s);

    auto record = [&](CornerRef from, CornerRef to, const Vector& v, std::vector<SideRef> it) {
        if (half_plane(v) != 0) return;
        Vector pr = Direction(v).primitive();
        if (!seen.insert({from, pr.x.get_str(), pr.y.get_str()}).second) return;
        out.push_back({s.cycle_of(from), s.cycle_of(to), from, to, Direction(v), v, std::move(it)});
    };

    struct Window {
        int tri, side;    // looking through this side of tri
        DilationMap dev;  // chart of tri's polygon -> start chart
        Vector lo, hi;    // open angular window (lo, hi), counterclockwise
        std::vector<SideRef> itinerary;
    };
    std::size_t windows = 0;

    for (std::size_t t0 = 0; t0 < mesh.tris.size(); ++t0) {
        const auto& T = mesh.tris[t0];
        const Polygon& P = s.polygon(T.polygon);
        const int n = P.size();
        for (std::size_t j = 0; j < 3; ++j) {
            CornerRef corner{T.polygon, T.v[j]};
            if (!s.corner_singular(corner)) continue;
            const Point o = P.vertex(T.v[j]);
            int b = T.v[(j + 1) % 3], c = T.v[(j + 2) % 3];
            // the first ray of each triangle corner; the last ray of the polygon corner
            // belongs to the next corner around the cone unless it is on the boundary
            if (s.corner_singular({T.polygon, b})) record(corner, {T.polygon, b}, P.vertex(b) - o, {});
            if (c == (T.v[j] + n - 1) % n && s.is_boundary({T.polygon, c}) && s.corner_singular({T.polygon, c}))
                record(corner, {T.polygon, c}, P.vertex(c) - o, {});

            std::vector<Window> stack;
            stack.push_back({static_cast<int>(t0), static_cast<int>((j + 1) % 3), DilationMap(), P.vertex(b) - o, P.vertex(c) - o, {}});
            while (!stack.empty()) {
                if (++windows > max_windows) throw DomainError("saddle connection search exceeded its window budget");
                Window W = std::move(stack.back());
                stack.pop_back();
                const auto& cur = mesh.tris[static_cast<std::size_t>(W.tri)];
                std::size_t sj = static_cast<std::size_t>(W.side);
                int nb = cur.nb[sj];
                if (nb < 0) continue;
                DilationMap dev = W.dev;
                std::vector<SideRef> it = W.itinerary;
                if (cur.poly_side[sj] >= 0) {
                    if (static_cast<int>(it.size()) >= max_crossings) continue;
                    const auto& g = s.gluing({cur.polygon, cur.poly_side[sj]});
                    dev = compose(dev, invert(g->map));
                    it.push_back({cur.polygon, cur.poly_side[sj]});
                }
                const auto& N = mesh.tris[static_cast<std::size_t>(nb)];
                std::size_t nj = static_cast<std::size_t>(cur.nb_side[sj]);
                const Polygon& Q = s.polygon(N.polygon);
                // N's side nj runs from the hi end of the window to its lo end
                int apex = N.v[(nj + 2) % 3];
                int through_lo = static_cast<int>((nj + 1) % 3), through_hi = static_cast<int>((nj + 2) % 3);
                Vector va = dev(Q.vertex(apex)) - o;
                int ca = sgn(cross(W.lo, va)), cb = sgn(cross(va, W.hi));
                if (ca > 0 && cb > 0) {
                    CornerRef ac{N.polygon, apex};
                    if (s.corner_singular(ac)) {
                        record(corner, ac, va, it);
                    } else {
                        TraceOutcome cont = tr.trace_through_vertex(ac, Direction(va), max_crossings - static_cast<int>(it.size()));
                        if (cont.kind == TraceKind::HitSingularity) {
                            auto it2 = it;
                            for (const auto& x : cont.itinerary()) it2.push_back(x);
                            record(corner, *cont.end_corner, va + dev.linear(cont.developed()), std::move(it2));
                        }
                    }
                    stack.push_back({nb, through_lo, dev, W.lo, va, it});
                    stack.push_back({nb, through_hi, dev, va, W.hi, std::move(it)});
                } else if (ca <= 0) {
                    stack.push_back({nb, through_hi, dev, W.lo, W.hi, std::move(it)});
                } else {
                    stack.push_back({nb, through_lo, dev, W.lo, W.hi, std::move(it)});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return compare_angle(a.developed, b.developed) < 0; });
    return out;
}

}  // namespace dilatone
