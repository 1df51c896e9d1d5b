#pragma once
// Exotic dilation surfaces: a core dilation surface (maybe with boundary, maybe
// disconnected) plus edges of type C and T and holes, tied together by
// attachments. Pseudo-foliation tracing, exotic cylinders, the linear action,
// and the reduction of a Delaunay pre-limit to an exotic surface.
//
// Edges of the non-C kind are called T throughout (the same kind is sometimes
// written P).

#include "flow.hpp"

#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace dilatone {

struct ExoticEdge {
    enum class Kind { C, T };
    Kind kind = Kind::T;
    Direction theta12;  ///< from extremity 0 towards extremity 1
    Direction theta21;

    /// Direction leaving extremity k along the edge.
    const Direction& from(int k) const { return k == 0 ? theta12 : theta21; }
    /// Side k is the closed sector [from(k), from(k) + pi].
    bool side_contains(int k, const Vector& d) const { return in_ccw_arc(d, from(k).vec(), (-from(k).vec())); }
};

inline const char* to_string(ExoticEdge::Kind k) { return k == ExoticEdge::Kind::C ? "C" : "T"; }

struct Hole {
    Direction theta;
    bool entry_ccw = true;  ///< entry sector [theta, theta + pi], else [theta - pi, theta]

    bool entry_contains(const Vector& d) const
    {
        return entry_ccw ? in_ccw_arc(d, theta.vec(), -theta.vec()) : in_ccw_arc(d, -theta.vec(), theta.vec());
    }
};

/// What gets attached: a boundary side of the core, or a side of a T edge.
struct AttachSource {
    enum class Kind { CoreBoundary, EdgeSide };
    Kind kind = Kind::CoreBoundary;
    SideRef side;  ///< core boundary side
    int edge = 0;  ///< edge side: edge index and side 0/1
    int edge_side = 0;
    auto operator<=>(const AttachSource&) const = default;
};

/// Where it gets attached.
struct AttachTarget {
    enum class Kind { EdgeExtremity, HoleEntry, CorePoint };
    Kind kind = Kind::EdgeExtremity;
    int index = 0;      ///< edge or hole
    int extremity = 0;  ///< 0 or 1 for edges
    /// Core point: a vertex (polygon, vertex) or, when `point` is set, a point
    /// of polygon `corner.polygon`.
    CornerRef corner;
    std::optional<Point> point;
    /// For vertices of angle larger than 2 pi: the corner the leaf leaves through.
    std::optional<CornerRef> exit;
    auto operator<=>(const AttachTarget&) const = default;
};

struct Attachment {
    AttachSource source;
    AttachTarget target;
};

struct ExoticSurface {
    std::optional<DilationSurface> core;
    std::vector<ExoticEdge> edges;
    std::vector<Hole> holes;
    std::vector<Attachment> attachments;

    bool empty() const { return (!core || core->polygon_count() == 0) && edges.empty() && holes.empty(); }
    std::optional<AttachTarget> target_of(const AttachSource& s) const
    {
        for (const auto& a : attachments)
            if (a.source == s) return a.target;
        return std::nullopt;
    }
};

struct ExoticValidation {
    ValidationReport report;
    bool closed = false;
    bool ok() const { return report.ok(); }
};

namespace exotic_detail {

inline std::string name(const AttachSource& s)
{
    if (s.kind == AttachSource::Kind::CoreBoundary) return "boundary side (" + std::to_string(s.side.polygon) + "," + std::to_string(s.side.side) + ")";
    return "side " + std::to_string(s.edge_side) + " of edge " + std::to_string(s.edge);
}

inline bool is_core_boundary(const DilationSurface& s, SideRef b)
{
    const auto& bd = s.spec().boundary;
    return std::find(bd.begin(), bd.end(), b) != bd.end();
}

template <class T>
std::vector<T> min_rotation(const std::vector<T>& w)
{
    std::vector<T> best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        std::vector<T> v(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
        v.insert(v.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
        if (v < best) best = std::move(v);
    }
    return best;
}

}  // namespace exotic_detail

inline ExoticValidation validate_exotic(const ExoticSurface& x)
{
    using namespace exotic_detail;
    ExoticValidation out;
    auto& rep = out.report;
    const int ne = static_cast<int>(x.edges.size()), nh = static_cast<int>(x.holes.size());
    for (int e = 0; e < ne; ++e)
        if (x.edges[static_cast<std::size_t>(e)].theta21 != x.edges[static_cast<std::size_t>(e)].theta12.opposite())
            rep.add("edge " + std::to_string(e) + ": theta(p2,p1) is not -theta(p1,p2)");

    std::set<AttachSource> seen;
    std::vector<int> hole_uses(static_cast<std::size_t>(nh));
    for (const auto& a : x.attachments) {
        const auto& src = a.source;
        const auto& tg = a.target;
        std::string who = name(src);
        if (!seen.insert(src).second) rep.add(who + " is attached twice");
        // the source must exist and be attachable
        std::optional<Vector> side_vec;
        if (src.kind == AttachSource::Kind::CoreBoundary) {
            if (!x.core || !is_core_boundary(*x.core, src.side)) {
                rep.add(who + " is not a boundary side of the core");
                continue;
            }
            side_vec = x.core->polygon(src.side.polygon).side_vector(src.side.side);
        } else {
            if (src.edge < 0 || src.edge >= ne || (src.edge_side != 0 && src.edge_side != 1)) {
                rep.add(who + " does not exist");
                continue;
            }
            if (x.edges[static_cast<std::size_t>(src.edge)].kind == ExoticEdge::Kind::C) rep.add(who + ": edges of type C take no side attachments");
        }
        switch (tg.kind) {
        case AttachTarget::Kind::EdgeExtremity: {
            if (tg.index < 0 || tg.index >= ne || (tg.extremity != 0 && tg.extremity != 1)) {
                rep.add(who + " is attached to a missing edge extremity");
                break;
            }
            const Vector& d = x.edges[static_cast<std::size_t>(tg.index)].from(tg.extremity).vec();
            if (side_vec) {
                // outer directions of a boundary side lie on its right
                if (!in_ccw_arc(d, -*side_vec, *side_vec)) rep.add(who + ": edge direction is not an outer direction of the segment");
            } else if (!x.edges[static_cast<std::size_t>(src.edge)].side_contains(src.edge_side, d)) {
                rep.add(who + ": edge direction is outside the sector of the side");
            }
            break;
        }
        case AttachTarget::Kind::HoleEntry:
            if (tg.index < 0 || tg.index >= nh) {
                rep.add(who + " is attached to a missing hole");
                break;
            }
            if (src.kind != AttachSource::Kind::CoreBoundary) rep.add(who + ": only boundary segments attach to holes");
            ++hole_uses[static_cast<std::size_t>(tg.index)];
            break;
        case AttachTarget::Kind::CorePoint: {
            if (!x.core || tg.corner.polygon < 0 || tg.corner.polygon >= x.core->polygon_count()) {
                rep.add(who + " is attached to a missing core point");
                break;
            }
            const Polygon& P = x.core->polygon(tg.corner.polygon);
            if (tg.point) {
                if (tracer_detail::locate(P, *tg.point).where != tracer_detail::Where::Inside) rep.add(who + ": attachment point is not inside its polygon");
                if (src.kind == AttachSource::Kind::CoreBoundary) rep.add(who + ": boundary segments attach to marked points only");
                break;
            }
            if (tg.corner.vertex < 0 || tg.corner.vertex >= P.size()) {
                rep.add(who + " is attached to a missing vertex");
                break;
            }
            const auto& cyc = x.core->vertex_cycles()[static_cast<std::size_t>(x.core->cycle_of(tg.corner))];
            if (src.kind == AttachSource::Kind::CoreBoundary && !cyc.marked) rep.add(who + ": boundary segments attach to marked points only");
            if (cyc.total_angle > 2 * std::numbers::pi + 1e-9) {
                if (!tg.exit) rep.add(who + ": exit sector missing at a point of angle larger than 2 pi");
                else if (std::find(cyc.corners.begin(), cyc.corners.end(), *tg.exit) == cyc.corners.end())
                    rep.add(who + ": exit sector is not a corner of the attachment point");
            }
            break;
        }
        }
    }

    bool closed = true;
    if (x.core)
        for (const auto& b : x.core->spec().boundary)
            if (!seen.count({AttachSource::Kind::CoreBoundary, b, 0, 0})) closed = false;
    for (int e = 0; e < ne; ++e)
        if (x.edges[static_cast<std::size_t>(e)].kind == ExoticEdge::Kind::T)
            for (int k = 0; k < 2; ++k)
                if (!seen.count({AttachSource::Kind::EdgeSide, SideRef{}, e, k})) closed = false;
    for (int h : hole_uses)
        if (h == 0) closed = false;
    out.closed = closed;
    return out;
}

// ---------------------------------------------------------------------------
// Linear action

inline ExoticSurface apply_sl2(const Sl2Matrix& A, const ExoticSurface& x)
{
    ExoticSurface y = x;
    if (x.core) y.core = apply_sl2(A, *x.core);
    for (auto& e : y.edges) {
        e.theta12 = apply_sl2(A, e.theta12);
        e.theta21 = apply_sl2(A, e.theta21);
    }
    for (auto& h : y.holes) h.theta = apply_sl2(A, h.theta);
    for (auto& a : y.attachments)
        if (a.target.point) a.target.point = A(*a.target.point);
    return y;
}

// ---------------------------------------------------------------------------
// Pseudo-foliations

enum class PseudoKind { ClosedUp, Periodic, Stopped, EnteredHole, HitEdgeC, HitSingularity, BudgetExhausted };

inline const char* to_string(PseudoKind k)
{
    switch (k) {
    case PseudoKind::ClosedUp: return "closed";
    case PseudoKind::Periodic: return "periodic";
    case PseudoKind::Stopped: return "stopped";
    case PseudoKind::EnteredHole: return "entered_hole";
    case PseudoKind::HitEdgeC: return "hit_edge_c";
    case PseudoKind::HitSingularity: return "hit_singularity";
    case PseudoKind::BudgetExhausted: return "budget_exhausted";
    }
    return "?";
}

/// One combinatorial event of a pseudo-leaf.
struct PseudoStep {
    enum class Kind { CoreSide, Attachment, EdgeSide };
    Kind kind = Kind::CoreSide;
    SideRef side;    ///< core side crossed
    int index = 0;   ///< attachment index, or edge index
    int which = 0;   ///< side of the edge exited through
    friend bool operator==(const PseudoStep&, const PseudoStep&) = default;
};

struct PseudoTrace {
    PseudoKind kind = PseudoKind::BudgetExhausted;
    Direction dir;
    std::vector<PseudoStep> steps;
    std::vector<TraceOutcome> segments;  ///< core pieces, in order
    int period_from = 0;                 ///< first step of the periodic part
    std::optional<int> hole;
    std::optional<int> edge_c;

    bool crosses_t_edge() const
    {
        for (std::size_t k = static_cast<std::size_t>(period_from); k < steps.size(); ++k)
            if (steps[k].kind == PseudoStep::Kind::EdgeSide) return true;
        return false;
    }
    std::vector<PseudoStep> period() const { return {steps.begin() + period_from, steps.end()}; }
};

class PseudoTracer {
public:
    explicit PseudoTracer(const ExoticSurface& x) : x_(x)
    {
        for (std::size_t k = 0; k < x.attachments.size(); ++k) by_source_[x.attachments[k].source] = static_cast<int>(k);
    }

    PseudoTrace trace(int polygon, const Point& start, const Direction& dir, int budget = 10000) const
    {
        if (!x_.core) throw DomainError("exotic surface has no core");
        PseudoTrace out;
        out.dir = dir;
        Tracer tr(*x_.core);
        run(out, tr.trace(polygon, start, dir, budget), budget, std::nullopt);
        return out;
    }

    /// Leaf leaving the target of attachment `k`; closes when it comes back there.
    PseudoTrace trace_from(int k, const Direction& dir, int budget = 10000) const
    {
        PseudoTrace out;
        out.dir = dir;
        out.steps.push_back({PseudoStep::Kind::Attachment, {}, k, 0});
        const auto& tg = x_.attachments.at(static_cast<std::size_t>(k)).target;
        auto first = leave_target(out, tg, budget);
        if (!first) return out;
        run(out, std::move(*first), budget, key(tg));
        return out;
    }

private:
    using Key = std::tuple<int, int, int, int, std::string>;

    static Key key(const AttachTarget& t)
    {
        std::string p = t.point ? t.point->x.get_str() + "," + t.point->y.get_str() : "";
        if (t.exit) p += "|" + std::to_string(t.exit->polygon) + ":" + std::to_string(t.exit->vertex);
        return {static_cast<int>(t.kind), t.index, t.extremity, t.corner.polygon * 100000 + t.corner.vertex, p};
    }

    /// Continues from an attachment target; empty when the leaf stops there.
    std::optional<TraceOutcome> leave_target(PseudoTrace& out, const AttachTarget& tg, int budget) const
    {
        const Vector& d = out.dir.vec();
        switch (tg.kind) {
        case AttachTarget::Kind::HoleEntry:
            out.kind = PseudoKind::EnteredHole;
            out.hole = tg.index;
            return std::nullopt;
        case AttachTarget::Kind::EdgeExtremity: {
            const auto& e = x_.edges.at(static_cast<std::size_t>(tg.index));
            if (e.kind == ExoticEdge::Kind::C) {
                out.kind = PseudoKind::HitEdgeC;
                out.edge_c = tg.index;
                return std::nullopt;
            }
            const Vector& along = e.from(tg.extremity).vec();
            if (sgn(cross(along, d)) == 0) throw DomainError("tangent to edge");
            int side = e.side_contains(0, d) ? 0 : 1;
            out.steps.push_back({PseudoStep::Kind::EdgeSide, {}, tg.index, side});
            auto it = by_source_.find({AttachSource::Kind::EdgeSide, SideRef{}, tg.index, side});
            if (it == by_source_.end()) {
                out.kind = PseudoKind::Stopped;
                return std::nullopt;
            }
            out.steps.push_back({PseudoStep::Kind::Attachment, {}, it->second, 0});
            return leave_target(out, x_.attachments[static_cast<std::size_t>(it->second)].target, budget);
        }
        case AttachTarget::Kind::CorePoint: {
            Tracer tr(*x_.core);
            if (tg.point) return tr.trace(tg.corner.polygon, *tg.point, out.dir, budget);
            const auto& cyc = x_.core->vertex_cycles()[static_cast<std::size_t>(x_.core->cycle_of(tg.corner))];
            // first corner containing the direction, counted from the exit corner
            CornerRef from = tg.exit ? *tg.exit : tg.corner;
            auto at = std::find(cyc.corners.begin(), cyc.corners.end(), from);
            std::size_t n = cyc.corners.size(), k0 = at == cyc.corners.end() ? 0 : static_cast<std::size_t>(at - cyc.corners.begin());
            for (std::size_t j = 0; j < n; ++j) {
                CornerRef c = cyc.corners[(k0 + j) % n];
                const Polygon& P = x_.core->polygon(c.polygon);
                bool in_is_boundary = x_.core->is_boundary({c.polygon, (c.vertex + P.size() - 1) % P.size()});
                if (tracer_detail::corner_contains(P, c.vertex, d, in_is_boundary)) return tr.trace_from_corner(c, out.dir, budget);
            }
            out.kind = PseudoKind::Stopped;
            return std::nullopt;
        }
        }
        return std::nullopt;
    }

    void run(PseudoTrace& out, TraceOutcome seg, int budget, std::optional<Key> home) const
    {
        std::map<Key, int> visited;
        if (home) visited[*home] = 0;
        int used = 0;
        while (true) {
            used += seg.crossings + 1;
            for (const auto& c : seg.path) out.steps.push_back({PseudoStep::Kind::CoreSide, c.side, 0, 0});
            TraceOutcome done = std::move(seg);
            out.segments.push_back(done);
            switch (done.kind) {
            case TraceKind::ClosedUp: out.kind = PseudoKind::ClosedUp; return;
            case TraceKind::HitSingularity: out.kind = PseudoKind::HitSingularity; return;
            case TraceKind::BudgetExhausted: out.kind = PseudoKind::BudgetExhausted; return;
            case TraceKind::HitBoundary: break;
            }
            if (used > budget) {
                out.kind = PseudoKind::BudgetExhausted;
                return;
            }
            auto it = by_source_.find({AttachSource::Kind::CoreBoundary, *done.boundary_side, 0, 0});
            if (it == by_source_.end()) {
                out.kind = PseudoKind::Stopped;
                return;
            }
            const auto& tg = x_.attachments[static_cast<std::size_t>(it->second)].target;
            std::size_t at = out.steps.size();
            out.steps.push_back({PseudoStep::Kind::Attachment, {}, it->second, 0});
            Key k = key(tg);
            if (auto v = visited.find(k); v != visited.end()) {
                out.kind = home && v->second == 0 ? PseudoKind::ClosedUp : PseudoKind::Periodic;
                out.period_from = v->second;
                out.steps.pop_back();
                return;
            }
            visited[k] = static_cast<int>(at);
            auto next = leave_target(out, tg, budget);
            if (!next) return;
            seg = std::move(*next);
        }
    }

    const ExoticSurface& x_;
    std::map<AttachSource, int> by_source_;
};

inline PseudoTrace trace_pseudo(const ExoticSurface& x, int polygon, const Point& start, const Direction& dir, int budget = 10000)
{
    return PseudoTracer(x).trace(polygon, start, dir, budget);
}

// ---------------------------------------------------------------------------
// Exotic cylinders

struct ExoticCylinder {
    enum class Kind { Core, Pseudo, Hole, EdgeC };
    Kind kind = Kind::Core;
    int index = 0;                  ///< hole or edge index
    std::optional<double> modulus;  ///< none for holes and for classes the modulus is not defined on
    std::optional<Cylinder> core;
    std::vector<PseudoStep> structure;  ///< combinatorial structure of a pseudo-class
};

inline const char* to_string(ExoticCylinder::Kind k)
{
    switch (k) {
    case ExoticCylinder::Kind::Core: return "core";
    case ExoticCylinder::Kind::Pseudo: return "pseudo";
    case ExoticCylinder::Kind::Hole: return "hole";
    case ExoticCylinder::Kind::EdgeC: return "edge_c";
    }
    return "?";
}

/// Cylinders in direction `dir`: C edges (modulus infinite), holes (no
/// modulus), closed pseudo-leaves through attachments grouped by structure
/// (modulus 0 when they cross a T edge), and cylinders of the core.
inline std::vector<ExoticCylinder> exotic_cylinders(const ExoticSurface& x, const Direction& dir, int budget = 2000, int max_period = 32)
{
    std::vector<ExoticCylinder> out;
    for (std::size_t e = 0; e < x.edges.size(); ++e)
        if (x.edges[e].kind == ExoticEdge::Kind::C)
            out.push_back({ExoticCylinder::Kind::EdgeC, static_cast<int>(e), std::numeric_limits<double>::infinity(), std::nullopt, {}});
    for (std::size_t h = 0; h < x.holes.size(); ++h) out.push_back({ExoticCylinder::Kind::Hole, static_cast<int>(h), std::nullopt, std::nullopt, {}});

    if (x.core) {
        PseudoTracer pt(x);
        std::set<std::vector<std::tuple<int, int, int, int, int>>> seen;
        auto canon = [](const std::vector<PseudoStep>& w) {
            std::vector<std::tuple<int, int, int, int, int>> v;
            for (const auto& s : w) v.push_back({static_cast<int>(s.kind), s.side.polygon, s.side.side, s.index, s.which});
            return exotic_detail::min_rotation(v);
        };
        for (std::size_t k = 0; k < x.attachments.size(); ++k) {
            PseudoTrace t;
            try {
                t = pt.trace_from(static_cast<int>(k), dir, budget);
            } catch (const DomainError&) {
                continue;
            }
            if (t.kind != PseudoKind::ClosedUp && t.kind != PseudoKind::Periodic) continue;
            auto per = t.period();
            if (!seen.insert(canon(per)).second) continue;
            ExoticCylinder c{ExoticCylinder::Kind::Pseudo, static_cast<int>(k), std::nullopt, std::nullopt, per};
            if (t.crosses_t_edge()) c.modulus = 0.0;
            out.push_back(std::move(c));
        }
        try {
            std::set<Itinerary> known;
            for (auto& f : closed_leaves(*x.core, dir, max_period, budget).orbits) {
                if (known.count(f.key)) continue;
                Cylinder cyl = assemble_cylinder(*x.core, f.orbit, budget);
                known.insert(cyl.itineraries.begin(), cyl.itineraries.end());
                known.insert(f.key);
                double m = cyl.modulus;
                out.push_back({ExoticCylinder::Kind::Core, 0, m, std::move(cyl), {}});
            }
        } catch (const DomainError&) {
        }
    }
    return out;
}


// ---------------------------------------------------------------------------
// Pre-limits

/// A face of the last snapshot together with its degeneration label.
struct LimitFace {
    Polygon shape;
    DegenerationLabel label;
};

/// Limit polygons, degenerate placeholders (one long side), edges (two long
/// sides) and holes, with side-to-side, side-to-point and point-to-point
/// gluing records. Sides and vertices carry stable ids so rewrites never
/// renumber them.
struct PreLimit {
    struct Piece {
        bool degenerate = false;
        std::optional<Polygon> shape;  ///< vertex t starts side t
        std::vector<int> sides;        ///< side ids, ccw
        std::vector<int> vertices;     ///< vertex ids, polygons only
        int long_side = -1;            ///< side id, placeholders only
        bool alive = true;
        int face = -1;
    };
    struct Edge {
        Direction theta12;
        std::array<int, 2> sides{-1, -1};
        std::optional<ExoticEdge::Kind> kind;
        bool alive = true;
        int face = -1;
    };
    struct Port {
        enum class Kind { Extremity, Vertex, Hole };
        Kind kind = Kind::Extremity;
        int index = 0;
        int k = 0;  ///< extremity 0/1
        auto operator<=>(const Port&) const = default;
    };
    struct Owner {
        bool edge = false;
        int index = 0;
        int k = 0;  ///< edge side 0/1
    };

    std::vector<Piece> pieces;
    std::vector<Edge> edges;
    std::vector<Hole> holes;
    std::vector<Owner> owners;  ///< by side id
    int vertex_count = 0;
    std::map<int, int> side_side;  ///< symmetric
    std::map<int, Port> side_point;
    std::set<std::pair<Port, Port>> point_point;
    bool source_closed = true;

    int new_side(Owner o)
    {
        owners.push_back(o);
        return static_cast<int>(owners.size()) - 1;
    }
    int new_vertex() { return vertex_count++; }
    std::optional<int> partner(int a) const
    {
        auto it = side_side.find(a);
        return it == side_side.end() ? std::nullopt : std::optional<int>(it->second);
    }
    std::optional<Port> point(int a) const
    {
        auto it = side_point.find(a);
        return it == side_point.end() ? std::nullopt : std::optional<Port>(it->second);
    }
    void release(int a)
    {
        if (auto b = partner(a)) side_side.erase(*b);
        side_side.erase(a);
        side_point.erase(a);
    }
    void glue(int a, int b)
    {
        release(a);
        release(b);
        side_side[a] = b;
        side_side[b] = a;
    }
    void glue(int a, Port p)
    {
        release(a);
        side_point[a] = p;
    }
    void glue(Port p, Port q)
    {
        if (p == q) return;
        point_point.insert(std::minmax(p, q));
    }
    /// Every record naming `from` names `to` instead.
    void replace(Port from, Port to)
    {
        for (auto& [a, p] : side_point)
            if (p == from) p = to;
        std::set<std::pair<Port, Port>> pp;
        for (auto [p, q] : point_point) {
            if (p == from) p = to;
            if (q == from) q = to;
            if (p != q) pp.insert(std::minmax(p, q));
        }
        point_point = std::move(pp);
    }
    bool is_polygon_side(int a) const
    {
        const auto& o = owners[static_cast<std::size_t>(a)];
        return !o.edge && !pieces[static_cast<std::size_t>(o.index)].degenerate;
    }
    bool is_edge_side(int a) const { return owners[static_cast<std::size_t>(a)].edge; }
    int live_placeholders() const
    {
        return static_cast<int>(std::count_if(pieces.begin(), pieces.end(), [](const Piece& p) { return p.alive && p.degenerate; }));
    }
};

namespace exotic_detail {

inline std::string side_name(const PreLimit& L, int a)
{
    const auto& o = L.owners[static_cast<std::size_t>(a)];
    if (o.edge) return "side " + std::to_string(o.k) + " of edge " + std::to_string(o.index);
    const auto& P = L.pieces[static_cast<std::size_t>(o.index)];
    auto pos = std::find(P.sides.begin(), P.sides.end(), a) - P.sides.begin();
    return (P.degenerate ? "side " : "side ") + std::to_string(pos) + (P.degenerate ? " of placeholder " : " of polygon ") + std::to_string(o.index);
}

/// Long sides split a two-long-side polygon into the clusters around their ends.
inline std::pair<int, int> cluster_of_short_side(int n, int l0, int l1, int side)
{
    // vertices l0+1 .. l1 form cluster 1, the rest cluster 0
    auto in_b = [&](int v) {
        int d = ((v - (l0 + 1)) % n + n) % n;
        int span = ((l1 - (l0 + 1)) % n + n) % n;
        return d <= span;
    };
    return {in_b(side) ? 1 : 0, in_b(side + 1) ? 1 : 0};
}

}  // namespace exotic_detail

/// Re-expresses the gluings of a face set in terms of limit pieces. Faces of
/// two long sides become edges: their long sides become the edge sides and a
/// short side becomes the extremity of its cluster.
inline PreLimit assemble_prelimit(const std::vector<LimitFace>& faces, const std::vector<std::pair<SideRef, SideRef>>& pairings)
{
    using K = DegenerationLabel::Kind;
    using Port = PreLimit::Port;
    PreLimit L;
    // for every face side: a side id or a point port
    std::vector<std::vector<std::variant<int, Port>>> port(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& F = faces[f];
        const int n = F.shape.size();
        if (n < 3) throw DomainError("cannot assemble: face " + std::to_string(f) + " has fewer than 3 sides");
        const auto& lab = F.label;
        if (lab.kind == K::Unclassified) throw DomainError("cannot assemble: face " + std::to_string(f) + " is unclassified");
        if (lab.kind == K::Type2) {
            if (lab.long_sides.size() != 2) throw DomainError("cannot assemble: face " + std::to_string(f) + " needs two long sides");
            int l0 = lab.long_sides[0], l1 = lab.long_sides[1];
            auto c0 = exotic_detail::cluster_of_short_side(n, l0, l1, l0);
            if (c0 != std::pair{0, 1}) throw DomainError("cannot assemble: long sides of face " + std::to_string(f) + " do not separate two clusters");
            int e = static_cast<int>(L.edges.size());
            PreLimit::Edge E;
            E.theta12 = Direction(F.shape.side_vector(l0));
            E.face = static_cast<int>(f);
            E.sides = {L.new_side({true, e, 0}), L.new_side({true, e, 1})};
            L.edges.push_back(E);
            for (int k = 0; k < n; ++k) {
                if (k == l0) port[f].push_back(E.sides[1]);
                else if (k == l1) port[f].push_back(E.sides[0]);
                else {
                    auto [a, b] = exotic_detail::cluster_of_short_side(n, l0, l1, k);
                    if (a != b) throw DomainError("cannot assemble: face " + std::to_string(f) + " has a third long side");
                    port[f].push_back(Port{Port::Kind::Extremity, e, a});
                }
            }
            continue;
        }
        int pi = static_cast<int>(L.pieces.size());
        PreLimit::Piece P;
        P.shape = F.shape;
        P.face = static_cast<int>(f);
        P.degenerate = lab.kind == K::Type1;
        for (int k = 0; k < n; ++k) {
            P.sides.push_back(L.new_side({false, pi, 0}));
            port[f].push_back(P.sides.back());
            if (!P.degenerate) P.vertices.push_back(L.new_vertex());
        }
        if (P.degenerate) {
            if (lab.long_sides.size() != 1) throw DomainError("cannot assemble: face " + std::to_string(f) + " needs one long side");
            P.long_side = P.sides[static_cast<std::size_t>(lab.long_sides[0])];
        }
        L.pieces.push_back(std::move(P));
    }
    std::vector<std::vector<int>> used(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) used[f].assign(static_cast<std::size_t>(faces[f].shape.size()), 0);
    auto at = [&](SideRef r) -> std::variant<int, Port>& {
        if (r.polygon < 0 || r.polygon >= static_cast<int>(faces.size()) || r.side < 0 || r.side >= faces[static_cast<std::size_t>(r.polygon)].shape.size())
            throw DomainError("cannot assemble: pairing names a missing side");
        ++used[static_cast<std::size_t>(r.polygon)][static_cast<std::size_t>(r.side)];
        return port[static_cast<std::size_t>(r.polygon)][static_cast<std::size_t>(r.side)];
    };
    for (const auto& [a, b] : pairings) {
        auto& pa = at(a);
        auto& pb = at(b);
        if (std::holds_alternative<int>(pa) && std::holds_alternative<int>(pb)) L.glue(std::get<int>(pa), std::get<int>(pb));
        else if (std::holds_alternative<int>(pa)) L.glue(std::get<int>(pa), std::get<Port>(pb));
        else if (std::holds_alternative<int>(pb)) L.glue(std::get<int>(pb), std::get<Port>(pa));
        else L.glue(std::get<Port>(pa), std::get<Port>(pb));
    }
    for (const auto& u : used)
        for (int c : u) {
            if (c > 1) throw DomainError("cannot assemble: a side is paired twice");
            if (c == 0) L.source_closed = false;
        }
    return L;
}

/// The pre-limit of a flow: the last polygonation with the labels of the
/// final constant-pattern segment.
inline PreLimit assemble_prelimit(const FlowTrace& tr)
{
    if (tr.snapshots.empty() || !tr.snapshots.back().delaunay) throw DomainError("cannot assemble: no Delaunay snapshot");
    const auto& d = *tr.snapshots.back().delaunay;
    if (tr.face_labels.size() != d.faces.size()) throw DomainError("cannot assemble: labels do not match the faces");
    std::vector<LimitFace> faces;
    for (std::size_t f = 0; f < d.faces.size(); ++f) faces.push_back({d.faces[f], tr.face_labels[f]});
    return assemble_prelimit(faces, d.pairings);
}

// ---------------------------------------------------------------------------
// Reduction

struct LimitAudit {
    bool placeholders_left = false;
    bool edge_polygon_gluings = false;
    bool extremity_gluings = false;
    std::vector<std::string> violations;  ///< of the resulting exotic surface
    bool ok() const { return !placeholders_left && !edge_polygon_gluings && !extremity_gluings && violations.empty(); }
};

struct LimitResult {
    ExoticSurface surface;
    std::vector<std::string> log;  ///< one line per rewrite
    int passes = 0;
    int dropped_point_gluings = 0;  ///< identifications of vertices with points, not representable
    int components = 0;             ///< of the core
    LimitAudit audit;
};

namespace exotic_detail {

using Port = PreLimit::Port;

/// Strictly decreases with every rewrite.
inline long progress_measure(const PreLimit& L)
{
    long m = 0;
    for (const auto& P : L.pieces)
        if (P.alive && P.degenerate) m += 4 * static_cast<long>(P.sides.size());
    for (const auto& E : L.edges)
        if (E.alive) m += E.kind ? 1 : 3;
    for (const auto& [p, q] : L.point_point)
        if (p.kind == Port::Kind::Extremity && q.kind == Port::Kind::Extremity) ++m;
    return m;
}

inline void kill_piece(PreLimit& L, int i)
{
    auto& P = L.pieces[static_cast<std::size_t>(i)];
    for (int a : P.sides) L.release(a);
    P.alive = false;
}

// an edge side glued to a polygon side: drop the edge
inline bool step_edge_on_polygon(PreLimit& L, std::vector<std::string>& log)
{
    for (int e = 0; e < static_cast<int>(L.edges.size()); ++e) {
        auto& E = L.edges[static_cast<std::size_t>(e)];
        if (!E.alive) continue;
        for (int k = 0; k < 2; ++k) {
            auto q = L.partner(E.sides[static_cast<std::size_t>(k)]);
            if (!q || !L.is_polygon_side(*q)) continue;
            int ps = *q;
            const auto& o = L.owners[static_cast<std::size_t>(ps)];
            const auto& P = L.pieces[static_cast<std::size_t>(o.index)];
            int t = static_cast<int>(std::find(P.sides.begin(), P.sides.end(), ps) - P.sides.begin());
            int n = static_cast<int>(P.sides.size());
            Port vs{Port::Kind::Vertex, P.vertices[static_cast<std::size_t>(t)], 0};
            Port vt{Port::Kind::Vertex, P.vertices[static_cast<std::size_t>((t + 1) % n)], 0};
            // side 0 sees the polygon on its left: extremity 0 sits at the start of the side
            Port at0 = k == 0 ? vs : vt, at1 = k == 0 ? vt : vs;
            log.push_back("edge " + std::to_string(e) + " lies on " + side_name(L, ps) + ": removed");
            int other = E.sides[static_cast<std::size_t>(1 - k)];
            auto op = L.partner(other);
            auto opt = L.point(other);
            L.release(E.sides[0]);
            L.release(E.sides[1]);
            if (op) L.glue(*op, ps);
            else if (opt) L.glue(ps, *opt);
            L.replace({Port::Kind::Extremity, e, 0}, at0);
            L.replace({Port::Kind::Extremity, e, 1}, at1);
            E.alive = false;
            return true;
        }
    }
    return false;
}

// a placeholder's long side glued to a short side of another placeholder: merge
inline bool step_merge(PreLimit& L, std::vector<std::string>& log)
{
    for (int i = 0; i < static_cast<int>(L.pieces.size()); ++i) {
        auto& D = L.pieces[static_cast<std::size_t>(i)];
        if (!D.alive || !D.degenerate) continue;
        auto q = L.partner(D.long_side);
        if (!q || L.is_edge_side(*q)) continue;
        int j = L.owners[static_cast<std::size_t>(*q)].index;
        auto& T = L.pieces[static_cast<std::size_t>(j)];
        if (j == i || !T.degenerate || *q == T.long_side) continue;
        auto pos = std::find(T.sides.begin(), T.sides.end(), *q);
        auto l = std::find(D.sides.begin(), D.sides.end(), D.long_side) - D.sides.begin();
        std::vector<int> shorts;
        for (std::size_t r = 1; r < D.sides.size(); ++r) shorts.push_back(D.sides[(static_cast<std::size_t>(l) + r) % D.sides.size()]);
        log.push_back("placeholder " + std::to_string(i) + " merged into placeholder " + std::to_string(j));
        L.release(D.long_side);
        pos = T.sides.erase(pos);
        T.sides.insert(pos, shorts.begin(), shorts.end());
        for (int a : shorts) L.owners[static_cast<std::size_t>(a)].index = j;
        T.shape.reset();
        D.alive = false;
        D.sides.clear();
        return true;
    }
    return false;
}

// a placeholder's long side glued to one of its own short sides: a hole
inline bool step_hole(PreLimit& L, std::vector<std::string>& log)
{
    for (int i = 0; i < static_cast<int>(L.pieces.size()); ++i) {
        auto& D = L.pieces[static_cast<std::size_t>(i)];
        if (!D.alive || !D.degenerate) continue;
        auto q = L.partner(D.long_side);
        if (!q || L.is_edge_side(*q) || L.owners[static_cast<std::size_t>(*q)].index != i) continue;
        Hole h;
        if (D.shape) {
            auto l = std::find(D.sides.begin(), D.sides.end(), D.long_side) - D.sides.begin();
            h.theta = Direction(D.shape->side_vector(static_cast<int>(l)));
        }
        // what crossed the long side came in from its right
        h.entry_ccw = false;
        int hi = static_cast<int>(L.holes.size());
        L.holes.push_back(h);
        log.push_back("placeholder " + std::to_string(i) + " closes on itself: hole " + std::to_string(hi));
        for (int a : D.sides) {
            if (a == D.long_side || a == *q) continue;
            if (auto x = L.partner(a)) {
                int b = *x;
                L.release(a);
                L.glue(b, Port{Port::Kind::Hole, hi, 0});
            }
        }
        kill_piece(L, i);
        return true;
    }
    return false;
}

inline std::vector<Scalar> subdivision(const PreLimit::Piece& D, int l, int m)
{
    std::vector<Scalar> even;
    for (int j = 1; j < m; ++j) even.push_back(frac(j, m));
    if (!D.shape || D.shape->size() != static_cast<int>(D.sides.size())) return even;
    const Polygon& Q = *D.shape;
    Point a = Q.vertex(l), b = Q.vertex(l + 1);
    Vector u = b - a;
    Scalar uu = norm2(u);
    if (sgn(uu) == 0) return even;
    // the glued side runs from Q's vertex l+1 back to vertex l
    std::vector<Scalar> out;
    for (int j = 1; j < m; ++j) out.push_back(1 - dot(Q.vertex(l + 1 + j) - a, u) / uu);
    Scalar prev = 0;
    for (const auto& x : out) {
        if (x <= prev || x >= 1) return even;
        prev = x;
    }
    return out;
}

// a placeholder's long side glued to a polygon side: subdivide and fan
inline bool step_subdivide(PreLimit& L, std::vector<std::string>& log)
{
    for (int i = 0; i < static_cast<int>(L.pieces.size()); ++i) {
        if (!L.pieces[static_cast<std::size_t>(i)].alive || !L.pieces[static_cast<std::size_t>(i)].degenerate) continue;
        auto q = L.partner(L.pieces[static_cast<std::size_t>(i)].long_side);
        if (!q || !L.is_polygon_side(*q)) continue;
        const PreLimit::Piece D = L.pieces[static_cast<std::size_t>(i)];
        const int pi = L.owners[static_cast<std::size_t>(*q)].index;
        const PreLimit::Piece P = L.pieces[static_cast<std::size_t>(pi)];
        const Polygon& S = *P.shape;
        const int n = static_cast<int>(P.sides.size());
        const int t = static_cast<int>(std::find(P.sides.begin(), P.sides.end(), *q) - P.sides.begin());
        const int l = static_cast<int>(std::find(D.sides.begin(), D.sides.end(), D.long_side) - D.sides.begin());
        const int m = static_cast<int>(D.sides.size()) - 1;
        auto sidx = [&](int k) { return static_cast<std::size_t>(((k % n) + n) % n); };
        std::vector<int> shorts;
        for (int r = 1; r <= m; ++r) shorts.push_back(D.sides[static_cast<std::size_t>((l + r) % (m + 1))]);

        log.push_back("placeholder " + std::to_string(i) + " lies on " + side_name(L, *q) + ": subdivided into " + std::to_string(m));
        L.release(D.long_side);
        L.pieces[static_cast<std::size_t>(i)].alive = false;

        if (m == 1) {
            int a = shorts[0];
            auto x = L.partner(a);
            auto p = L.point(a);
            L.release(a);
            if (x) L.glue(*x, *q);
            else if (p) L.glue(*q, *p);
            return true;
        }

        auto fr = subdivision(D, l, m);
        Point v0 = S.vertex(t), v1 = S.vertex(t + 1);
        std::vector<Point> qs{v0};
        std::vector<int> qv{P.vertices[sidx(t)]};
        for (const auto& f : fr) {
            qs.push_back(v0 + f * (v1 - v0));
            qv.push_back(L.new_vertex());
        }
        qs.push_back(v1);
        qv.push_back(P.vertices[sidx(t + 1)]);

        L.pieces[static_cast<std::size_t>(pi)].alive = false;
        // the fan apex is the vertex after the subdivided side
        const int apex_i = t + 2;
        const Point apex = S.vertex(apex_i);
        const int apex_v = P.vertices[sidx(apex_i)];
        auto add = [&](std::vector<Point> pts, std::vector<int> sides, std::vector<int> verts) {
            int id = static_cast<int>(L.pieces.size());
            PreLimit::Piece N;
            N.shape = Polygon{std::move(pts)};
            N.sides = std::move(sides);
            N.vertices = std::move(verts);
            N.face = P.face;
            for (int a : N.sides) L.owners[static_cast<std::size_t>(a)] = {false, id, 0};
            L.pieces.push_back(std::move(N));
        };
        int diag = -1;  // side from apex back to v0, in the first triangle
        std::vector<int> sub;
        int prev_shared = -1;
        for (int j = 0; j < m; ++j) {
            int seg = L.new_side({});
            sub.push_back(seg);
            int back;  // apex -> q_j
            if (j == 0) {
                back = n == 3 ? P.sides[sidx(t + 2)] : L.new_side({});
                diag = back;
            } else {
                back = L.new_side({});
                L.glue(back, prev_shared);
            }
            int fwd = j == m - 1 ? P.sides[sidx(t + 1)] : L.new_side({});  // q_{j+1} -> apex
            prev_shared = fwd;
            add({qs[static_cast<std::size_t>(j)], qs[static_cast<std::size_t>(j + 1)], apex}, {seg, fwd, back},
                {qv[static_cast<std::size_t>(j)], qv[static_cast<std::size_t>(j + 1)], apex_v});
        }
        if (n > 3) {
            // the rest of the polygon, closed by the diagonal from v0 to the apex
            std::vector<Point> pts;
            std::vector<int> sides, verts;
            for (int k = 2; k < n; ++k) {
                pts.push_back(S.vertex(t + k));
                verts.push_back(P.vertices[sidx(t + k)]);
                sides.push_back(P.sides[sidx(t + k)]);
            }
            pts.push_back(v0);
            verts.push_back(P.vertices[sidx(t)]);
            int d2 = L.new_side({});
            sides.push_back(d2);
            add(std::move(pts), std::move(sides), std::move(verts));
            L.glue(diag, d2);
        }
        for (int j = 0; j < m; ++j) {
            int a = shorts[static_cast<std::size_t>(j)];
            auto x = L.partner(a);
            auto p = L.point(a);
            L.release(a);
            if (x) L.glue(*x, sub[static_cast<std::size_t>(j)]);
            else if (p) L.glue(sub[static_cast<std::size_t>(j)], *p);
        }
        return true;
    }
    return false;
}

// a placeholder's long side glued to a point: everything on its short sides goes there
inline bool step_to_point(PreLimit& L, std::vector<std::string>& log)
{
    for (int i = 0; i < static_cast<int>(L.pieces.size()); ++i) {
        auto& D = L.pieces[static_cast<std::size_t>(i)];
        if (!D.alive || !D.degenerate) continue;
        auto p = L.point(D.long_side);
        if (!p) continue;
        log.push_back("placeholder " + std::to_string(i) + " collapses to a point");
        for (int a : D.sides) {
            if (a == D.long_side) continue;
            if (auto x = L.partner(a)) {
                int b = *x;
                L.release(a);
                L.glue(b, *p);
            }
        }
        kill_piece(L, i);
        return true;
    }
    return false;
}

// edges glued side to side become a single edge
inline void step_group_edges(PreLimit& L, std::vector<std::string>& log)
{
    const int ne = static_cast<int>(L.edges.size());
    std::vector<int> comp(static_cast<std::size_t>(ne), -1), parity(static_cast<std::size_t>(ne), 0);
    for (int s = 0; s < ne; ++s) {
        if (!L.edges[static_cast<std::size_t>(s)].alive || L.edges[static_cast<std::size_t>(s)].kind || comp[static_cast<std::size_t>(s)] >= 0) continue;
        std::vector<int> members{s}, stack{s};
        comp[static_cast<std::size_t>(s)] = s;
        int internal = 0;
        while (!stack.empty()) {
            int e = stack.back();
            stack.pop_back();
            for (int k = 0; k < 2; ++k) {
                auto q = L.partner(L.edges[static_cast<std::size_t>(e)].sides[static_cast<std::size_t>(k)]);
                if (!q || !L.is_edge_side(*q)) continue;
                ++internal;
                const auto& o = L.owners[static_cast<std::size_t>(*q)];
                // side k against side k means the orientations disagree
                int par = parity[static_cast<std::size_t>(e)] ^ (o.k == k ? 1 : 0);
                if (comp[static_cast<std::size_t>(o.index)] < 0) {
                    comp[static_cast<std::size_t>(o.index)] = s;
                    parity[static_cast<std::size_t>(o.index)] = par;
                    members.push_back(o.index);
                    stack.push_back(o.index);
                } else if (parity[static_cast<std::size_t>(o.index)] != par) {
                    throw DomainError("cannot reduce: edges glued with inconsistent orientations");
                }
            }
        }
        internal /= 2;
        bool loop = internal == static_cast<int>(members.size());
        const auto& first = L.edges[static_cast<std::size_t>(s)];
        PreLimit::Edge N;
        N.theta12 = first.theta12;
        N.kind = loop ? ExoticEdge::Kind::C : ExoticEdge::Kind::T;
        N.face = first.face;
        int id = static_cast<int>(L.edges.size());
        N.sides = {L.new_side({true, id, 0}), L.new_side({true, id, 1})};
        // free sides move over with their attachments
        std::vector<std::pair<int, int>> moves;
        for (int e : members) {
            const auto& E = L.edges[static_cast<std::size_t>(e)];
            for (int k = 0; k < 2; ++k) {
                int a = E.sides[static_cast<std::size_t>(k)];
                auto q = L.partner(a);
                if (q && L.is_edge_side(*q)) continue;
                moves.push_back({a, N.sides[static_cast<std::size_t>(k ^ parity[static_cast<std::size_t>(e)])]});
            }
        }
        if (!loop && moves.size() > 2) throw DomainError("cannot reduce: edge chain has more than two free sides");
        L.edges.push_back(N);
        for (auto [a, b] : moves) {
            auto q = L.partner(a);
            auto p = L.point(a);
            L.release(a);
            if (q) L.glue(*q, b);
            else if (p) L.glue(b, *p);
        }
        std::string names;
        for (int e : members) {
            const auto& E = L.edges[static_cast<std::size_t>(e)];
            L.release(E.sides[0]);
            L.release(E.sides[1]);
            L.edges[static_cast<std::size_t>(e)].alive = false;
            for (int c = 0; c < 2; ++c) L.replace({Port::Kind::Extremity, e, c}, {Port::Kind::Extremity, id, c ^ parity[static_cast<std::size_t>(e)]});
            names += (names.empty() ? "" : ",") + std::to_string(e);
        }
        log.push_back("edges {" + names + "} become edge " + std::to_string(id) + " of type " + to_string(*N.kind));
        comp.resize(L.edges.size(), id);
        parity.resize(L.edges.size(), 0);
    }
}

inline bool step_drop_extremity_gluings(PreLimit& L, std::vector<std::string>& log)
{
    auto n = std::erase_if(L.point_point, [](const auto& pq) {
        return pq.first.kind == Port::Kind::Extremity && pq.second.kind == Port::Kind::Extremity;
    });
    if (n) log.push_back("dropped " + std::to_string(n) + " extremity gluings");
    return n > 0;
}

}  // namespace exotic_detail

/// Rewrites a pre-limit into an exotic surface: removes edges lying on
/// polygons, merges and removes degenerate placeholders, drops gluings
/// between edge extremities and groups edges into C and T edges.
inline LimitResult reduce(PreLimit L)
{
    using namespace exotic_detail;
    LimitResult out;
    auto& log = out.log;
    long measure = progress_measure(L);
    while (true) {
        ++out.passes;
        bool changed = false;
        while (step_edge_on_polygon(L, log)) changed = true;
        while (step_merge(L, log)) changed = true;
        while (step_hole(L, log) || step_subdivide(L, log) || step_to_point(L, log) || step_merge(L, log)) changed = true;
        if (step_drop_extremity_gluings(L, log)) changed = true;
        // a subdivision may have put an edge onto a polygon
        if (changed) {
            long m = progress_measure(L);
            if (m >= measure) throw DomainError("reduction made no progress");
            measure = m;
            continue;
        }
        break;
    }
    if (L.live_placeholders() > 0) {
        std::string msg = "cannot reduce: a degenerate polygon is glued to nothing it can collapse onto";
        for (const auto& s : log) msg += "; " + s;
        throw DomainError(msg);
    }
    step_group_edges(L, log);

    // -- the exotic surface
    ExoticSurface& x = out.surface;
    SurfaceSpec spec;
    std::map<int, SideRef> where;  // polygon side id -> core side
    std::map<int, CornerRef> vertex_at;
    for (const auto& P : L.pieces) {
        if (!P.alive || P.degenerate) continue;
        int id = static_cast<int>(spec.polygons.size());
        spec.polygons.push_back(*P.shape);
        for (std::size_t k = 0; k < P.sides.size(); ++k) {
            where[P.sides[k]] = {id, static_cast<int>(k)};
            vertex_at.emplace(P.vertices[k], CornerRef{id, static_cast<int>(k)});
        }
    }
    std::map<int, int> edge_id;
    for (int e = 0; e < static_cast<int>(L.edges.size()); ++e) {
        const auto& E = L.edges[static_cast<std::size_t>(e)];
        if (!E.alive) continue;
        edge_id[e] = static_cast<int>(x.edges.size());
        x.edges.push_back({*E.kind, E.theta12, E.theta12.opposite()});
    }
    x.holes = L.holes;

    std::set<CornerRef> marked;
    auto target = [&](const Port& p) -> AttachTarget {
        AttachTarget t;
        switch (p.kind) {
        case Port::Kind::Extremity:
            t.kind = AttachTarget::Kind::EdgeExtremity;
            t.index = edge_id.at(p.index);
            t.extremity = p.k;
            break;
        case Port::Kind::Hole:
            t.kind = AttachTarget::Kind::HoleEntry;
            t.index = p.index;
            break;
        case Port::Kind::Vertex:
            t.kind = AttachTarget::Kind::CorePoint;
            t.corner = vertex_at.at(p.index);
            t.exit = t.corner;
            marked.insert(t.corner);
            break;
        }
        return t;
    };
    std::set<int> done;
    for (const auto& [a, b] : L.side_side) {
        if (done.count(a)) continue;
        done.insert(a);
        done.insert(b);
        if (where.count(a) && where.count(b)) spec.pairings.push_back({where.at(a), where.at(b)});
        else out.audit.edge_polygon_gluings = true;
    }
    for (const auto& [a, w] : where)
        if (!L.side_side.count(a)) spec.boundary.push_back(w);
    for (const auto& [a, p] : L.side_point) {
        AttachSource src;
        if (where.count(a)) {
            src.kind = AttachSource::Kind::CoreBoundary;
            src.side = where.at(a);
        } else {
            const auto& o = L.owners[static_cast<std::size_t>(a)];
            if (!o.edge || !edge_id.count(o.index)) continue;
            src.kind = AttachSource::Kind::EdgeSide;
            src.edge = edge_id.at(o.index);
            src.edge_side = o.k;
        }
        x.attachments.push_back({src, target(p)});
    }
    for (const auto& [p, q] : L.point_point) {
        if (p.kind == Port::Kind::Extremity && q.kind == Port::Kind::Extremity) out.audit.extremity_gluings = true;
        else ++out.dropped_point_gluings;
    }
    std::sort(spec.boundary.begin(), spec.boundary.end());
    spec.marked_points.assign(marked.begin(), marked.end());
    spec.multi_component = true;
    if (!spec.polygons.empty()) {
        auto rep = validate(spec);
        if (!rep.ok()) throw DomainError("limit polygons do not form a dilation surface: " + rep.violations.front());
        x.core = DilationSurface::from_spec(std::move(spec));
        // components of the core
        const int np = x.core->polygon_count();
        std::vector<int> parent(static_cast<std::size_t>(np));
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int a) { return parent[static_cast<std::size_t>(a)] == a ? a : parent[static_cast<std::size_t>(a)] = find(parent[static_cast<std::size_t>(a)]); };
        for (const auto& [a, b] : x.core->spec().pairings) parent[static_cast<std::size_t>(find(a.polygon))] = find(b.polygon);
        for (int k = 0; k < np; ++k) out.components += find(k) == k;
    }
    out.audit.placeholders_left = L.live_placeholders() > 0;
    for (const auto& E : L.edges)
        if (E.alive)
            for (int a : E.sides)
                if (auto q = L.partner(a); q && L.is_polygon_side(*q)) out.audit.edge_polygon_gluings = true;
    out.audit.violations = validate_exotic(x).report.violations;
    return out;
}

/// Checks on a limit: it is never empty, and it is closed whenever the
/// source surface is.
struct LemmaReport {
    bool nonempty = false;
    bool closed_required = false;
    bool closed = false;
    bool ok() const { return nonempty && (!closed_required || closed); }
};

inline LemmaReport check_limit_lemmas(const PreLimit& source, const ExoticSurface& x)
{
    LemmaReport r;
    r.nonempty = !x.empty();
    r.closed_required = source.source_closed;
    r.closed = validate_exotic(x).closed;
    return r;
}

}  // namespace dilatone
