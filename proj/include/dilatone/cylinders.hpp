#pragma once
// Cylinders: maximal families of parallel closed leaves (flat) and families of
// closed leaves sharing one attracting holonomy (dilation), and direction sweeps.

#include "aiet.hpp"
#include "parallel.hpp"
#include "tracer.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

namespace dilatone {

using Itinerary = std::vector<SideRef>;

/// Least rotation of a cyclic word, so equal closed leaves compare equal.
inline Itinerary canonical_cycle(const Itinerary& w)
{
    Itinerary best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        Itinerary c(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
        c.insert(c.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
        if (c < best) best = std::move(c);
    }
    return best;
}

/// Key of an unoriented closed leaf: the least rotation of its itinerary or of the
/// itinerary of the reversed leaf.
inline Itinerary leaf_key(const DilationSurface& s, const Itinerary& w)
{
    Itinerary r;
    for (auto it = w.rbegin(); it != w.rend(); ++it) r.push_back(s.gluing(*it)->to);
    return std::min(canonical_cycle(w), canonical_cycle(r));
}

struct Cylinder {
    enum class Kind { Flat, Dilation };
    Kind kind = Kind::Flat;
    Scalar multiplier = 1;  ///< >= 1; leaves are oriented so that they expand
    bool reversed = false;  ///< the orbit it was built from contracted
    Direction direction;    ///< core direction of the orbit, after reorientation
    /// Closed cone of directions, counterclockwise from cone_lo to cone_hi.
    /// A flat cylinder has cone_lo == cone_hi == direction.
    Vector cone_lo, cone_hi;
    bool cone_exact = true;  ///< both cone ends were pinned to singular directions
    double angle = 0;
    std::optional<Scalar> exact_modulus;
    double modulus = 0;  ///< +inf for a cone of angle >= pi
    Vector circumference, width;  ///< flat only, in the chart of the transversal
    SideRef transversal;
    Itinerary itinerary;                ///< leaf key of the orbit it was built from
    std::set<Itinerary> itineraries;    ///< leaf keys of every closed leaf seen inside
    std::vector<std::vector<Leg>> leaves;  ///< sample closed leaves, one period each
};

inline const char* to_string(Cylinder::Kind k) { return k == Cylinder::Kind::Flat ? "flat" : "dilation"; }

/// Periodic points of the resolved branches of a return map.
inline PeriodicSearch fixed_points(const PiecewiseAffineReturnMap& m, int max_period, bool first_only = false)
{
    std::vector<AffineBranch> br;
    for (const auto& b : m.branches)
        if (b.kind == ReturnBranch::Kind::Resolved) br.push_back({b.lo, b.hi, b.slope, b.offset});
    return periodic_points(br, max_period, first_only, 2000000);
}

namespace cyl_detail {

inline Vector prim(const Vector& v) { return Direction(v).primitive(); }
inline Vector mirror(const Vector& v) { return {v.x, -v.y}; }

// Counterclockwise angle from `base` as an exactly comparable vector.
inline Vector rel(const Vector& base, const Vector& v) { return {dot(v, base), cross(base, v)}; }

// Sweeps the cone of a dilation cylinder around its developed fixed point c.
class ConeSearch {
public:
    ConeSearch(const DilationSurface& s, int budget, Scalar lambda, Point c, int sigma)
        : s_(s), tr_(s), budget_(budget), lambda_(std::move(lambda)), c_(std::move(c)), sigma_(sigma)
    {
    }

    struct Anchor {
        Vector w;
        Tracer::Placement at;  // dev: anchor chart -> base chart
    };

    void seed(const Vector& w0, Tracer::Placement at, const TraceOutcome& leaf)
    {
        anchors_.push_back({w0, at});
        absorb(at, leaf);
    }

    /// Farthest cone direction reached turning counterclockwise (or clockwise when
    /// `cw`) from anchor 0. Sets `exact` to false when bisection gave up.
    Vector expand(bool cw, bool& exact)
    {
        auto fl = [&](const Vector& v) { return cw ? mirror(v) : v; };
        Vector w0 = fl(anchors_[0].w);
        std::size_t cur = 0;
        double swept = 0;
        while (true) {
            Vector cw_cur = fl(anchors_[cur].w);
            // next candidate strictly after the current direction
            std::optional<Vector> next;
            for (const auto& k0 : candidates_) {
                Vector k = fl(k0);
                if (compare_angle(rel(cw_cur, k), rel(cw_cur, cw_cur)) <= 0) continue;
                if (compare_angle(rel(w0, k), rel(w0, cw_cur)) <= 0 && !(Direction(k) == Direction(w0))) continue;
                if (!next || compare_angle(rel(cw_cur, k), rel(cw_cur, *next)) < 0) next = k;
            }
            if (!next) throw DomainError("dilation cylinder cone has no boundary");
            if (swept > 2 * std::numbers::pi) throw DomainError("dilation cylinder cone wraps around");
            const Vector k = *next;
            if (sgn(dot(cw_cur, k)) <= 0 || sgn(cross(cw_cur, k)) <= 0) {
                // long arc: step to a midpoint first
                Vector m = prim(direction_between(cw_cur, k));
                if (auto a = probe(fl(m), cur)) {
                    swept += ccw_angle(cw_cur, m);
                    cur = *a;
                    continue;
                }
                if (!bisect(cw, cur, m, swept, exact)) return anchors_[cur].w;
                continue;
            }
            Vector m = prim(direction_between(cw_cur, k));
            auto a = probe(fl(m), cur);
            if (!a) {
                if (!bisect(cw, cur, m, swept, exact)) return anchors_[cur].w;
                continue;
            }
            swept += ccw_angle(cw_cur, k);
            if (auto b = probe(fl(k), *a)) {
                cur = *b;
                continue;
            }
            return fl(k);
        }
    }

    const std::vector<Anchor>& anchors() const { return anchors_; }
    std::set<Itinerary> itineraries;
    std::vector<std::vector<Leg>> leaves;

private:
    // Moves from anchor `from` along a straight segment to the ray c + r w and traces
    // the leaf there; records a new anchor when it closes up with the same holonomy.
    std::optional<std::size_t> probe(const Vector& w, std::size_t from)
    {
        const Anchor& A = anchors_[from];
        Point xa = A.at.dev(A.at.point);
        Vector r = xa - c_;
        Scalar dw = dot(w, r);
        if (sgn(dw) <= 0) return std::nullopt;
        Point q = c_ + (norm2(r) / dw) * w;
        auto placed = tr_.walk(A.at.polygon, A.at.point, (1 / A.at.dev.a) * (q - xa), budget_);
        if (!placed) return std::nullopt;
        Tracer::Placement at{placed->polygon, placed->point, compose(A.at.dev, placed->dev)};
        TraceOutcome leaf;
        try {
            leaf = tr_.trace(at.polygon, at.point, Direction(sigma_ * w), budget_);
        } catch (const DomainError&) {
            return std::nullopt;
        }
        if (leaf.kind != TraceKind::ClosedUp || leaf.accumulated_dilation != lambda_) return std::nullopt;
        Point cl = Point(0, 0) + (1 / (1 - lambda_)) * leaf.developing.b;
        if (!(at.dev(cl) == c_)) return std::nullopt;
        anchors_.push_back({prim(w), at});
        absorb(at, leaf);
        return anchors_.size() - 1;
    }

    // Failing midpoint m after anchor cur: halve the arc until a candidate shows up
    // inside it or the search gives up. Returns false when the cone ends at cur.
    bool bisect(bool cw, std::size_t& cur, Vector fail, double& swept, bool& exact)
    {
        auto fl = [&](const Vector& v) { return cw ? mirror(v) : v; };
        for (int it = 0; it < 40; ++it) {
            if (swept > 2 * std::numbers::pi) throw DomainError("dilation cylinder cone wraps around");
            Vector cw_cur = fl(anchors_[cur].w);
            for (const auto& k0 : candidates_) {
                Vector k = fl(k0);
                if (sgn(cross(cw_cur, k)) > 0 && sgn(cross(k, fail)) > 0) return true;  // rescan with it
            }
            Vector m = prim(direction_between(cw_cur, fail));
            if (auto a = probe(fl(m), cur)) {
                swept += ccw_angle(cw_cur, m);
                cur = *a;
            } else {
                fail = m;
            }
        }
        exact = false;
        return false;
    }

    void absorb(const Tracer::Placement& at, const TraceOutcome& leaf)
    {
        itineraries.insert(leaf_key(s_, leaf.itinerary()));
        if (leaves.size() < 16) leaves.push_back(leaf.legs);
        for (const auto& L : leaf.legs) {
            DilationMap dev = compose(at.dev, L.dev);
            const Polygon& P = s_.polygon(L.polygon);
            for (const auto& v : P.vertices) {
                Vector k = dev(v) - c_;
                if (is_zero(k)) continue;
                Vector p = prim(k);
                if (seen_.insert({p.x, p.y}).second) candidates_.push_back(p);
            }
        }
    }

    const DilationSurface& s_;
    Tracer tr_;
    int budget_;
    Scalar lambda_;
    Point c_;
    int sigma_;
    std::vector<Anchor> anchors_;
    std::vector<Vector> candidates_;
    std::set<std::pair<Scalar, Scalar>> seen_;
};

}  // namespace cyl_detail

/// Maximal cylinder containing a closed leaf. Flat leaves are widened to their
/// family on the first crossed edge; dilation leaves are widened to their cone.
inline Cylinder assemble_cylinder(const DilationSurface& s, const TraceOutcome& orbit, int budget = 10000)
{
    if (orbit.kind != TraceKind::ClosedUp || orbit.path.empty()) throw DomainError("not a closed leaf");
    Tracer tr(s);
    const auto& g0 = s.gluing(orbit.path[0].side);
    const SideRef E = g0->to;
    const Point y0 = g0->map(orbit.path[0].point);
    const Direction d = orbit.dir;
    TraceOutcome base = tr.trace(E.polygon, y0, d, orbit.crossings + 2);
    if (base.kind != TraceKind::ClosedUp) throw DomainError("internal: rebased orbit does not close");
    const Scalar lambda = base.accumulated_dilation;
    const Polygon& PE = s.polygon(E.polygon);
    const Point E0 = PE.vertex(E.side);
    const Vector Ev = PE.side_vector(E.side);

    Cylinder cyl;
    cyl.transversal = E;
    cyl.itinerary = leaf_key(s, base.itinerary());
    cyl.itineraries.insert(cyl.itinerary);

    if (lambda == 1) {
        cyl.kind = Cylinder::Kind::Flat;
        cyl.direction = d;
        cyl.cone_lo = cyl.cone_hi = d.vec();
        cyl.angle = 0;
        auto m = return_map(s, E, d, std::max(base.crossings, 1), 200000);
        int returns = 0;
        for (const auto& c : base.path)
            if (s.gluing(c.side)->to == E) ++returns;
        Scalar u = dot(y0 - E0, Ev) / norm2(Ev);
        Scalar lo = 0, hi = 1, S = 1, O = 0;
        for (int k = 0; k < returns; ++k) {
            const ReturnBranch* b = m.branch_at(u);
            if (!b || b->kind != ReturnBranch::Kind::Resolved) throw DomainError("internal: flat family leaves the return map");
            lo = std::max(lo, Scalar((b->lo - O) / S));
            hi = std::min(hi, Scalar((b->hi - O) / S));
            O = b->slope * O + b->offset;
            S = b->slope * S;
            u = b->apply(u);
        }
        if (S != 1 || O != 0) throw DomainError("internal: flat orbit without a flat family");
        cyl.circumference = base.developed();
        cyl.width = (hi - lo) * Ev;
        Scalar mod = flat_cylinder_modulus(cyl.circumference, cyl.width);
        cyl.exact_modulus = mod;
        cyl.modulus = mod.get_d();
        for (Scalar t : {frac(1, 4), frac(1, 2), frac(3, 4)}) {
            auto leaf = tr.trace(E.polygon, E0 + (lo + t * (hi - lo)) * Ev, d, base.crossings + 2);
            if (leaf.kind == TraceKind::ClosedUp) cyl.leaves.push_back(leaf.legs);
        }
        return cyl;
    }

    cyl.kind = Cylinder::Kind::Dilation;
    const int sigma = lambda > 1 ? 1 : -1;
    cyl.reversed = sigma < 0;
    cyl.multiplier = sigma > 0 ? lambda : Scalar(1 / lambda);
    const Point c = Point(0, 0) + (1 / (1 - lambda)) * base.developing.b;
    const Vector w0 = cyl_detail::prim(sigma * d.vec());
    cyl.direction = Direction(w0);
    int leaf_budget = std::min(budget, std::max(64, 4 * base.crossings + 16));
    cyl_detail::ConeSearch cs(s, leaf_budget, lambda, c, sigma);
    cs.seed(w0, {E.polygon, y0, DilationMap()}, base);
    bool exact = true;
    cyl.cone_hi = cs.expand(false, exact);
    cyl.cone_lo = cs.expand(true, exact);
    cyl.cone_exact = exact;
    cyl.angle = ccw_angle(cyl.cone_lo, cyl.cone_hi);
    bool wide = sgn(cross(cyl.cone_lo, cyl.cone_hi)) <= 0;
    if (wide) {
        cyl.modulus = std::numeric_limits<double>::infinity();
    } else {
        cyl.modulus = dilation_cylinder_modulus(cyl.angle, cyl.multiplier.get_d());
        if (auto ht = exact_half_tan(cyl.cone_lo, cyl.cone_hi); ht && exact)
            cyl.exact_modulus = Scalar(2 * *ht / (cyl.multiplier - 1));
    }
    cyl.itineraries.insert(cs.itineraries.begin(), cs.itineraries.end());
    cyl.leaves = std::move(cs.leaves);
    return cyl;
}

// ---------------------------------------------------------------------------
// Intersections and the moduli inequality

namespace cyl_detail {

inline bool legs_cross(const std::vector<Leg>& a, const std::vector<Leg>& b)
{
    for (const auto& x : a)
        for (const auto& y : b) {
            if (x.polygon != y.polygon) continue;
            int o1 = orient2d(x.from, x.to, y.from), o2 = orient2d(x.from, x.to, y.to);
            int o3 = orient2d(y.from, y.to, x.from), o4 = orient2d(y.from, y.to, x.to);
            if (o1 * o2 < 0 && o3 * o4 < 0) return true;
        }
    return false;
}

}  // namespace cyl_detail

/// Two cylinders intersect when sample closed leaves of each cross transversally.
/// This never reports a false intersection; for transverse flat cylinders it is
/// also complete, since every core leaf crosses the other cylinder.
inline bool cylinders_intersect(const Cylinder& a, const Cylinder& b)
{
    for (const auto& x : a.leaves)
        for (const auto& y : b.leaves)
            if (cyl_detail::legs_cross(x, y)) return true;
    return false;
}

struct ModuliCheck {
    int pairs = 0;
    int intersecting = 0;
    double max_product = 0;
    std::vector<std::pair<std::size_t, std::size_t>> violations;
    bool ok() const { return violations.empty(); }
};

/// Checks modulus(a) * modulus(b) <= 1 for every intersecting pair.
inline ModuliCheck check_moduli_lemma(const std::vector<Cylinder>& cyls)
{
    ModuliCheck r;
    for (std::size_t i = 0; i < cyls.size(); ++i)
        for (std::size_t j = i + 1; j < cyls.size(); ++j) {
            ++r.pairs;
            if (!cylinders_intersect(cyls[i], cyls[j])) continue;
            ++r.intersecting;
            bool bad;
            double p;
            if (cyls[i].exact_modulus && cyls[j].exact_modulus) {
                Scalar q = *cyls[i].exact_modulus * *cyls[j].exact_modulus;
                bad = q > 1;
                p = q.get_d();
            } else {
                p = cyls[i].modulus * cyls[j].modulus;
                bad = p > 1 + 1e-12;
            }
            r.max_product = std::max(r.max_product, p);
            if (bad) r.violations.push_back({i, j});
        }
    return r;
}

// ---------------------------------------------------------------------------
// Direction sweeps

struct SweepOptions {
    int directions = 360;
    int budget = 10000;  ///< branch compositions explored per direction
    int max_period = 64;  ///< edge crossings per closed leaf
    int saddle_crossings = 6;  ///< saddle connection directions added to the samples; 0 disables
    unsigned workers = 1;
};

struct SweepReport {
    std::vector<Cylinder> cylinders;
    std::vector<double> sampled;  ///< angles in [0, 2pi)
    /// Covered set as merged closed arcs [start, start + width], radians; a cylinder
    /// covers its cone and the opposite cone.
    std::vector<std::pair<double, double>> covered;
    double max_gap = 2 * std::numbers::pi;
    int truncated_directions = 0;  ///< directions whose search ran out of budget
    int failed_assemblies = 0;     ///< closed leaves whose cylinder could not be assembled
    double max_modulus() const
    {
        double m = 0;
        for (const auto& c : cylinders) m = std::max(m, c.modulus);
        return m;
    }
};

namespace cyl_detail {

inline double wrap(double a)
{
    const double tau = 2 * std::numbers::pi;
    a = std::fmod(a, tau);
    return a < 0 ? a + tau : a;
}

// Merges [start, start + width] arcs on the circle; returns merged arcs and the largest gap.
inline std::pair<std::vector<std::pair<double, double>>, double> merge_arcs(std::vector<std::pair<double, double>> arcs)
{
    const double tau = 2 * std::numbers::pi;
    if (arcs.empty()) return {{}, tau};
    for (auto& a : arcs) a.first = wrap(a.first);
    std::sort(arcs.begin(), arcs.end());
    std::vector<std::pair<double, double>> m;  // as [lo, hi] with hi possibly > tau
    for (const auto& [lo, w] : arcs) {
        double hi = lo + w;
        if (!m.empty() && lo <= m.back().second) m.back().second = std::max(m.back().second, hi);
        else m.push_back({lo, hi});
    }
    // the last arc may wrap over the first ones
    while (m.size() > 1 && m.back().second - tau >= m.front().first) {
        m.back().second = std::max(m.back().second, m.front().second + tau);
        m.erase(m.begin());
    }
    double gap = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double next = i + 1 < m.size() ? m[i + 1].first : m[0].first + tau;
        gap = std::max(gap, next - m[i].second);
    }
    if (m.size() == 1 && m[0].second - m[0].first >= tau) gap = 0;
    std::vector<std::pair<double, double>> out;
    for (const auto& [lo, hi] : m) out.push_back({lo, std::min(hi - lo, tau)});
    return {out, std::max(gap, 0.0)};
}

inline Vector sample_direction(double t) { return {rationalize(std::cos(t), 1e-10), rationalize(std::sin(t), 1e-10)}; }

}  // namespace cyl_detail

/// First return of the flow to the union of all glued edges, i.e. the one-step
/// map from edge to edge. Edge k is parametrised by [k, k + 1) along its entry
/// representative (the side whose polygon the direction points into). Edges
/// parallel to the direction and exits through the boundary are left out.
struct EdgeMap {
    std::vector<SideRef> entries;
    std::vector<AffineBranch> branches;
    Point point_at(const DilationSurface& s, const Scalar& x) const
    {
        mpz_class k = x.get_num() / x.get_den();
        const SideRef& e = entries.at(k.get_ui());
        const Polygon& P = s.polygon(e.polygon);
        return P.vertex(e.side) + (x - Scalar(k)) * P.side_vector(e.side);
    }
    int polygon_at(const Scalar& x) const
    {
        mpz_class k = x.get_num() / x.get_den();
        return entries.at(k.get_ui()).polygon;
    }
};

inline EdgeMap edge_map(const DilationSurface& s, const Direction& dir)
{
    using namespace tracer_detail;
    const Vector& d = dir.vec();
    EdgeMap em;
    std::map<SideRef, long> index;
    for (int p = 0; p < s.polygon_count(); ++p)
        for (int i = 0; i < s.polygon(p).size(); ++i) {
            SideRef e{p, i};
            if (!s.gluing(e)) continue;
            if (sgn(cross(s.polygon(p).side_vector(i), d)) > 0) {
                index[e] = static_cast<long>(em.entries.size());
                em.entries.push_back(e);
            }
        }
    for (std::size_t k = 0; k < em.entries.size(); ++k) {
        const SideRef E = em.entries[k];
        const Polygon& P = s.polygon(E.polygon);
        const Point A = P.vertex(E.side);
        const Vector B = P.side_vector(E.side);
        Scalar den = cross(B, d);
        std::vector<Scalar> cuts{0, 1};
        for (int i = 0; i < P.size(); ++i) {
            Scalar u = cross(P.vertex(i) - A, d) / den;
            if (sgn(u) > 0 && u < 1) cuts.push_back(u);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            const Scalar &lo = cuts[j], &hi = cuts[j + 1];
            ExitHit h = polygon_exit(P, A + ((lo + hi) / 2) * B, d);
            if (h.side < 0) throw DomainError("internal: vertex hit inside an edge-map piece");
            const auto& g = s.gluing({E.polygon, h.side});
            if (!g) continue;
            const Vector e = P.side_vector(h.side);
            Scalar cde = cross(d, e);
            Point HA = A + (cross(P.vertex(h.side) - A, e) / cde) * d;
            Vector HB = B + (-cross(B, e) / cde) * d;
            Point NA = g->map(HA);
            Vector NB = g->map.linear(HB);
            const Polygon& L = s.polygon(g->to.polygon);
            const Vector Lv = L.side_vector(g->to.side);
            Scalar sl = dot(NB, Lv) / norm2(Lv), of = dot(NA - L.vertex(g->to.side), Lv) / norm2(Lv);
            Scalar kk(static_cast<long>(k)), kt(index.at(g->to));
            em.branches.push_back({kk + lo, kk + hi, sl, kt + of - sl * kk});
        }
    }
    return em;
}

/// Periodic points of the edge map up to `max_period` crossings, found by a
/// breadth-first search over at most `budget` branch compositions, and the
/// cylinders through them. The search is prefix closed, so a larger budget
/// explores a superset of words.
/// Closed leaves in one direction, one per leaf class, from periodic points
/// of the edge map.
struct ClosedLeaves {
    struct Found {
        TraceOutcome orbit;
        Itinerary key;
    };
    std::vector<Found> orbits;
    bool truncated = false;
};

inline ClosedLeaves closed_leaves(const DilationSurface& s, const Direction& d, int max_period, int budget)
{
    ClosedLeaves out;
    Tracer tr(s);
    EdgeMap em = edge_map(s, d);
    auto fp = periodic_points(em.branches, max_period, false, static_cast<std::size_t>(budget));
    out.truncated = fp.truncated;
    std::vector<Scalar> xs;
    for (const auto& pt : fp.points) xs.push_back(pt.x);
    for (const auto& f : fp.families) {
        // stay inside one edge so the sample never sits on a vertex
        Scalar k(mpz_class(f.lo.get_num() / f.lo.get_den()));
        Scalar hi = f.hi < k + 1 ? f.hi : k + 1;
        xs.push_back((f.lo + hi) / 2);
    }
    std::set<Itinerary> keys;
    for (const auto& x : xs) {
        TraceOutcome o;
        try {
            o = tr.trace(em.polygon_at(x), em.point_at(s, x), d, 2 * max_period + 2);
        } catch (const DomainError&) {
            continue;  // periodic point at a vertex
        }
        if (o.kind != TraceKind::ClosedUp || o.path.empty()) continue;
        Itinerary key = leaf_key(s, o.itinerary());
        if (keys.insert(key).second) out.orbits.push_back({std::move(o), std::move(key)});
    }
    return out;
}

inline SweepReport sweep(const DilationSurface& s, const SweepOptions& opt = {})
{
    const double tau = 2 * std::numbers::pi;
    std::vector<Vector> dirs;
    std::set<std::pair<Scalar, Scalar>> seen;
    auto add_dir = [&](const Vector& v) {
        Vector p = Direction(v).primitive();
        if (seen.insert({p.x, p.y}).second) dirs.push_back(p);
    };
    for (int k = 0; k < opt.directions; ++k) {
        double t = tau * k / opt.directions;
        double q = t / (std::numbers::pi / 4);
        add_dir(std::fabs(q - std::round(q)) < 1e-12 ? detail::rational_direction(t) : cyl_detail::sample_direction(t));
    }
    if (opt.saddle_crossings > 0) {
        for (const auto& sc : saddle_connections(s, opt.saddle_crossings)) {
            add_dir(sc.direction.vec());
            add_dir(-sc.direction.vec());
        }
    }

    std::vector<ClosedLeaves> per(dirs.size());
    parallel_for(dirs.size(), opt.workers, [&](std::size_t i) { per[i] = closed_leaves(s, Direction(dirs[i]), opt.max_period, opt.budget); });

    SweepReport rep;
    for (const auto& v : dirs) rep.sampled.push_back(Direction(v).angle());
    std::set<Itinerary> known;
    std::vector<std::pair<double, double>> arcs;
    for (auto& pd : per) {
        if (pd.truncated) ++rep.truncated_directions;
        for (auto& f : pd.orbits) {
            if (known.count(f.key)) continue;
            Cylinder c;
            try {
                c = assemble_cylinder(s, f.orbit, std::max(opt.budget, 64));
            } catch (const DomainError&) {
                ++rep.failed_assemblies;
                known.insert(f.key);
                continue;
            }
            known.insert(c.itineraries.begin(), c.itineraries.end());
            known.insert(f.key);
            double lo = Direction(c.cone_lo).angle();
            arcs.push_back({lo, c.angle});
            arcs.push_back({lo + std::numbers::pi, c.angle});
            rep.cylinders.push_back(std::move(c));
        }
    }
    auto [merged, gap] = cyl_detail::merge_arcs(std::move(arcs));
    rep.covered = std::move(merged);
    rep.max_gap = gap;
    return rep;
}

/// Angle from `d` to the cone of `c` or its opposite; 0 inside.
inline double cone_distance(const Cylinder& c, const Direction& d)
{
    const double tau = 2 * std::numbers::pi;
    double lo = Direction(c.cone_lo).angle(), t = d.angle(), best = std::numeric_limits<double>::infinity();
    for (double base : {lo, lo + std::numbers::pi}) {
        double off = std::fmod(t - base + 2 * tau, tau);
        if (off <= c.angle) return 0;
        best = std::min({best, off - c.angle, tau - off});
    }
    return best;
}

/// Cylinders found by searching directions within `tol` of `d`.
inline std::vector<Cylinder> cylinders_near(const DilationSurface& s, const Direction& d, double tol, int max_period = 32, int budget = 4000,
                                            int samples = 9)
{
    std::vector<Direction> dirs{d};
    for (int k = 1; 2 * k < samples; ++k)
        for (int sg : {-1, 1}) dirs.push_back(Direction(cyl_detail::sample_direction(d.angle() + sg * tol * k / (samples / 2))));
    std::vector<Cylinder> out;
    std::set<Itinerary> known;
    for (const auto& dir : dirs) {
        for (auto& f : closed_leaves(s, dir, max_period, budget).orbits) {
            if (known.count(f.key)) continue;
            known.insert(f.key);
            try {
                Cylinder c = assemble_cylinder(s, f.orbit, std::max(budget, 64));
                known.insert(c.itineraries.begin(), c.itineraries.end());
                out.push_back(std::move(c));
            } catch (const DomainError&) {
            }
        }
    }
    return out;
}

}  // namespace dilatone
