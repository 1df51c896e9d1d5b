#pragma once
// The linear SL(2,R) action on polygonal dilation surfaces, Teichmueller flows,
// Delaunay-pattern tracking along orbits and degeneration labels for
// sequences of inscribed polygons.

#include "delaunay.hpp"
#include "parallel.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dilatone {

/// A 2x2 matrix of determinant 1. `approximate` marks entries rounded from
/// irrational values; the determinant itself is always exactly 1.
struct Sl2Matrix {
    Scalar a{1}, b{0}, c{0}, d{1};
    bool approximate = false;

    Sl2Matrix() = default;
    Sl2Matrix(Scalar a_, Scalar b_, Scalar c_, Scalar d_, bool approx = false)
        : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)), approximate(approx)
    {
        if (det() != 1) throw DomainError("matrix determinant must be 1");
    }

    /// Rounds a, b, c and solves for d so the determinant stays exactly 1.
    static Sl2Matrix from_doubles(double a, double b, double c, double d, double tol = 1e-9)
    {
        if (std::abs(a * d - b * c - 1) > tol) throw DomainError("matrix determinant must be 1");
        if (std::abs(a) >= std::abs(b)) {
            Scalar qa = rationalize(a, 1e-12), qb = rationalize(b, 1e-12), qc = rationalize(c, 1e-12);
            return {qa, qb, qc, (1 + qb * qc) / qa, true};
        }
        Scalar qa = rationalize(a, 1e-12), qb = rationalize(b, 1e-12), qd = rationalize(d, 1e-12);
        return {qa, qb, (qa * qd - 1) / qb, qd, true};
    }

    Scalar det() const { return a * d - b * c; }
    Vector operator()(const Vector& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Sl2Matrix inverse() const { return {d, -b, -c, a, approximate}; }

    friend Sl2Matrix operator*(const Sl2Matrix& m, const Sl2Matrix& n)
    {
        return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d,
                m.approximate || n.approximate};
    }
    friend bool operator==(const Sl2Matrix& m, const Sl2Matrix& n) { return m.a == n.a && m.b == n.b && m.c == n.c && m.d == n.d; }
};

inline SurfaceSpec apply_sl2(const Sl2Matrix& A, SurfaceSpec spec)
{
    for (auto& P : spec.polygons)
        for (auto& v : P.vertices) v = A(v);
    return spec;
}

/// Linear maps commute with dilations, so every gluing stays a dilation with
/// the same ratio.
inline DilationSurface apply_sl2(const Sl2Matrix& A, const DilationSurface& s) { return DilationSurface::from_spec(apply_sl2(A, s.spec())); }

inline Direction apply_sl2(const Sl2Matrix& A, const Direction& d) { return Direction(A(d.vec())); }

// ---------------------------------------------------------------------------
// Flow times

/// A flow time t. Exact when e^t is the rational `exp`.
struct FlowTime {
    double t = 0;
    std::optional<Scalar> exp;

    static FlowTime log_of(const Scalar& r)
    {
        if (sgn(r) <= 0) throw DomainError("log argument must be positive");
        return {std::log(r.get_d()), r};
    }
    static FlowTime approx(double t) { return t == 0 ? log_of(1) : FlowTime{t, std::nullopt}; }
    bool exact() const { return exp.has_value(); }
    /// e^t, rounded when not exact.
    Scalar scale() const { return exp ? *exp : rationalize(std::exp(t), 1e-12); }
    std::string text() const { return exp ? "log(" + exp->get_str() + ")" : std::to_string(t); }
};

/// Accepts "log(r)" with r rational, or a decimal.
inline FlowTime parse_flow_time(std::string_view text)
{
    auto trim = [](std::string_view v) {
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
        return v;
    };
    text = trim(text);
    if (text.starts_with("log(") && text.ends_with(")")) return FlowTime::log_of(parse_scalar(trim(text.substr(4, text.size() - 5))));
    std::string s(text);
    char* end = nullptr;
    double t = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(t)) throw DomainError("bad flow time: " + s);
    return FlowTime::approx(t);
}

inline std::vector<FlowTime> parse_flow_times(std::string_view list)
{
    std::vector<FlowTime> out;
    while (true) {
        auto k = list.find(',');
        out.push_back(parse_flow_time(list.substr(0, k)));
        if (k == std::string_view::npos) break;
        list.remove_prefix(k + 1);
    }
    return out;
}

/// diag(e^t, e^-t).
inline Sl2Matrix teichmuller(const FlowTime& t)
{
    Scalar r = t.scale();
    return {r, 0, 0, 1 / r, !t.exact()};
}

/// Contracts d1 and dilates d2: diag(e^t, e^-t) written in the basis (d2, d1).
inline Sl2Matrix conjugated(const Direction& d1, const Direction& d2, const FlowTime& t)
{
    const Vector &u = d2.vec(), &w = d1.vec();
    Scalar det = cross(u, w);
    if (sgn(det) == 0) throw DomainError("flow directions must be independent");
    Scalar r = t.scale(), ri = 1 / r;
    // B diag(r, 1/r) B^-1 with B = [u w]
    Scalar a = (r * u.x * w.y - ri * w.x * u.y) / det;
    Scalar b = (-r * u.x * w.x + ri * w.x * u.x) / det;
    Scalar c = (r * u.y * w.y - ri * w.y * u.y) / det;
    Scalar d = (-r * u.y * w.x + ri * w.y * u.x) / det;
    return {a, b, c, d, !t.exact()};
}

// ---------------------------------------------------------------------------
// Polygons up to positive scaling

/// Side tuple of a polygon up to positive scaling, with its circumcircle.
struct NormalizedPolygon {
    std::vector<Vector> sides;                ///< exact, scaled so the largest coordinate is 1 in absolute value
    std::vector<std::array<double, 2>> unit;  ///< the same tuple on the unit sphere
    Point center;                             ///< circumcenter with vertex 0 at the origin, exact sides
    double radius = 0;
    std::vector<double> vertex_angles;        ///< position of each vertex on the circumcircle

    int size() const { return static_cast<int>(sides.size()); }
    friend bool operator==(const NormalizedPolygon& p, const NormalizedPolygon& q) { return p.sides == q.sides; }
};

inline NormalizedPolygon normalize(const std::vector<Vector>& sides)
{
    if (sides.size() < 3) throw DomainError("polygon needs at least 3 sides");
    Vector sum{0, 0};
    Scalar big = 0;
    for (const auto& z : sides) {
        sum = sum + z;
        big = std::max<Scalar>(big, std::max<Scalar>(abs(z.x), abs(z.y)));
    }
    if (!is_zero(sum)) throw DomainError("polygon sides do not close up");
    if (sgn(big) == 0) throw DomainError("zero polygon");
    NormalizedPolygon out;
    double n2 = 0;
    for (const auto& z : sides) {
        out.sides.push_back(z / big);
        n2 += norm2(z / big).get_d();
    }
    double n = std::sqrt(n2);
    for (const auto& z : out.sides) out.unit.push_back({z.x.get_d() / n, z.y.get_d() / n});

    std::vector<Point> v{Point(0, 0)};
    for (std::size_t k = 0; k + 1 < out.sides.size(); ++k) v.push_back(v.back() + out.sides[k]);
    // the best-conditioned triple fixes the circle
    std::array<std::size_t, 3> best{};
    Scalar area = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            for (std::size_t k = j + 1; k < v.size(); ++k) {
                Scalar a = abs(cross(v[j] - v[i], v[k] - v[i]));
                if (a > area) {
                    area = a;
                    best = {i, j, k};
                }
            }
    if (sgn(area) == 0) throw DomainError("degenerate polygon");
    Circle c = circumcircle(v[best[0]], v[best[1]], v[best[2]]);
    out.center = c.center;
    out.radius = std::sqrt(c.radius2.get_d());
    for (const auto& p : v) {
        Vector r = p - c.center;
        double a = std::atan2(r.y.get_d(), r.x.get_d());
        out.vertex_angles.push_back(a < 0 ? a + 2 * std::numbers::pi : a);
    }
    return out;
}

/// Sides taken from side `rotation` on.
inline NormalizedPolygon normalize(const Polygon& P, int rotation = 0)
{
    std::vector<Vector> z;
    for (int k = 0; k < P.size(); ++k) z.push_back(P.side_vector(rotation + k));
    return normalize(z);
}

/// Euclidean distance on the sphere.
inline double shape_distance(const NormalizedPolygon& p, const NormalizedPolygon& q)
{
    if (p.size() != q.size()) return std::numeric_limits<double>::infinity();
    double acc = 0;
    for (std::size_t k = 0; k < p.unit.size(); ++k)
        for (int c = 0; c < 2; ++c) acc += (p.unit[k][c] - q.unit[k][c]) * (p.unit[k][c] - q.unit[k][c]);
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Degeneration labels

struct DegenerationLabel {
    enum class Kind { Convergent, Type1, Type2, Type3, Unclassified };
    Kind kind = Kind::Unclassified;
    std::vector<int> long_sides;
    std::vector<std::vector<int>> clusters;
    bool cauchy = true;  ///< the last two shapes agree within the Cauchy tolerance

    bool degenerate() const { return kind == Kind::Type1 || kind == Kind::Type2 || kind == Kind::Type3; }
};

inline const char* to_string(DegenerationLabel::Kind k)
{
    switch (k) {
    case DegenerationLabel::Kind::Convergent: return "convergent";
    case DegenerationLabel::Kind::Type1: return "type1";
    case DegenerationLabel::Kind::Type2: return "type2";
    case DegenerationLabel::Kind::Type3: return "type3";
    case DegenerationLabel::Kind::Unclassified: return "unclassified";
    }
    return "?";
}

/// Labels a shape sequence from its last term. Vertices are clustered on the
/// circumcircle: consecutive vertices belong to one cluster when their angular
/// gap is at most `epsilon` (a chord of about epsilon circumradii).
inline DegenerationLabel classify(const std::vector<NormalizedPolygon>& seq, double epsilon = 1e-3, double cauchy_tol = 1e-6)
{
    using K = DegenerationLabel::Kind;
    if (!(epsilon > 0)) throw DomainError("cluster tolerance must be positive");
    if (seq.empty()) throw DomainError("empty polygon sequence");
    const auto& last = seq.back();
    const int p = last.size();
    DegenerationLabel out;
    if (seq.size() >= 2) out.cauchy = shape_distance(seq[seq.size() - 2], last) <= cauchy_tol;

    std::vector<int> big;
    for (int k = 0; k < p; ++k) {
        double g = last.vertex_angles[static_cast<std::size_t>((k + 1) % p)] - last.vertex_angles[static_cast<std::size_t>(k)];
        if (g <= 0) g += 2 * std::numbers::pi;
        if (g > epsilon) big.push_back(k);
    }
    const int nb = static_cast<int>(big.size());
    if (nb == 0) {
        out.clusters.push_back({});
        for (int k = 0; k < p; ++k) out.clusters.back().push_back(k);
        out.kind = K::Unclassified;
        return out;
    }
    // a cluster runs from just after one wide gap to the next wide gap
    for (int i = 0; i < nb; ++i) {
        std::vector<int> c;
        int from = (big[static_cast<std::size_t>(i)] + 1) % p, to = big[static_cast<std::size_t>((i + 1) % nb)];
        for (int k = from;; k = (k + 1) % p) {
            c.push_back(k);
            if (k == to) break;
        }
        out.clusters.push_back(std::move(c));
    }
    if (nb == 1) {
        out.kind = K::Type1;
        out.long_sides = big;
    } else if (nb == 2) {
        out.kind = K::Type2;
        out.long_sides = big;
    } else if (nb < p) {
        out.kind = out.cauchy ? K::Type3 : K::Unclassified;
    } else {
        out.kind = out.cauchy ? K::Convergent : K::Unclassified;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local constraints on degenerating Delaunay polygonations

/// Forbidden configurations among labeled faces: a Type1 long side glued to
/// the long side of a Type1 or Type2 face, and two Type2 faces glued along
/// long sides whose union is convex.
inline std::vector<std::string> audit_forbidden(const DelaunayPolygonation& d, const std::vector<DegenerationLabel>& labels)
{
    using K = DegenerationLabel::Kind;
    std::vector<std::string> out;
    auto is_long = [&](SideRef s) {
        const auto& l = labels[static_cast<std::size_t>(s.polygon)].long_sides;
        return std::find(l.begin(), l.end(), s.side) != l.end();
    };
    auto kind = [&](SideRef s) { return labels[static_cast<std::size_t>(s.polygon)].kind; };
    auto name = [](SideRef s) { return "(" + std::to_string(s.polygon) + "," + std::to_string(s.side) + ")"; };
    for (auto [a, b] : d.pairings) {
        if (!is_long(a) || !is_long(b)) continue;
        if ((kind(a) == K::Type1 && (kind(b) == K::Type1 || kind(b) == K::Type2)) || (kind(b) == K::Type1 && kind(a) == K::Type2)) {
            out.push_back("type 1 long side " + name(a) + " glued to long side " + name(b));
            continue;
        }
        if (kind(a) != K::Type2 || kind(b) != K::Type2) continue;
        const Polygon& P = d.faces[static_cast<std::size_t>(a.polygon)];
        const Polygon& Q = d.faces[static_cast<std::size_t>(b.polygon)];
        auto m = dilation_between(Q.vertex(b.side), Q.vertex(b.side + 1), P.vertex(a.side + 1), P.vertex(a.side));
        if (!m) continue;
        std::vector<Point> u;
        for (int k = 1; k <= P.size(); ++k) u.push_back(P.vertex(a.side + k));
        for (int k = 2; k < Q.size(); ++k) u.push_back((*m)(Q.vertex(b.side + k)));
        bool convex = true;
        for (std::size_t k = 0; k < u.size() && convex; ++k)
            if (orient2d(u[k], u[(k + 1) % u.size()], u[(k + 2) % u.size()]) <= 0) convex = false;
        if (convex) out.push_back("type 2 faces glued along long sides " + name(a) + " and " + name(b) + " form a convex union");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tracking the Delaunay pattern along an orbit

struct FlowOptions {
    std::optional<std::pair<Direction, Direction>> directions;  ///< (contracted, dilated); default vertical, horizontal
    bool exact = true;                                          ///< refuse times with irrational e^t
    double cluster_eps = 1e-3;
    double cauchy_tol = 1e-6;
    long flip_budget = -1;
    unsigned workers = 1;
};

struct FlowSnapshot {
    FlowTime time;
    Sl2Matrix matrix;
    bool ok = false;
    std::string diagnostic;
    std::optional<PatternSignature> pattern;
    std::vector<NormalizedPolygon> shapes;  ///< faces in canonical order
    std::vector<std::pair<int, int>> order; ///< canonical slot -> (face, rotation)
    std::optional<DelaunayPolygonation> delaunay;
    std::optional<Cylinder> obstruction;
    int flips = 0;
};

struct FlowSegment {
    int first = 0, last = 0;
    PatternSignature pattern;
};

struct FlowTrace {
    std::vector<FlowSnapshot> snapshots;  ///< up to and including the first failure
    std::vector<FlowSegment> segments;
    std::vector<DegenerationLabel> labels; ///< per canonical slot over the final segment
    std::vector<DegenerationLabel> face_labels;  ///< the same, per face of the final polygonation
    std::vector<std::string> forbidden;
    bool truncated = false;
    std::string diagnostic;
    bool approximate = false;

    bool degenerates() const
    {
        return std::any_of(labels.begin(), labels.end(), [](const auto& l) { return l.degenerate(); });
    }
};

namespace flow_detail {

inline std::vector<NormalizedPolygon> shapes_for(const DelaunayPolygonation& d, const std::vector<std::pair<int, int>>& order)
{
    std::vector<NormalizedPolygon> out;
    for (auto [f, rot] : order) out.push_back(normalize(d.faces[static_cast<std::size_t>(f)], rot));
    return out;
}

/// Canonical face order; among symmetric relabelings, the one closest to `prev`.
inline std::vector<std::pair<int, int>> choose_order(const DelaunayPolygonation& d, const PatternLabeling& lab,
                                                     const std::vector<NormalizedPolygon>* prev)
{
    std::vector<std::pair<int, int>> order;
    for (const auto& comp : lab.components) {
        std::size_t base = order.size();
        const std::vector<std::pair<int, int>>* pick = &comp.optimal.front();
        if (prev && comp.optimal.size() > 1) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& cand : comp.optimal) {
                double acc = 0;
                for (std::size_t i = 0; i < cand.size(); ++i)
                    acc += shape_distance(normalize(d.faces[static_cast<std::size_t>(cand[i].first)], cand[i].second), (*prev)[base + i]);
                if (acc < best) {
                    best = acc;
                    pick = &cand;
                }
            }
        }
        order.insert(order.end(), pick->begin(), pick->end());
    }
    return order;
}

}  // namespace flow_detail

inline Sl2Matrix flow_matrix(const FlowOptions& opt, const FlowTime& t)
{
    if (opt.directions) return conjugated(opt.directions->first, opt.directions->second, t);
    return teichmuller(t);
}

inline FlowTrace track(const DilationSurface& s, const std::vector<FlowTime>& times, const FlowOptions& opt = {})
{
    if (times.empty()) throw DomainError("no flow times");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k - 1].t < times[k].t)) throw DomainError("flow times must be increasing");
    if (opt.exact)
        for (const auto& t : times)
            if (!t.exact()) throw DomainError("exact mode needs flow times of the form log(r)");

    FlowTrace out;
    out.snapshots.resize(times.size());
    parallel_for(times.size(), opt.workers, [&](std::size_t i) {
        FlowSnapshot& snap = out.snapshots[i];
        snap.time = times[i];
        snap.matrix = flow_matrix(opt, times[i]);
        try {
            auto image = apply_sl2(snap.matrix, s);
            auto r = flip_to_delaunay(initial_triangulation(image, {.remove_regular = true}), opt.flip_budget);
            if (auto* ob = std::get_if<CylinderObstruction>(&r)) {
                snap.obstruction = ob->cylinder;
                snap.flips = ob->flips;
                snap.diagnostic = "cylinder of angle at least pi";
                return;
            }
            snap.delaunay = std::move(std::get<DelaunayPolygonation>(r));
            snap.flips = snap.delaunay->flips;
            snap.ok = true;
        } catch (const DomainError& e) {
            snap.diagnostic = e.what();
        }
    });
    for (std::size_t i = 0; i < out.snapshots.size(); ++i)
        if (!out.snapshots[i].ok) {
            out.truncated = true;
            out.diagnostic = "at t = " + out.snapshots[i].time.text() + ": " + out.snapshots[i].diagnostic;
            out.snapshots.resize(i + 1);
            break;
        }
    for (const auto& snap : out.snapshots) out.approximate = out.approximate || snap.matrix.approximate;

    // sequential pass: canonical face order, continuous along constant-pattern runs
    for (std::size_t i = 0; i < out.snapshots.size(); ++i) {
        auto& snap = out.snapshots[i];
        if (!snap.ok) break;
        auto lab = pattern_labeling(snap.delaunay->faces, snap.delaunay->pairings);
        snap.pattern = lab.signature();
        bool same = !out.segments.empty() && out.segments.back().last == static_cast<int>(i) - 1 && out.segments.back().pattern == *snap.pattern;
        snap.order = flow_detail::choose_order(*snap.delaunay, lab, same ? &out.snapshots[i - 1].shapes : nullptr);
        snap.shapes = flow_detail::shapes_for(*snap.delaunay, snap.order);
        if (same)
            out.segments.back().last = static_cast<int>(i);
        else
            out.segments.push_back({static_cast<int>(i), static_cast<int>(i), *snap.pattern});
    }
    if (out.segments.empty()) return out;

    const auto& tail = out.segments.back();
    const auto& final_snap = out.snapshots[static_cast<std::size_t>(tail.last)];
    std::vector<DegenerationLabel> by_face(final_snap.shapes.size());
    for (std::size_t slot = 0; slot < final_snap.shapes.size(); ++slot) {
        std::vector<NormalizedPolygon> seq;
        for (int i = tail.first; i <= tail.last; ++i) seq.push_back(out.snapshots[static_cast<std::size_t>(i)].shapes[slot]);
        auto l = classify(seq, opt.cluster_eps, opt.cauchy_tol);
        // long sides back in the face's own numbering
        DegenerationLabel local = l;
        auto [f, rot] = final_snap.order[slot];
        int n = final_snap.delaunay->faces[static_cast<std::size_t>(f)].size();
        for (auto& k : local.long_sides) k = (k + rot) % n;
        for (auto& c : local.clusters)
            for (auto& k : c) k = (k + rot) % n;
        by_face[static_cast<std::size_t>(f)] = local;
        out.labels.push_back(std::move(l));
    }
    out.forbidden = audit_forbidden(*final_snap.delaunay, by_face);
    out.face_labels = std::move(by_face);
    return out;
}

}  // namespace dilatone
