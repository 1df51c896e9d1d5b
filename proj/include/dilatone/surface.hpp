#pragma once
// Polygonal dilation surfaces: polygons in their own charts glued along
// anti-parallel sides by dilations.

#include "kernel.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dilatone {

struct SideRef {
    int polygon = 0;
    int side = 0;
    auto operator<=>(const SideRef&) const = default;
};

struct CornerRef {
    int polygon = 0;
    int vertex = 0;
    auto operator<=>(const CornerRef&) const = default;
};

struct Polygon {
    std::vector<Point> vertices;

    int size() const { return static_cast<int>(vertices.size()); }
    const Point& vertex(int i) const { return vertices[static_cast<std::size_t>(((i % size()) + size()) % size())]; }
    Vector side_vector(int i) const { return vertex(i + 1) - vertex(i); }
    Scalar signed_area2() const
    {
        Scalar a = 0;
        for (int i = 0; i < size(); ++i) a += cross(vertex(i), vertex(i + 1));
        return a;
    }
    friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Raw surface description, as read from a file; may be invalid.
struct SurfaceSpec {
    std::vector<Polygon> polygons;
    std::vector<std::pair<SideRef, SideRef>> pairings;
    std::vector<std::optional<Scalar>> declared_ratios;  ///< optional "a" per pairing
    std::vector<CornerRef> marked_points;
    std::vector<SideRef> boundary;
    bool multi_component = false;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    void add(std::string v) { violations.push_back(std::move(v)); }
    bool mentions(std::string_view needle) const
    {
        return std::any_of(violations.begin(), violations.end(),
                           [&](const std::string& v) { return v.find(needle) != std::string::npos; });
    }
};

namespace detail {

inline bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d)
{
    int o1 = orient2d(a, b, c), o2 = orient2d(a, b, d), o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    auto on = [](const Point& p, const Point& q, const Point& r) {
        return orient2d(p, q, r) == 0 && std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

inline bool is_simple(const Polygon& p)
{
    int n = p.size();
    for (int i = 0; i < n; ++i) {
        if (p.vertex(i) == p.vertex(i + 1)) return false;
        for (int j = i + 1; j < n; ++j) {
            bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Point &a = p.vertex(i), &b = p.vertex(i + 1), &c = p.vertex(j), &d = p.vertex(j + 1);
            if (adjacent) {
                // consecutive sides may only share their common vertex
                const Point& shared = (j == i + 1) ? b : a;
                const Point& far1 = (j == i + 1) ? a : b;
                const Point& far2 = (j == i + 1) ? d : c;
                if (orient2d(far1, shared, far2) == 0 && sgn(dot(far1 - shared, far2 - shared)) > 0) return false;
                continue;
            }
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

}  // namespace detail

inline ValidationReport validate(const SurfaceSpec& spec)
{
    ValidationReport rep;
    const int np = static_cast<int>(spec.polygons.size());
    if (np == 0) rep.add("no polygons");
    for (int i = 0; i < np; ++i) {
        const Polygon& p = spec.polygons[static_cast<std::size_t>(i)];
        if (p.size() < 3) {
            rep.add("polygon " + std::to_string(i) + " has fewer than 3 vertices");
            continue;
        }
        if (!detail::is_simple(p)) rep.add("polygon " + std::to_string(i) + " is not simple");
        else if (sgn(p.signed_area2()) <= 0) rep.add("polygon " + std::to_string(i) + " is not counterclockwise");
    }
    auto valid_side = [&](const SideRef& s) {
        return s.polygon >= 0 && s.polygon < np && spec.polygons[static_cast<std::size_t>(s.polygon)].size() >= 3 &&
               s.side >= 0 && s.side < spec.polygons[static_cast<std::size_t>(s.polygon)].size();
    };
    auto name = [](const SideRef& s) { return "(" + std::to_string(s.polygon) + "," + std::to_string(s.side) + ")"; };
    std::map<SideRef, int> uses;
    for (std::size_t k = 0; k < spec.pairings.size(); ++k) {
        auto [s, t] = spec.pairings[k];
        if (!valid_side(s) || !valid_side(t)) {
            rep.add("pairing " + std::to_string(k) + " references a missing side");
            continue;
        }
        if (s == t) rep.add("side " + name(s) + " paired with itself (non-involutive pairing)");
        ++uses[s];
        ++uses[t];
        const Polygon& ps = spec.polygons[static_cast<std::size_t>(s.polygon)];
        const Polygon& pt = spec.polygons[static_cast<std::size_t>(t.polygon)];
        std::optional<Scalar> ratio;
        auto m = dilation_between(ps.vertex(s.side), ps.vertex(s.side + 1), pt.vertex(t.side + 1), pt.vertex(t.side), &ratio);
        if (!ratio) rep.add("non-parallel pairing " + name(s) + "-" + name(t));
        else if (sgn(*ratio) <= 0) rep.add("ratio not positive for pairing " + name(s) + "-" + name(t) + " (a = " + ratio->get_str() + ")");
        if (k < spec.declared_ratios.size() && spec.declared_ratios[k] && ratio && *spec.declared_ratios[k] != *ratio)
            rep.add("declared ratio does not match geometry for pairing " + name(s) + "-" + name(t));
    }
    for (const auto& b : spec.boundary) {
        if (!valid_side(b)) {
            rep.add("boundary side " + name(b) + " does not exist");
            continue;
        }
        if (uses.count(b)) rep.add("boundary side " + name(b) + " is also paired");
        ++uses[b];
    }
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < spec.polygons[static_cast<std::size_t>(i)].size(); ++j) {
            SideRef s{i, j};
            auto it = uses.find(s);
            if (it == uses.end()) rep.add("side " + name(s) + " is neither paired nor boundary");
            else if (it->second > 1) rep.add("side " + name(s) + " appears in more than one pairing (non-involutive pairing)");
        }
    for (const auto& c : spec.marked_points)
        if (c.polygon < 0 || c.polygon >= np || c.vertex < 0 || c.vertex >= spec.polygons[static_cast<std::size_t>(c.polygon)].size())
            rep.add("marked point references a missing vertex");
    if (rep.ok() && !spec.multi_component) {
        std::vector<int> parent(static_cast<std::size_t>(np));
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            return x;
        };
        for (auto [s, t] : spec.pairings) parent[static_cast<std::size_t>(find(s.polygon))] = find(t.polygon);
        for (int i = 0; i < np; ++i)
            if (find(i) != find(0)) {
                rep.add("surface is not connected");
                break;
            }
    }
    return rep;
}

struct Gluing {
    SideRef to;
    DilationMap map;  ///< chart of the source polygon -> chart of `to`; source start -> `to` end
};

struct VertexCycle {
    std::vector<CornerRef> corners;  ///< in rotation order (crossing outgoing sides)
    bool boundary = false;
    bool marked = false;
    double total_angle = 0;   ///< sum of corner angles
    int angle_multiple = 0;   ///< total angle / (2 pi) for interior cycles
    Scalar holonomy = 1;      ///< product of crossed ratios, interior cycles only
    bool singular() const { return boundary || marked || angle_multiple != 1 || holonomy != 1; }
};

struct SingularityData {
    int cycle = 0;
    double total_angle = 0;
    std::optional<int> pi_multiple;  ///< exact multiple of pi when known
    Scalar linear_holonomy = 1;
    bool boundary = false;
    bool marked = false;
};

/// A validated dilation surface. Immutable once built.
class DilationSurface {
public:
    DilationSurface() = default;

    static DilationSurface from_spec(SurfaceSpec spec)
    {
        auto rep = validate(spec);
        if (!rep.ok()) throw DomainError("invalid surface: " + rep.violations.front());
        DilationSurface s;
        s.spec_ = std::move(spec);
        s.build();
        return s;
    }

    const SurfaceSpec& spec() const { return spec_; }
    const std::vector<Polygon>& polygons() const { return spec_.polygons; }
    const Polygon& polygon(int i) const { return spec_.polygons[static_cast<std::size_t>(i)]; }
    int polygon_count() const { return static_cast<int>(spec_.polygons.size()); }

    const std::optional<Gluing>& gluing(SideRef s) const { return glue_[static_cast<std::size_t>(s.polygon)][static_cast<std::size_t>(s.side)]; }
    bool is_boundary(SideRef s) const { return !gluing(s).has_value(); }
    bool closed() const { return spec_.boundary.empty(); }

    const std::vector<VertexCycle>& vertex_cycles() const { return cycles_; }
    int cycle_of(CornerRef c) const { return cycle_id_[static_cast<std::size_t>(c.polygon)][static_cast<std::size_t>(c.vertex)]; }
    bool corner_singular(CornerRef c) const { return cycles_[static_cast<std::size_t>(cycle_of(c))].singular(); }

    int side_count() const
    {
        int n = 0;
        for (const auto& p : spec_.polygons) n += p.size();
        return n;
    }
    int edge_count() const { return static_cast<int>(spec_.pairings.size() + spec_.boundary.size()); }
    int euler_characteristic() const { return static_cast<int>(cycles_.size()) - edge_count() + polygon_count(); }

    int boundary_components() const
    {
        // boundary sides chain through boundary vertex cycles
        std::set<SideRef> seen;
        int comps = 0;
        for (const auto& b : spec_.boundary) {
            if (seen.count(b)) continue;
            ++comps;
            SideRef cur = b;
            while (!seen.count(cur)) {
                seen.insert(cur);
                cur = next_boundary_side(cur);
            }
        }
        return comps;
    }

    int component_count() const
    {
        std::vector<int> parent(static_cast<std::size_t>(polygon_count()));
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]); };
        for (auto [s, t] : spec_.pairings) parent[static_cast<std::size_t>(find(s.polygon))] = find(t.polygon);
        std::set<int> roots;
        for (int i = 0; i < polygon_count(); ++i) roots.insert(find(i));
        return static_cast<int>(roots.size());
    }

    /// Total genus (summed over components), from the Euler characteristic.
    int genus() const
    {
        int chi = euler_characteristic();
        return (2 * component_count() - chi - boundary_components()) / 2;
    }

    /// The boundary side following `s` along the boundary (surface on the left).
    SideRef next_boundary_side(SideRef s) const
    {
        CornerRef c{s.polygon, (s.side + 1) % polygon(s.polygon).size()};
        // rotate across glued outgoing sides until the outgoing side is boundary
        for (int guard = 0; guard < side_count() + 1; ++guard) {
            SideRef out{c.polygon, c.vertex};
            const auto& g = gluing(out);
            if (!g) return out;
            c = {g->to.polygon, (g->to.side + 1) % polygon(g->to.polygon).size()};
        }
        throw DomainError("inconsistent boundary");
    }

private:
    void build()
    {
        const auto np = spec_.polygons.size();
        glue_.assign(np, {});
        cycle_id_.assign(np, {});
        for (std::size_t i = 0; i < np; ++i) {
            glue_[i].assign(spec_.polygons[i].vertices.size(), std::nullopt);
            cycle_id_[i].assign(spec_.polygons[i].vertices.size(), -1);
        }
        for (auto [s, t] : spec_.pairings) {
            const Polygon& ps = polygon(s.polygon);
            const Polygon& pt = polygon(t.polygon);
            auto m = *dilation_between(ps.vertex(s.side), ps.vertex(s.side + 1), pt.vertex(t.side + 1), pt.vertex(t.side));
            glue_[static_cast<std::size_t>(s.polygon)][static_cast<std::size_t>(s.side)] = Gluing{t, m};
            glue_[static_cast<std::size_t>(t.polygon)][static_cast<std::size_t>(t.side)] = Gluing{s, invert(m)};
        }
        std::set<CornerRef> marked(spec_.marked_points.begin(), spec_.marked_points.end());
        for (int p = 0; p < polygon_count(); ++p)
            for (int v = 0; v < polygon(p).size(); ++v) {
                if (cycle_id_[static_cast<std::size_t>(p)][static_cast<std::size_t>(v)] >= 0) continue;
                VertexCycle cyc;
                CornerRef start{p, v};
                // walk backwards to a boundary corner if there is one
                CornerRef c = start;
                for (int guard = 0; guard <= side_count(); ++guard) {
                    SideRef in{c.polygon, (c.vertex + polygon(c.polygon).size() - 1) % polygon(c.polygon).size()};
                    const auto& g = gluing(in);
                    if (!g) {
                        cyc.boundary = true;
                        break;
                    }
                    c = {g->to.polygon, g->to.side};
                    if (c == start) break;
                }
                start = c;
                Scalar hol = 1;
                c = start;
                while (true) {
                    cyc.corners.push_back(c);
                    cycle_id_[static_cast<std::size_t>(c.polygon)][static_cast<std::size_t>(c.vertex)] = static_cast<int>(cycles_.size());
                    const Polygon& pc = polygon(c.polygon);
                    cyc.total_angle += ccw_angle(pc.side_vector(c.vertex), pc.vertex(c.vertex - 1) - pc.vertex(c.vertex));
                    if (marked.count(c)) cyc.marked = true;
                    const auto& g = gluing({c.polygon, c.vertex});
                    if (!g) break;
                    hol *= g->map.a;
                    c = {g->to.polygon, (g->to.side + 1) % polygon(g->to.polygon).size()};
                    if (c == start) break;
                }
                if (!cyc.boundary) {
                    cyc.holonomy = hol;
                    cyc.angle_multiple = static_cast<int>(std::lround(cyc.total_angle / (2 * std::numbers::pi)));
                }
                cycles_.push_back(std::move(cyc));
            }
    }

    SurfaceSpec spec_;
    std::vector<std::vector<std::optional<Gluing>>> glue_;
    std::vector<std::vector<int>> cycle_id_;
    std::vector<VertexCycle> cycles_;
};

inline std::vector<SingularityData> singularities(const DilationSurface& s)
{
    std::vector<SingularityData> out;
    const auto& cyc = s.vertex_cycles();
    for (std::size_t i = 0; i < cyc.size(); ++i) {
        const auto& c = cyc[i];
        if (!c.singular()) continue;
        SingularityData d;
        d.cycle = static_cast<int>(i);
        d.total_angle = c.total_angle;
        d.linear_holonomy = c.holonomy;
        d.boundary = c.boundary;
        d.marked = c.marked;
        if (!c.boundary) d.pi_multiple = 2 * c.angle_multiple;
        else {
            // boundary angle is an exact multiple of pi when the two boundary sides are parallel
            const auto& first = c.corners.front();
            const auto& last = c.corners.back();
            const Polygon& pf = s.polygon(first.polygon);
            const Polygon& pl = s.polygon(last.polygon);
            Vector in = pf.vertex(first.vertex - 1) - pf.vertex(first.vertex);
            Vector out = pl.side_vector(last.vertex);
            if (sgn(cross(in, out)) == 0) d.pi_multiple = static_cast<int>(std::lround(c.total_angle / std::numbers::pi));
        }
        out.push_back(d);
    }
    return out;
}

struct Complexity {
    int n_triangles = 0;
    int genus = 0;
    int singularities = 0;
};

inline Complexity complexity(const DilationSurface& s)
{
    if (!s.closed()) throw DomainError("complexity needs a closed surface");
    int ns = static_cast<int>(singularities(s).size());
    if (ns == 0) throw DomainError("needs at least one singularity");
    int g = s.genus();
    return {4 * g - 4 + 2 * ns, g, ns};
}

/// Parallelogram spanned by z1, z2 with the two z2-sides glued by translation.
inline DilationSurface build_flat_cylinder(const Vector& z1, const Vector& z2)
{
    Scalar c = cross(z1, z2);
    if (sgn(c) == 0) throw DomainError("cylinder vectors are dependent");
    Point o{0, 0};
    Polygon p;
    if (sgn(c) > 0) p.vertices = {o, o + z1, o + z1 + z2, o + z2};
    else p.vertices = {o, o + z2, o + z1 + z2, o + z1};
    SurfaceSpec spec;
    spec.polygons.push_back(p);
    if (sgn(c) > 0) {
        spec.pairings.push_back({{0, 1}, {0, 3}});
        spec.boundary = {{0, 0}, {0, 2}};
    } else {
        spec.pairings.push_back({{0, 0}, {0, 2}});
        spec.boundary = {{0, 1}, {0, 3}};
    }
    return DilationSurface::from_spec(std::move(spec));
}

/// Modulus convention for a flat cylinder: height / circumference, which is
/// |z2| / |z1| for a rectangle.
inline Scalar flat_cylinder_modulus(const Vector& z1, const Vector& z2) { return abs(cross(z1, z2)) / norm2(z1); }

namespace detail {

/// Rational vector pointing at angle t; exact on multiples of pi/4 (up to scale).
inline Vector rational_direction(double t)
{
    double q = t / (std::numbers::pi / 4);
    double r = std::round(q);
    if (std::fabs(q - r) < 1e-12) {
        static const int tab[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
        long k = ((static_cast<long>(r) % 8) + 8) % 8;
        return {tab[k][0], tab[k][1]};
    }
    return {rationalize(std::cos(t), 1e-16), rationalize(std::sin(t), 1e-16)};
}

}  // namespace detail

struct DilationCylinderInfo {
    double theta = 0;
    Scalar lambda;
};

/// Fundamental domain of the sector of angle theta modulo z -> lambda z,
/// cut into sub-sectors of angle at most pi/2 so that the polygon stays simple.
/// Sides 0 and k+1 (k = number of sub-sectors) are the boundary rays.
inline DilationSurface build_dilation_cylinder(double theta, const Scalar& lambda)
{
    if (!(theta > 0 && theta < 2 * std::numbers::pi)) throw DomainError("cylinder angle out of range (0, 2pi)");
    if (lambda <= 1) throw DomainError("cylinder multiplier must exceed 1");
    int k = std::max(1, static_cast<int>(std::ceil(theta / (std::numbers::pi / 2) - 1e-12)));
    std::vector<Vector> rays;
    for (int i = 0; i <= k; ++i) rays.push_back(detail::rational_direction(theta * i / k));
    Polygon p;
    // outer chain at lambda, then inner chain back at 1
    p.vertices.push_back(rays[0]);
    for (int i = 0; i <= k; ++i) p.vertices.push_back(lambda * rays[static_cast<std::size_t>(i)]);
    for (int i = k; i >= 1; --i) p.vertices.push_back(rays[static_cast<std::size_t>(i)]);
    // sides: 0 = ray 0 (1 -> lambda), 1..k = outer chords, k+1 = ray theta (inward), k+2.. = inner chords
    SurfaceSpec spec;
    spec.polygons.push_back(p);
    int n = p.size();
    for (int i = 0; i < k; ++i) {
        int outer = 1 + i;
        int inner = n - 1 - i;  // inner chord from rays[i+1] to rays[i]
        spec.pairings.push_back({{0, inner}, {0, outer}});
    }
    spec.boundary = {{0, 0}, {0, k + 1}};
    return DilationSurface::from_spec(std::move(spec));
}

/// Modulus 2 tan(theta/2) / (lambda - 1); +infinity once theta >= pi.
inline double dilation_cylinder_modulus(double theta, double lambda)
{
    if (theta >= std::numbers::pi - 1e-15) return std::numeric_limits<double>::infinity();
    return 2 * std::tan(theta / 2) / (lambda - 1);
}

}  // namespace dilatone
