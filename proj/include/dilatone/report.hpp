#pragma once
// JSON views of results, the report envelope, and the AIET, flow-trace and
// exotic-surface file formats.

#include "aiet.hpp"
#include "exotic.hpp"
#include "io.hpp"

#include <cstdint>
#include <fstream>
#include <iterator>

namespace dilatone {

inline constexpr const char* tool_version = "0.1.0";

/// FNV-1a over the raw bytes of the input files.
inline std::string input_hash(const std::vector<std::string>& paths)
{
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& p : paths) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ParseError("cannot open '" + p + "'");
        for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
            h ^= static_cast<unsigned char>(*it);
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct ReportEnvelope {
    std::string command;
    std::string input_hash;
    bool exact = true;
    bool approximate = false;  ///< some result was rounded
    json params = json::object();
    json payload = json::object();

    json to_json() const
    {
        return {{"tool", "dilatone"},
                {"version", tool_version},
                {"command", command},
                {"input_hash", input_hash},
                {"mode", exact ? "exact" : "approx"},
                {"approximate", approximate},
                {"params", params},
                {"payload", payload}};
    }
};

namespace report {


using io_detail::scalar_to_json;

inline json vec(const Vector& v) { return json::array({v.x.get_str(), v.y.get_str()}); }
inline json side(const SideRef& s) { return json::array({s.polygon, s.side}); }
inline json corner(const CornerRef& c) { return json::array({c.polygon, c.vertex}); }
/// Infinite values become the string "inf"; JSON has no infinity.
inline json real(double x) { return std::isinf(x) ? json("inf") : json(x); }
inline double degrees(double r) { return r * 180 / std::numbers::pi; }

inline json itinerary(const std::vector<SideRef>& w)
{
    json a = json::array();
    for (const auto& s : w) a.push_back(side(s));
    return a;
}

inline json info(const DilationSurface& s)
{
    json sing = json::array();
    for (const auto& d : singularities(s)) {
        json j{{"cycle", d.cycle}, {"angle", d.total_angle}, {"linear_holonomy", d.linear_holonomy.get_str()},
               {"boundary", d.boundary}, {"marked", d.marked}};
        if (d.pi_multiple) j["angle_over_pi"] = *d.pi_multiple;
        sing.push_back(j);
    }
    auto c = complexity(s);
    return {{"polygons", s.polygon_count()}, {"genus", c.genus}, {"singularities", c.singularities},
            {"complexity", c.n_triangles}, {"singularity_list", sing}};
}

inline json trace(const TraceOutcome& o)
{
    json j{{"kind", to_string(o.kind)},
           {"direction", vec(o.dir.vec())},
           {"start", {o.start_polygon, point_to_json(o.start)}},
           {"crossings", o.crossings},
           {"itinerary", itinerary(o.itinerary())},
           {"end", {o.end_polygon, point_to_json(o.end)}},
           {"accumulated_dilation", o.accumulated_dilation.get_str()}};
    if (o.singularity) j["singularity"] = *o.singularity;
    if (o.boundary_side) j["boundary_side"] = side(*o.boundary_side);
    return j;
}

inline json saddle(const SaddleConnection& c)
{
    return {{"start_cycle", c.start_cycle}, {"end_cycle", c.end_cycle},  {"start_corner", corner(c.start_corner)},
            {"end_corner", corner(c.end_corner)}, {"direction", vec(c.direction.vec())}, {"holonomy", vec(c.developed)},
            {"itinerary", itinerary(c.itinerary)}};
}

inline json cylinder(const Cylinder& c)
{
    json j{{"kind", to_string(c.kind)},
           {"lambda", c.multiplier.get_str()},
           {"direction", vec(c.direction.vec())},
           {"cone", {vec(c.cone_lo), vec(c.cone_hi)}},
           {"cone_degrees", {degrees(ccw_angle(Vector(1, 0), c.cone_lo)), degrees(ccw_angle(Vector(1, 0), c.cone_hi))}},
           {"theta", c.angle},
           {"cone_exact", c.cone_exact},
           {"modulus", real(c.modulus)},
           {"transversal", side(c.transversal)},
           {"itinerary", itinerary(c.itinerary)}};
    if (c.exact_modulus) j["modulus_exact"] = c.exact_modulus->get_str();
    return j;
}

inline json sweep(const SweepReport& r)
{
    json cyl = json::array();
    for (const auto& c : r.cylinders) cyl.push_back(cylinder(c));
    json arcs = json::array();
    for (const auto& [a, w] : r.covered) arcs.push_back({degrees(a), degrees(w)});
    return {{"directions", r.sampled.size()},
            {"cylinders", cyl},
            {"covered_degrees", arcs},
            {"max_gap", r.max_gap},
            {"max_gap_degrees", degrees(r.max_gap)},
            {"truncated_directions", r.truncated_directions},
            {"failed_assemblies", r.failed_assemblies}};
}

inline json polygon(const Polygon& P)
{
    json a = json::array();
    for (const auto& v : P.vertices) a.push_back(point_to_json(v));
    return a;
}

inline json pairings(const std::vector<std::pair<SideRef, SideRef>>& ps)
{
    json a = json::array();
    for (const auto& [p, q] : ps) a.push_back({{"from", side(p)}, {"to", side(q)}});
    return a;
}

inline json delaunay(const DelaunayPolygonation& d)
{
    json faces = json::array();
    for (const auto& f : d.faces) faces.push_back(polygon(f));
    json edges = json::array();
    for (const auto& e : d.edges) edges.push_back({{"side", side(e.side)}, {"partner", side(e.partner)}, {"holonomy", vec(e.holonomy)}});
    return {{"faces", faces}, {"gluings", pairings(d.pairings)}, {"edges", edges}, {"pattern", d.pattern.code}, {"flips", d.flips}};
}

inline json delaunay(const DelaunayResult& r)
{
    if (auto* d = std::get_if<DelaunayPolygonation>(&r)) return {{"status", "delaunay"}, {"polygonation", delaunay(*d)}};
    const auto& o = std::get<CylinderObstruction>(r);
    return {{"status", "cylinder_obstruction"}, {"cylinder", cylinder(o.cylinder)}, {"flips", o.flips}, {"flip_trace", itinerary(o.flip_trace)}};
}

inline json label(const DegenerationLabel& l)
{
    return {{"kind", to_string(l.kind)}, {"long_sides", l.long_sides}, {"clusters", l.clusters}, {"cauchy", l.cauchy}};
}

inline json matrix(const Sl2Matrix& m) { return {{m.a.get_str(), m.b.get_str()}, {m.c.get_str(), m.d.get_str()}}; }

inline json flow(const FlowTrace& tr)
{
    json snaps = json::array();
    for (const auto& s : tr.snapshots) {
        json j{{"time", s.time.text()}, {"t", s.time.t}, {"matrix", matrix(s.matrix)}, {"ok", s.ok}, {"flips", s.flips}};
        if (s.pattern) j["pattern"] = s.pattern->code;
        if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
        if (s.obstruction) j["obstruction"] = cylinder(*s.obstruction);
        snaps.push_back(j);
    }
    json segs = json::array();
    for (const auto& g : tr.segments) segs.push_back({{"first", g.first}, {"last", g.last}, {"pattern", g.pattern.code}});
    json labels = json::array(), face_labels = json::array();
    for (const auto& l : tr.labels) labels.push_back(label(l));
    for (const auto& l : tr.face_labels) face_labels.push_back(label(l));
    json out{{"snapshots", snaps}, {"segments", segs},    {"labels", labels}, {"forbidden", tr.forbidden},
             {"truncated", tr.truncated}, {"degenerates", tr.degenerates()}};
    if (!tr.diagnostic.empty()) out["diagnostic"] = tr.diagnostic;
    // the last polygonation, with labels per face, is what a limit is built from
    for (auto it = tr.snapshots.rbegin(); it != tr.snapshots.rend(); ++it)
        if (it->delaunay && it->delaunay->faces.size() == tr.face_labels.size()) {
            json faces = json::array();
            for (const auto& f : it->delaunay->faces) faces.push_back(polygon(f));
            out["final"] = {{"time", it->time.text()}, {"faces", faces}, {"gluings", pairings(it->delaunay->pairings)}, {"labels", face_labels}};
            break;
        }
    return out;
}

inline DegenerationLabel::Kind label_kind(const std::string& s)
{
    using K = DegenerationLabel::Kind;
    for (K k : {K::Convergent, K::Type1, K::Type2, K::Type3, K::Unclassified})
        if (s == to_string(k)) return k;
    throw ParseError("unknown degeneration label '" + s + "'");
}

/// Faces and gluings of the "final" block of a flow trace, enveloped or not.
inline std::pair<std::vector<LimitFace>, std::vector<std::pair<SideRef, SideRef>>> limit_faces(const json& doc)
{
    const json& body = doc.contains("payload") ? doc["payload"] : doc;
    if (!body.contains("final")) throw ParseError("flow trace has no final polygonation");
    const json& fin = body["final"];
    try {
        auto spec = surface_spec_from_json({{"polygons", fin.at("faces")}, {"gluings", fin.at("gluings")}}).spec;
        const json& labels = fin.at("labels");
        if (labels.size() != spec.polygons.size()) throw ParseError("flow trace: one label per face expected");
        std::vector<LimitFace> faces;
        for (std::size_t f = 0; f < labels.size(); ++f) {
            DegenerationLabel l;
            l.kind = label_kind(labels[f].at("kind").get<std::string>());
            l.long_sides = labels[f].at("long_sides").get<std::vector<int>>();
            faces.push_back({spec.polygons[f], l});
        }
        return {faces, spec.pairings};
    } catch (const json::exception& e) {
        throw ParseError(std::string("flow trace: ") + e.what());
    }
}

// -- exotic surfaces

inline json exotic(const ExoticSurface& x)
{
    json edges = json::array();
    for (const auto& e : x.edges) edges.push_back({{"kind", to_string(e.kind)}, {"theta", vec(e.theta12.primitive())}});
    json holes = json::array();
    for (const auto& h : x.holes) holes.push_back({{"theta", vec(h.theta.primitive())}, {"entry", h.entry_ccw ? "ccw" : "cw"}});
    json att = json::array();
    for (const auto& a : x.attachments) {
        json src = a.source.kind == AttachSource::Kind::CoreBoundary ? json{{"boundary", side(a.source.side)}}
                                                                     : json{{"edge", a.source.edge}, {"side", a.source.edge_side}};
        json tg;
        switch (a.target.kind) {
        case AttachTarget::Kind::EdgeExtremity: tg = {{"extremity", {a.target.index, a.target.extremity}}}; break;
        case AttachTarget::Kind::HoleEntry: tg = {{"hole", a.target.index}}; break;
        case AttachTarget::Kind::CorePoint:
            if (a.target.point) tg = {{"point", {a.target.corner.polygon, point_to_json(*a.target.point)}}};
            else tg = {{"vertex", corner(a.target.corner)}};
            if (a.target.exit) tg["exit"] = corner(*a.target.exit);
            break;
        }
        att.push_back({{"source", src}, {"target", tg}});
    }
    return {{"core", x.core ? surface_spec_to_json(x.core->spec()) : json(nullptr)}, {"edges", edges}, {"holes", holes}, {"attachments", att}};
}

inline ExoticSurface exotic_from_json(const json& doc)
{
    const json& body = doc.contains("payload") && doc["payload"].contains("surface") ? doc["payload"]["surface"] : doc;
    ExoticSurface x;
    auto dir = [](const json& j, const std::string& where) {
        Point p = point_from_json(j, where);
        if (sgn(p.x) == 0 && sgn(p.y) == 0) throw ParseError(where + ": zero direction");
        return Direction(p.x, p.y);
    };
    auto pair = [](const json& j, const std::string& where) { return io_detail::pair_from_json(j, where); };
    try {
        if (body.contains("core") && !body["core"].is_null()) {
            auto spec = surface_spec_from_json(body["core"]).spec;
            auto rep = validate(spec);
            if (!rep.ok()) throw DomainError("core: " + rep.violations.front());
            x.core = DilationSurface::from_spec(std::move(spec));
        }
        for (const auto& e : body.value("edges", json::array())) {
            std::string k = e.at("kind").get<std::string>();
            if (k != "C" && k != "T" && k != "P") throw ParseError("edge kind must be C or T");
            Direction t = dir(e.at("theta"), "edges.theta");
            x.edges.push_back({k == "C" ? ExoticEdge::Kind::C : ExoticEdge::Kind::T, t, t.opposite()});
        }
        for (const auto& h : body.value("holes", json::array()))
            x.holes.push_back({dir(h.at("theta"), "holes.theta"), h.value("entry", std::string("ccw")) == "ccw"});
        for (const auto& a : body.value("attachments", json::array())) {
            Attachment at;
            const json& s = a.at("source");
            if (s.contains("boundary")) {
                auto [p, k] = pair(s["boundary"], "attachments.source.boundary");
                at.source = {AttachSource::Kind::CoreBoundary, {p, k}, 0, 0};
            } else {
                at.source = {AttachSource::Kind::EdgeSide, {}, s.at("edge").get<int>(), s.at("side").get<int>()};
            }
            const json& t = a.at("target");
            if (t.contains("extremity")) {
                auto [e, k] = pair(t["extremity"], "attachments.target.extremity");
                at.target = {AttachTarget::Kind::EdgeExtremity, e, k, {}, {}, {}};
            } else if (t.contains("hole")) {
                at.target = {AttachTarget::Kind::HoleEntry, t["hole"].get<int>(), 0, {}, {}, {}};
            } else if (t.contains("vertex")) {
                auto [p, v] = pair(t["vertex"], "attachments.target.vertex");
                at.target = {AttachTarget::Kind::CorePoint, 0, 0, {p, v}, {}, {}};
            } else {
                const json& pt = t.at("point");
                at.target = {AttachTarget::Kind::CorePoint, 0, 0, {pt.at(0).get<int>(), 0}, point_from_json(pt.at(1), "attachments.target.point"), {}};
            }
            if (t.contains("exit")) {
                auto [p, v] = pair(t["exit"], "attachments.target.exit");
                at.target.exit = CornerRef{p, v};
            }
            x.attachments.push_back(at);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("exotic surface: ") + e.what());
    }
    return x;
}

inline json pseudo(const PseudoTrace& t)
{
    json steps = json::array();
    for (const auto& s : t.steps) {
        switch (s.kind) {
        case PseudoStep::Kind::CoreSide: steps.push_back({{"side", side(s.side)}}); break;
        case PseudoStep::Kind::Attachment: steps.push_back({{"attachment", s.index}}); break;
        case PseudoStep::Kind::EdgeSide: steps.push_back({{"edge", s.index}, {"side", s.which}}); break;
        }
    }
    json j{{"kind", to_string(t.kind)}, {"direction", vec(t.dir.vec())}, {"steps", steps}, {"period_from", t.period_from}};
    if (t.hole) j["hole"] = *t.hole;
    if (t.edge_c) j["edge"] = *t.edge_c;
    return j;
}

inline json exotic_cylinder(const ExoticCylinder& c)
{
    json j{{"kind", to_string(c.kind)}, {"index", c.index}};
    j["modulus"] = c.modulus ? real(*c.modulus) : json(nullptr);
    if (c.core) j["cylinder"] = cylinder(*c.core);
    if (!c.structure.empty()) {
        PseudoTrace t;
        t.steps = c.structure;
        j["structure"] = pseudo(t)["steps"];
    }
    return j;
}

inline json limit(const LimitResult& r, const LemmaReport& lem)
{
    return {{"surface", exotic(r.surface)},
            {"components", r.components},
            {"passes", r.passes},
            {"log", r.log},
            {"dropped_point_gluings", r.dropped_point_gluings},
            {"audit",
             {{"ok", r.audit.ok()},
              {"placeholders_left", r.audit.placeholders_left},
              {"edge_polygon_gluings", r.audit.edge_polygon_gluings},
              {"extremity_gluings", r.audit.extremity_gluings},
              {"violations", r.audit.violations}}},
            {"lemmas", {{"nonempty", lem.nonempty}, {"closed_required", lem.closed_required}, {"closed", lem.closed}}}};
}

// -- AIETs

inline Aiet aiet_from_json(const json& doc)
{
    auto list = [&](const char* key) {
        if (!doc.contains(key) || !doc[key].is_array()) throw ParseError(std::string("AIET: missing array '") + key + "'");
        std::vector<Scalar> out;
        for (std::size_t k = 0; k < doc[key].size(); ++k) out.push_back(io_detail::scalar_from_json(doc[key][k], std::string(key) + "[" + std::to_string(k) + "]"));
        return out;
    };
    return Aiet(list("breakpoints"), list("slopes"), list("offsets"));
}

inline json aiet(const Aiet& T)
{
    json bp = json::array(), sl = json::array(), of = json::array();
    for (const auto& x : T.breakpoints()) bp.push_back(x.get_str());
    for (const auto& x : T.slopes()) sl.push_back(x.get_str());
    for (const auto& x : T.offsets()) of.push_back(x.get_str());
    return {{"breakpoints", bp}, {"slopes", sl}, {"offsets", of}};
}

inline json density(const DensitySweep& r)
{
    std::size_t found = static_cast<std::size_t>(std::count(r.periodic.begin(), r.periodic.end(), 1));
    std::size_t trunc = static_cast<std::size_t>(std::count(r.truncated.begin(), r.truncated.end(), 1));
    return {{"grid_points", r.grid.size()},
            {"periodic_points_found", found},
            {"truncated", trunc},
            {"step", r.step.get_str()},
            {"window", r.window.get_str()},
            {"max_period", r.max_period},
            {"windows", r.windows},
            {"windows_covered", r.windows_covered},
            {"coverage", r.coverage()},
            {"largest_empty_run", r.largest_empty.get_str()}};
}

}  // namespace report
}  // namespace dilatone
