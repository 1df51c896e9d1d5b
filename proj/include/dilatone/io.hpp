#pragma once
// JSON surface description files.
//
//   { "polygons": [[["num/den","num/den"], ...], ...],
//     "gluings": [{"from": [i, j], "to": [k, l]}, ...],
//     "marked_points": [[i, v]], "boundary": [[i, j]] }
//
// Coordinates are exact rational strings. Gluing maps are derived from the
// geometry; an optional "a" entry is checked against the derived ratio.

#include "surface.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dilatone {

using json = nlohmann::ordered_json;

class ParseError : public DomainError {
public:
    using DomainError::DomainError;
};

struct LoadResult {
    SurfaceSpec spec;
    std::vector<std::string> warnings;
};

namespace io_detail {

inline Scalar scalar_from_json(const json& j, const std::string& where)
{
    try {
        if (j.is_string()) return parse_scalar(j.get<std::string>());
        if (j.is_number_integer()) return Scalar(j.get<long>());
        if (j.is_number_float()) return parse_scalar(j.dump());
    } catch (const DomainError& e) {
        throw ParseError(where + ": " + e.what());
    }
    throw ParseError(where + ": expected a rational string");
}

inline int int_from_json(const json& j, const std::string& where)
{
    if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
    return j.get<int>();
}

inline std::pair<int, int> pair_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [i, j]");
    return {int_from_json(j[0], where + "[0]"), int_from_json(j[1], where + "[1]")};
}

inline json scalar_to_json(const Scalar& s) { return s.get_str(); }

}  // namespace io_detail

inline Point point_from_json(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [x, y]");
    return {io_detail::scalar_from_json(j[0], where + "[0]"), io_detail::scalar_from_json(j[1], where + "[1]")};
}

inline json point_to_json(const Point& p) { return json::array({p.x.get_str(), p.y.get_str()}); }

inline LoadResult surface_spec_from_json(const json& doc)
{
    using namespace io_detail;
    LoadResult out;
    if (!doc.is_object()) throw ParseError("top level: expected an object");
    static const std::set<std::string> known = {"polygons", "gluings", "marked_points", "boundary", "multi_component", "name", "comment"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (!known.count(it.key())) out.warnings.push_back("unknown field '" + it.key() + "' ignored");
    if (!doc.contains("polygons")) throw ParseError("missing field 'polygons'");
    const json& polys = doc["polygons"];
    if (!polys.is_array()) throw ParseError("polygons: expected an array");
    for (std::size_t i = 0; i < polys.size(); ++i) {
        std::string where = "polygons[" + std::to_string(i) + "]";
        if (!polys[i].is_array()) throw ParseError(where + ": expected an array of points");
        Polygon p;
        for (std::size_t k = 0; k < polys[i].size(); ++k)
            p.vertices.push_back(point_from_json(polys[i][k], where + "[" + std::to_string(k) + "]"));
        out.spec.polygons.push_back(std::move(p));
    }
    if (doc.contains("gluings")) {
        const json& gl = doc["gluings"];
        if (!gl.is_array()) throw ParseError("gluings: expected an array");
        for (std::size_t k = 0; k < gl.size(); ++k) {
            std::string where = "gluings[" + std::to_string(k) + "]";
            const json& g = gl[k];
            if (!g.is_object() || !g.contains("from") || !g.contains("to")) throw ParseError(where + ": expected {from, to}");
            for (auto it = g.begin(); it != g.end(); ++it)
                if (it.key() != "from" && it.key() != "to" && it.key() != "a")
                    out.warnings.push_back(where + ": unknown field '" + it.key() + "' ignored");
            auto [a, b] = pair_from_json(g["from"], where + ".from");
            auto [c, d] = pair_from_json(g["to"], where + ".to");
            out.spec.pairings.push_back({{a, b}, {c, d}});
            if (g.contains("a")) {
                Scalar r = scalar_from_json(g["a"], where + ".a");
                if (sgn(r) <= 0) throw ParseError(where + ".a: ratio must be positive, got " + r.get_str());
                out.spec.declared_ratios.push_back(r);
            } else {
                out.spec.declared_ratios.push_back(std::nullopt);
            }
        }
    }
    if (doc.contains("marked_points"))
        for (std::size_t k = 0; k < doc["marked_points"].size(); ++k) {
            auto [p, v] = pair_from_json(doc["marked_points"][k], "marked_points[" + std::to_string(k) + "]");
            out.spec.marked_points.push_back({p, v});
        }
    if (doc.contains("boundary"))
        for (std::size_t k = 0; k < doc["boundary"].size(); ++k) {
            auto [p, s] = pair_from_json(doc["boundary"][k], "boundary[" + std::to_string(k) + "]");
            out.spec.boundary.push_back({p, s});
        }
    if (doc.contains("multi_component")) out.spec.multi_component = doc["multi_component"].get<bool>();
    return out;
}

inline json surface_spec_to_json(const SurfaceSpec& spec)
{
    json doc;
    json polys = json::array();
    for (const auto& p : spec.polygons) {
        json pts = json::array();
        for (const auto& v : p.vertices) pts.push_back(point_to_json(v));
        polys.push_back(pts);
    }
    doc["polygons"] = polys;
    json gl = json::array();
    for (const auto& [s, t] : spec.pairings)
        gl.push_back({{"from", {s.polygon, s.side}}, {"to", {t.polygon, t.side}}});
    doc["gluings"] = gl;
    json mk = json::array();
    for (const auto& c : spec.marked_points) mk.push_back({c.polygon, c.vertex});
    doc["marked_points"] = mk;
    json bd = json::array();
    for (const auto& b : spec.boundary) bd.push_back({b.polygon, b.side});
    doc["boundary"] = bd;
    if (spec.multi_component) doc["multi_component"] = true;
    return doc;
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline LoadResult load_surface_spec(const std::string& path) { return surface_spec_from_json(read_json_file(path)); }

inline DilationSurface load_surface(const std::string& path) { return DilationSurface::from_spec(load_surface_spec(path).spec); }

inline void write_json_file(const std::string& path, const json& doc)
{
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    out << doc.dump(2) << '\n';
}

inline void save_surface(const std::string& path, const SurfaceSpec& spec) { write_json_file(path, surface_spec_to_json(spec)); }

}  // namespace dilatone
