#pragma once
// SVG figures: polygons with colored gluings, traced leaves dashed on top,
// and a direction gauge for sweeps.

#include "cylinders.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace dilatone::svg {

inline const char* palette(int k)
{
    static const char* colors[] = {"#1f77b4", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#2ca02c"};
    return colors[static_cast<std::size_t>(k) % 10];
}

inline std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

struct Layer {
    std::vector<Leg> legs;
    std::string color = "#2ca02c";
    bool dashed = true;
};

/// Polygons side by side, each scaled into a 200 px box. Glued sides share a
/// color and a number; open sides are drawn thick and black.
inline std::string polygons(const std::vector<Polygon>& ps, const std::vector<std::pair<SideRef, SideRef>>& pairings,
                            const std::vector<Layer>& layers = {})
{
    const double box = 200, pad = 20;
    std::map<SideRef, int> pair_of;
    for (std::size_t k = 0; k < pairings.size(); ++k) {
        pair_of[pairings[k].first] = static_cast<int>(k);
        pair_of[pairings[k].second] = static_cast<int>(k);
    }
    struct Frame {
        double x0, y1, s, ox;
    };
    std::vector<Frame> frames;
    double ox = pad;
    for (const auto& P : ps) {
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& v : P.vertices) {
            xmin = std::min(xmin, v.x.get_d());
            xmax = std::max(xmax, v.x.get_d());
            ymin = std::min(ymin, v.y.get_d());
            ymax = std::max(ymax, v.y.get_d());
        }
        double s = box / std::max({xmax - xmin, ymax - ymin, 1e-300});
        frames.push_back({xmin, ymax, s, ox});
        ox += (xmax - xmin) * s + pad;
    }
    auto at = [&](int p, const Point& v) {
        const auto& f = frames[static_cast<std::size_t>(p)];
        return std::pair{f.ox + (v.x.get_d() - f.x0) * f.s, pad + (f.y1 - v.y.get_d()) * f.s};
    };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(ox) << "\" height=\"" << num(box + 2 * pad) << "\">\n";
    for (int p = 0; p < static_cast<int>(ps.size()); ++p) {
        const auto& P = ps[static_cast<std::size_t>(p)];
        o << "<polygon fill=\"#f2f2f2\" stroke=\"none\" points=\"";
        for (const auto& v : P.vertices) {
            auto [x, y] = at(p, v);
            o << num(x) << "," << num(y) << " ";
        }
        o << "\"/>\n";
        for (int k = 0; k < P.size(); ++k) {
            auto [x1, y1] = at(p, P.vertex(k));
            auto [x2, y2] = at(p, P.vertex(k + 1));
            auto it = pair_of.find({p, k});
            o << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\""
              << (it == pair_of.end() ? "#000" : palette(it->second)) << "\" stroke-width=\"" << (it == pair_of.end() ? 3 : 2) << "\"/>\n";
            if (it != pair_of.end())
                o << "<text x=\"" << num((x1 + x2) / 2) << "\" y=\"" << num((y1 + y2) / 2) << "\" font-size=\"10\" fill=\"" << palette(it->second)
                  << "\">" << it->second << "</text>\n";
        }
    }
    for (const auto& layer : layers)
        for (const auto& l : layer.legs) {
            if (l.polygon < 0 || l.polygon >= static_cast<int>(ps.size())) continue;
            auto [x1, y1] = at(l.polygon, l.from);
            auto [x2, y2] = at(l.polygon, l.to);
            o << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2) << "\" stroke=\"" << layer.color
              << "\" stroke-width=\"1.5\"" << (layer.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
        }
    o << "</svg>\n";
    return o.str();
}

/// Unit circle of directions with the covered arcs drawn over it.
inline std::string gauge(const SweepReport& r)
{
    const double c = 120, R = 100;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"240\" height=\"260\">\n";
    o << "<circle cx=\"" << c << "\" cy=\"" << c << "\" r=\"" << R << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"6\"/>\n";
    for (const auto& [a, w] : r.covered) {
        double b = a + w;
        auto px = [&](double t) { return num(c + R * std::cos(t)); };
        auto py = [&](double t) { return num(c - R * std::sin(t)); };
        if (w >= 2 * std::numbers::pi - 1e-12) {
            o << "<circle cx=\"" << c << "\" cy=\"" << c << "\" r=\"" << R << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"6\"/>\n";
            continue;
        }
        o << "<path d=\"M " << px(a) << " " << py(a) << " A " << R << " " << R << " 0 " << (w > std::numbers::pi ? 1 : 0) << " 0 " << px(b) << " "
          << py(b) << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"6\"/>\n";
    }
    o << "<text x=\"10\" y=\"250\" font-size=\"12\">cylinders " << r.cylinders.size() << ", largest gap " << num(r.max_gap * 180 / std::numbers::pi)
      << " deg</text>\n</svg>\n";
    return o.str();
}

}  // namespace dilatone::svg
