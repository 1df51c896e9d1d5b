// dilatone: command-line front end.
//
// Exit codes: 0 success, 1 domain error (bad input data, failed computation),
// 2 usage error.

#include <dilatone/report.hpp>
#include <dilatone/svg.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace dilatone;

namespace {

struct Globals {
    std::string mode = "exact";
    unsigned workers = default_workers();
    unsigned long seed = 0;
    bool exact() const { return mode == "exact"; }
};

Vector parse_vector(const std::string& text, const char* what)
{
    auto k = text.find(',');
    if (k == std::string::npos) throw CLI::ValidationError(what, "expected dx,dy");
    try {
        Vector v{parse_scalar(text.substr(0, k)), parse_scalar(text.substr(k + 1))};
        if (is_zero(v)) throw CLI::ValidationError(what, "zero vector");
        return v;
    } catch (const DomainError& e) {
        throw CLI::ValidationError(what, e.what());
    }
}

struct Start {
    int polygon = 0;
    Point point;
};

Start parse_start(const std::string& text)
{
    auto k = text.find(',');
    if (k == std::string::npos) throw CLI::ValidationError("--start", "expected i,x,y");
    try {
        Vector v = parse_vector(text.substr(k + 1), "--start");
        return {std::stoi(text.substr(0, k)), Point(v.x, v.y)};
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("--start", "expected i,x,y");
    }
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write '" + path + "'");
    out << text;
}

/// Envelope to the file, or to stdout.
void emit(const ReportEnvelope& env, const std::string& path)
{
    json j = env.to_json();
    if (path.empty()) std::cout << j.dump(2) << '\n';
    else write_json_file(path, j);
}

ReportEnvelope envelope(const std::string& command, const Globals& g, const std::vector<std::string>& inputs, json params)
{
    ReportEnvelope env;
    env.command = command;
    env.exact = g.exact();
    env.input_hash = input_hash(inputs);
    params["workers"] = g.workers;
    params["seed"] = g.seed;
    env.params = std::move(params);
    return env;
}

DilationSurface load_checked(const std::string& path)
{
    auto r = load_surface_spec(path);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    auto rep = validate(r.spec);
    if (!rep.ok()) throw DomainError(path + ": " + rep.violations.front());
    return DilationSurface::from_spec(std::move(r.spec));
}

std::vector<Leg> all_legs(const TraceOutcome& o) { return o.legs; }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"dilatone: dilation surfaces, their cylinders, Delaunay polygonations and degenerations"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--mode", g.mode, "exact or approx")->check(CLI::IsMember({"exact", "approx"}));
    app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for randomized runs");

    std::string file, json_out, svg_out, dir_text, start_text, out_path;
    int budget = 10000, max_n = 6, n_dirs = 360, max_period = 64;
    bool remove_regular = false, with_delaunay = false;
    std::string times_text, dir1_text, dir2_text, step_text = "1e-3", window_text = "1e-1";

    auto* validate_cmd = app.add_subcommand("validate", "check a surface file");
    validate_cmd->add_option("file", file)->required();
    validate_cmd->add_option("--json", json_out);

    auto* info_cmd = app.add_subcommand("info", "genus, singularities and complexity");
    info_cmd->add_option("file", file)->required();
    info_cmd->add_option("--json", json_out);

    auto* trace_cmd = app.add_subcommand("trace", "trace a leaf");
    trace_cmd->add_option("file", file)->required();
    trace_cmd->add_option("--start", start_text, "i,x,y")->required();
    trace_cmd->add_option("--dir", dir_text, "dx,dy")->required();
    trace_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    trace_cmd->add_option("--svg", svg_out);
    trace_cmd->add_option("--json", json_out);

    auto* saddles_cmd = app.add_subcommand("saddles", "saddle connections up to a number of crossings");
    saddles_cmd->add_option("file", file)->required();
    saddles_cmd->add_option("--max", max_n)->check(CLI::NonNegativeNumber);
    saddles_cmd->add_option("--json", json_out);

    auto* delaunay_cmd = app.add_subcommand("delaunay", "Delaunay polygonation");
    delaunay_cmd->add_option("file", file)->required();
    delaunay_cmd->add_flag("--remove-regular", remove_regular, "flip away vertices that are neither singular nor marked");
    delaunay_cmd->add_option("--svg", svg_out);
    delaunay_cmd->add_option("--json", json_out);

    auto* cylinders_cmd = app.add_subcommand("cylinders", "cylinders in one direction");
    cylinders_cmd->add_option("file", file)->required();
    cylinders_cmd->add_option("--dir", dir_text, "dx,dy")->required();
    cylinders_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    cylinders_cmd->add_option("--max-period", max_period)->check(CLI::PositiveNumber);
    cylinders_cmd->add_option("--json", json_out);

    auto* sweep_cmd = app.add_subcommand("sweep", "search cylinders over a grid of directions");
    sweep_cmd->add_option("file", file)->required();
    sweep_cmd->add_option("--n", n_dirs)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--max-period", max_period)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--json", json_out);
    sweep_cmd->add_option("--svg", svg_out);

    auto* flow_cmd = app.add_subcommand("flow", "track the Delaunay pattern along a Teichmueller orbit");
    flow_cmd->add_option("file", file)->required();
    flow_cmd->add_option("--times", times_text, "comma list of log(r) or decimals")->required();
    flow_cmd->add_option("--dir1", dir1_text, "contracted direction dx,dy");
    flow_cmd->add_option("--dir2", dir2_text, "dilated direction dx,dy");
    flow_cmd->add_option("--json", json_out);

    auto* limit_cmd = app.add_subcommand("limit", "reduce the final polygonation of a flow trace to an exotic surface");
    limit_cmd->add_option("file", file, "flow trace JSON")->required();
    limit_cmd->add_option("--out", out_path, "exotic surface file");
    limit_cmd->add_option("--json", json_out);

    auto* exotic_cmd = app.add_subcommand("exotic-trace", "pseudo-leaves and cylinders of an exotic surface");
    exotic_cmd->add_option("file", file)->required();
    exotic_cmd->add_option("--dir", dir_text, "dx,dy")->required();
    exotic_cmd->add_option("--start", start_text, "i,x,y; without it every attachment is traced");
    exotic_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    exotic_cmd->add_option("--json", json_out);

    auto* aiet_cmd = app.add_subcommand("aiet-sweep", "periodic points over the rotation family of an AIET");
    aiet_cmd->add_option("file", file)->required();
    aiet_cmd->add_option("--step", step_text);
    aiet_cmd->add_option("--window", window_text);
    aiet_cmd->add_option("--max-period", max_period)->check(CLI::PositiveNumber);
    aiet_cmd->add_option("--json", json_out);

    auto* render_cmd = app.add_subcommand("render", "SVG of a surface, its polygonation or a leaf");
    render_cmd->add_option("file", file)->required();
    render_cmd->add_flag("--delaunay", with_delaunay);
    render_cmd->add_option("--start", start_text, "i,x,y");
    render_cmd->add_option("--dir", dir_text, "dx,dy");
    render_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
    render_cmd->add_option("--svg", svg_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate_cmd) {
            auto r = load_surface_spec(file);
            auto rep = validate(r.spec);
            auto env = envelope("validate", g, {file}, {{"file", file}});
            env.payload = {{"valid", rep.ok()}, {"violations", rep.violations}, {"warnings", r.warnings}};
            emit(env, json_out);
            return rep.ok() ? 0 : 1;
        }
        if (*info_cmd) {
            auto s = load_checked(file);
            auto env = envelope("info", g, {file}, {{"file", file}});
            env.payload = report::info(s);
            emit(env, json_out);
            return 0;
        }
        if (*trace_cmd) {
            auto s = load_checked(file);
            Start st = parse_start(start_text);
            Direction d(parse_vector(dir_text, "--dir"));
            if (st.polygon < 0 || st.polygon >= s.polygon_count()) throw DomainError("--start: no polygon " + std::to_string(st.polygon));
            auto o = trace(s, st.polygon, st.point, d, budget);
            auto env = envelope("trace", g, {file}, {{"file", file}, {"start", start_text}, {"dir", dir_text}, {"budget", budget}});
            env.payload = report::trace(o);
            emit(env, json_out);
            if (!svg_out.empty()) write_text(svg_out, svg::polygons(s.spec().polygons, s.spec().pairings, {{all_legs(o)}}));
            return 0;
        }
        if (*saddles_cmd) {
            auto s = load_checked(file);
            json list = json::array();
            for (const auto& c : saddle_connections(s, max_n)) list.push_back(report::saddle(c));
            auto env = envelope("saddles", g, {file}, {{"file", file}, {"max", max_n}});
            env.payload = {{"saddle_connections", list}};
            emit(env, json_out);
            return 0;
        }
        if (*delaunay_cmd) {
            auto s = load_checked(file);
            auto r = flip_to_delaunay(initial_triangulation(s, {.remove_regular = remove_regular}));
            auto env = envelope("delaunay", g, {file}, {{"file", file}, {"remove_regular", remove_regular}});
            env.payload = report::delaunay(r);
            emit(env, json_out);
            if (!svg_out.empty()) {
                if (auto* d = std::get_if<DelaunayPolygonation>(&r)) write_text(svg_out, svg::polygons(d->faces, d->pairings));
                else write_text(svg_out, svg::polygons(s.spec().polygons, s.spec().pairings, {{std::get<CylinderObstruction>(r).cylinder.leaves.empty() ? std::vector<Leg>{} : std::get<CylinderObstruction>(r).cylinder.leaves.front()}}));
            }
            return std::holds_alternative<DelaunayPolygonation>(r) ? 0 : 1;
        }
        if (*cylinders_cmd) {
            auto s = load_checked(file);
            Direction d(parse_vector(dir_text, "--dir"));
            json list = json::array();
            for (const auto& c : cylinders_near(s, d, 0, max_period, budget, 1)) list.push_back(report::cylinder(c));
            auto env = envelope("cylinders", g, {file}, {{"file", file}, {"dir", dir_text}, {"budget", budget}, {"max_period", max_period}});
            env.payload = {{"cylinders", list}};
            emit(env, json_out);
            return 0;
        }
        if (*sweep_cmd) {
            auto s = load_checked(file);
            SweepOptions opt;
            opt.directions = n_dirs;
            opt.budget = budget;
            opt.max_period = max_period;
            opt.workers = g.workers;
            auto r = sweep(s, opt);
            auto env = envelope("sweep", g, {file}, {{"file", file}, {"n", n_dirs}, {"budget", budget}, {"max_period", max_period}});
            env.payload = report::sweep(r);
            emit(env, json_out);
            if (!svg_out.empty()) write_text(svg_out, svg::gauge(r));
            return 0;
        }
        if (*flow_cmd) {
            auto s = load_checked(file);
            FlowOptions opt;
            opt.exact = g.exact();
            opt.workers = g.workers;
            if (dir1_text.empty() != dir2_text.empty()) throw CLI::ValidationError("--dir1/--dir2", "give both or neither");
            if (!dir1_text.empty()) opt.directions = {Direction(parse_vector(dir1_text, "--dir1")), Direction(parse_vector(dir2_text, "--dir2"))};
            auto tr = track(s, parse_flow_times(times_text), opt);
            json params{{"file", file}, {"times", times_text}};
            if (opt.directions) params["dir1"] = dir1_text, params["dir2"] = dir2_text;
            auto env = envelope("flow", g, {file}, params);
            env.approximate = tr.approximate;
            env.payload = report::flow(tr);
            emit(env, json_out);
            return 0;
        }
        if (*limit_cmd) {
            auto [faces, pairings] = report::limit_faces(read_json_file(file));
            auto pre = assemble_prelimit(faces, pairings);
            auto r = reduce(pre);
            auto lem = check_limit_lemmas(pre, r.surface);
            auto env = envelope("limit", g, {file}, {{"file", file}});
            env.payload = report::limit(r, lem);
            if (!out_path.empty()) write_json_file(out_path, report::exotic(r.surface));
            emit(env, json_out);
            return 0;
        }
        if (*exotic_cmd) {
            auto x = report::exotic_from_json(read_json_file(file));
            auto v = validate_exotic(x);
            if (!v.ok()) throw DomainError(file + ": " + v.report.violations.front());
            Direction d(parse_vector(dir_text, "--dir"));
            auto env = envelope("exotic-trace", g, {file}, {{"file", file}, {"dir", dir_text}, {"budget", budget}});
            json traces = json::array();
            if (!start_text.empty()) {
                Start st = parse_start(start_text);
                traces.push_back(report::pseudo(trace_pseudo(x, st.polygon, st.point, d, budget)));
            } else {
                PseudoTracer tr(x);
                for (std::size_t k = 0; k < x.attachments.size(); ++k) traces.push_back(report::pseudo(tr.trace_from(static_cast<int>(k), d, budget)));
            }
            json cyl = json::array();
            for (const auto& c : exotic_cylinders(x, d, budget)) cyl.push_back(report::exotic_cylinder(c));
            env.payload = {{"closed", v.closed}, {"traces", traces}, {"cylinders", cyl}};
            emit(env, json_out);
            return 0;
        }
        if (*aiet_cmd) {
            auto T = report::aiet_from_json(read_json_file(file));
            Scalar step = parse_scalar(step_text), window = parse_scalar(window_text);
            auto r = density_sweep(AietFamily{T}, step, window, max_period, g.workers);
            auto env = envelope("aiet-sweep", g, {file}, {{"file", file}, {"step", step_text}, {"window", window_text}, {"max_period", max_period}});
            env.payload = report::density(r);
            emit(env, json_out);
            return 0;
        }
        if (*render_cmd) {
            auto s = load_checked(file);
            std::vector<svg::Layer> layers;
            if (!start_text.empty() || !dir_text.empty()) {
                if (start_text.empty() || dir_text.empty()) throw CLI::ValidationError("--start/--dir", "give both or neither");
                if (with_delaunay) throw CLI::ValidationError("--delaunay", "leaves are drawn on the surface's own polygons");
                Start st = parse_start(start_text);
                layers.push_back({trace(s, st.polygon, st.point, Direction(parse_vector(dir_text, "--dir")), budget).legs});
            }
            std::string out;
            if (with_delaunay) {
                auto r = flip_to_delaunay(initial_triangulation(s, {.remove_regular = true}));
                auto* d = std::get_if<DelaunayPolygonation>(&r);
                if (!d) throw DomainError("no Delaunay polygonation: the surface has a cylinder of angle at least pi");
                out = svg::polygons(d->faces, d->pairings);
            } else {
                out = svg::polygons(s.spec().polygons, s.spec().pairings, layers);
            }
            if (svg_out.empty()) std::cout << out;
            else write_text(svg_out, out);
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
