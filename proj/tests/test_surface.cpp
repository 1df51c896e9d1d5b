#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace dilatone;
using dilatone::testing::corpus;
using dilatone::testing::load;

TEST(Validate, FlatTorusWithoutMarkedPoint)
{
    auto spec = load_surface_spec(corpus("square_torus")).spec;
    spec.marked_points.clear();
    EXPECT_TRUE(validate(spec).ok());
    auto s = DilationSurface::from_spec(spec);
    EXPECT_TRUE(singularities(s).empty());
    EXPECT_EQ(s.genus(), 1);
    EXPECT_THROW(complexity(s), DomainError);
}

TEST(Validate, NegativeRatioRejected)
{
    SurfaceSpec spec;
    spec.polygons.push_back({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    spec.polygons.push_back({{{0, 0}, {2, 0}, {2, 2}, {0, 2}}});
    // bottom of the unit square against the bottom of the doubled square: same orientation, ratio -2
    spec.pairings = {{{0, 0}, {1, 0}}, {{0, 1}, {0, 3}}, {{0, 2}, {1, 2}}, {{1, 1}, {1, 3}}};
    auto rep = validate(spec);
    EXPECT_TRUE(rep.mentions("ratio not positive"));
    EXPECT_TRUE(rep.mentions("a = -2"));
}

TEST(Validate, GenusTwoPentagons)
{
    auto s = load("fig1_genus2");
    EXPECT_EQ(s.genus(), 2);
    auto sing = singularities(s);
    ASSERT_EQ(sing.size(), 1u);
    EXPECT_EQ(*sing[0].pi_multiple, 6);
    EXPECT_NEAR(sing[0].total_angle, 6 * std::numbers::pi, 1e-9);
}

TEST(Validate, CorruptionsOfCorpusFilesAreRejected)
{
    for (const char* name : {"square_torus", "fig1_genus2", "dilation_torus"}) {
        auto spec = load_surface_spec(corpus(name)).spec;
        ASSERT_TRUE(validate(spec).ok()) << name;
        // move one vertex: some pairing stops being parallel or a polygon breaks
        for (std::size_t p = 0; p < spec.polygons.size(); ++p)
            for (std::size_t v = 0; v < spec.polygons[p].vertices.size(); ++v) {
                auto bad = spec;
                bad.polygons[p].vertices[v].x += Scalar(1, 7);
                EXPECT_FALSE(validate(bad).ok()) << name << " vertex " << p << "," << v;
            }
        for (std::size_t k = 0; k < spec.pairings.size(); ++k) {
            auto bad = spec;
            bad.pairings[k].second.side = (bad.pairings[k].second.side + 1) % spec.polygons[static_cast<std::size_t>(bad.pairings[k].second.polygon)].size();
            EXPECT_FALSE(validate(bad).ok()) << name << " pairing " << k;
            bad = spec;
            bad.pairings.erase(bad.pairings.begin() + static_cast<long>(k));
            EXPECT_FALSE(validate(bad).ok()) << name << " dropped pairing " << k;
        }
        auto rev = spec;
        std::reverse(rev.polygons[0].vertices.begin(), rev.polygons[0].vertices.end());
        EXPECT_FALSE(validate(rev).ok());
    }
}

TEST(Singularities, MarkedFlatTorus)
{
    auto s = load("square_torus");
    auto sing = singularities(s);
    ASSERT_EQ(sing.size(), 1u);
    EXPECT_EQ(*sing[0].pi_multiple, 2);
    EXPECT_EQ(sing[0].linear_holonomy, 1);
    EXPECT_TRUE(sing[0].marked);
}

TEST(Singularities, GaussBonnetOracle)
{
    // independent count: sum of all corner angles = pi * (sum of (n_i - 2)) for the polygons
    for (const char* name : {"fig1_genus2", "dilation_torus", "hexagon_torus", "square_torus"}) {
        auto s = load(name);
        double corner_sum = 0;
        for (const auto& p : s.polygons()) corner_sum += std::numbers::pi * (p.size() - 2);
        double cycle_sum = 0;
        for (const auto& c : s.vertex_cycles()) cycle_sum += c.total_angle;
        EXPECT_NEAR(cycle_sum, corner_sum, 1e-9) << name;
        // closed surface: sum over cycles of (angle - 2 pi) = -2 pi chi
        double excess = 0;
        for (const auto& c : s.vertex_cycles()) excess += c.total_angle - 2 * std::numbers::pi;
        EXPECT_NEAR(excess, -2 * std::numbers::pi * s.euler_characteristic(), 1e-9) << name;
    }
}

TEST(Singularities, HolonomyBookkeeping)
{
    for (const char* name : {"fig1_genus2", "dilation_torus"}) {
        auto s = load(name);
        for (const auto& c : s.vertex_cycles()) {
            double logsum = 0;
            for (const auto& corner : c.corners) {
                const auto& g = s.gluing({corner.polygon, corner.vertex});
                ASSERT_TRUE(g);
                logsum += std::log(g->map.a.get_d());
            }
            EXPECT_NEAR(logsum, std::log(c.holonomy.get_d()), 1e-12);
            EXPECT_GT(sgn(c.holonomy), 0);
        }
    }
}

TEST(Singularities, DilationCylinderBoundary)
{
    auto s = build_dilation_cylinder(std::numbers::pi / 2, 2);
    auto sing = singularities(s);
    ASSERT_EQ(sing.size(), 2u);
    for (const auto& d : sing) {
        EXPECT_TRUE(d.boundary);
        EXPECT_NEAR(d.total_angle, std::numbers::pi, 1e-12);
    }
    EXPECT_EQ(s.boundary_components(), 2);
    EXPECT_EQ(s.genus(), 0);
}

TEST(Complexity, EulerCounts)
{
    EXPECT_EQ(complexity(load("square_torus")).n_triangles, 2);
    EXPECT_EQ(complexity(load("fig1_genus2")).n_triangles, 6);
    EXPECT_EQ(complexity(load("hexagon_torus")).n_triangles, 4);
    auto hex = complexity(load("hexagon_torus"));
    EXPECT_EQ(hex.genus, 1);
    EXPECT_EQ(hex.singularities, 2);
}

TEST(Builders, FlatCylinder)
{
    auto s = build_flat_cylinder({1, 0}, {0, 1});
    EXPECT_EQ(s.boundary_components(), 2);
    EXPECT_EQ(flat_cylinder_modulus({1, 0}, {0, 1}), 1);
    EXPECT_EQ(flat_cylinder_modulus({2, 0}, {0, 1}), Scalar(1, 2));
    EXPECT_EQ(flat_cylinder_modulus({0, 1}, {3, 0}), 3);
    // the ratio |z2/z1| for orthogonal vectors, computed independently
    Vector z1{2, 0}, z2{0, 1};
    EXPECT_EQ(*exact_sqrt(norm2(z2) / norm2(z1)), flat_cylinder_modulus(z1, z2));
    build_flat_cylinder({0, 1}, {3, 0});
    EXPECT_THROW(build_flat_cylinder({1, 1}, {2, 2}), DomainError);
}

TEST(Builders, DilationCylinder)
{
    EXPECT_DOUBLE_EQ(dilation_cylinder_modulus(std::numbers::pi / 2, 2), 2);
    EXPECT_TRUE(std::isinf(dilation_cylinder_modulus(std::numbers::pi, 2)));
    EXPECT_NEAR(dilation_cylinder_modulus(std::numbers::pi / 3, 3), std::tan(std::numbers::pi / 6), 1e-15);
    for (double th : {std::numbers::pi / 3, std::numbers::pi / 2, std::numbers::pi, 1.5 * std::numbers::pi}) {
        auto s = build_dilation_cylinder(th, 2);
        EXPECT_TRUE(validate(s.spec()).ok());
        EXPECT_EQ(s.boundary_components(), 2);
    }
    EXPECT_THROW(build_dilation_cylinder(1.0, 1), DomainError);
    EXPECT_THROW(build_dilation_cylinder(0.0, 2), DomainError);
    EXPECT_THROW(build_dilation_cylinder(7.0, 2), DomainError);
}

TEST(FileFormat, RoundTripAndDiagnostics)
{
    auto path = std::filesystem::temp_directory_path() / "dilatone_roundtrip.json";
    auto spec = load_surface_spec(corpus("fig1_genus2")).spec;
    save_surface(path.string(), spec);
    auto again = load_surface_spec(path.string()).spec;
    EXPECT_EQ(surface_spec_to_json(again).dump(), surface_spec_to_json(spec).dump());

    json doc = surface_spec_to_json(spec);
    doc["gluings"][0]["a"] = "-1";
    EXPECT_THROW(surface_spec_from_json(doc), ParseError);
    try {
        surface_spec_from_json(doc);
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("gluings[0].a"), std::string::npos);
    }
    doc = surface_spec_to_json(spec);
    doc["colour"] = "red";
    auto res = surface_spec_from_json(doc);
    ASSERT_EQ(res.warnings.size(), 1u);
    EXPECT_NE(res.warnings[0].find("colour"), std::string::npos);
    doc = surface_spec_to_json(spec);
    doc["polygons"][0][1][0] = "x/2";
    EXPECT_THROW(surface_spec_from_json(doc), ParseError);
}

TEST(Corpus, EveryFileValidates)
{
    for (const auto& entry : std::filesystem::directory_iterator(DILATONE_CORPUS_DIR)) {
        if (entry.path().extension() != ".json") continue;
        auto doc = read_json_file(entry.path().string());
        if (!doc.contains("polygons")) continue;  // flow scripts and exotic fixtures
        auto rep = validate(surface_spec_from_json(doc).spec);
        EXPECT_TRUE(rep.ok()) << entry.path() << ": " << (rep.ok() ? "" : rep.violations.front());
    }
}
