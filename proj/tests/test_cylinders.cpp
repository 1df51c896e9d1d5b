#include "support.hpp"

#include <dilatone/cylinders.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dilatone;
using dilatone::testing::load;

namespace {

Cylinder cylinder_through(const DilationSurface& s, int polygon, Point x, Direction d)
{
    auto o = trace(s, polygon, x, d, 1000);
    EXPECT_EQ(o.kind, TraceKind::ClosedUp);
    return assemble_cylinder(s, o);
}

}  // namespace

TEST(Cylinder, SquareTorusHorizontalFamily)
{
    auto s = load("square_torus");
    auto c = cylinder_through(s, 0, {frac(1, 3), frac(1, 2)}, Direction(1, 0));
    EXPECT_EQ(c.kind, Cylinder::Kind::Flat);
    ASSERT_TRUE(c.exact_modulus);
    EXPECT_EQ(*c.exact_modulus, 1);
    EXPECT_EQ(c.circumference, Vector(1, 0));
}

TEST(Cylinder, SquareTorusDiagonalFamily)
{
    // circumference sqrt 2, height 1 / sqrt 2
    auto s = load("square_torus");
    auto c = cylinder_through(s, 0, {frac(1, 3), frac(1, 5)}, Direction(1, 1));
    EXPECT_EQ(c.kind, Cylinder::Kind::Flat);
    EXPECT_EQ(*c.exact_modulus, frac(1, 2));
}

TEST(Cylinder, RectangleTorusModuliMultiplyToOne)
{
    auto s = load("rect_torus_2x1");
    auto h = cylinder_through(s, 0, {frac(1, 3), frac(1, 2)}, Direction(1, 0));
    auto v = cylinder_through(s, 0, {frac(1, 3), frac(1, 2)}, Direction(0, 1));
    EXPECT_EQ(*h.exact_modulus, frac(1, 2));
    EXPECT_EQ(*v.exact_modulus, 2);
    EXPECT_TRUE(cylinders_intersect(h, v));
    auto chk = check_moduli_lemma({h, v});
    EXPECT_EQ(chk.intersecting, 1);
    EXPECT_TRUE(chk.ok());
    EXPECT_DOUBLE_EQ(chk.max_product, 1.0);
}

TEST(Cylinder, BuiltDilationCylinderRecovered)
{
    auto s = build_dilation_cylinder(std::numbers::pi / 2, 2);
    auto c = cylinder_through(s, 0, {frac(3, 4), frac(3, 4)}, Direction(1, 1));
    EXPECT_EQ(c.kind, Cylinder::Kind::Dilation);
    EXPECT_EQ(c.multiplier, 2);
    EXPECT_FALSE(c.reversed);
    EXPECT_EQ(Direction(c.cone_lo), Direction(1, 0));
    EXPECT_EQ(Direction(c.cone_hi), Direction(0, 1));
    EXPECT_TRUE(c.cone_exact);
    ASSERT_TRUE(c.exact_modulus);
    EXPECT_EQ(*c.exact_modulus, 2);
    EXPECT_NEAR(c.angle, std::numbers::pi / 2, 1e-12);
}

TEST(Cylinder, ContractingOrbitIsReoriented)
{
    auto s = build_dilation_cylinder(std::numbers::pi / 2, 2);
    auto c = cylinder_through(s, 0, {frac(3, 4), frac(3, 4)}, Direction(-1, -1));
    EXPECT_TRUE(c.reversed);
    EXPECT_EQ(c.multiplier, 2);
    EXPECT_EQ(Direction(c.cone_lo), Direction(1, 0));
    EXPECT_EQ(Direction(c.cone_hi), Direction(0, 1));
    EXPECT_EQ(*c.exact_modulus, 2);
}

TEST(Cylinder, OffBisectorLeafFindsTheSameCone)
{
    auto s = build_dilation_cylinder(std::numbers::pi / 2, 2);
    auto c = cylinder_through(s, 0, {frac(1, 2), frac(5, 4)}, Direction(2, 5));
    EXPECT_EQ(Direction(c.cone_lo), Direction(1, 0));
    EXPECT_EQ(Direction(c.cone_hi), Direction(0, 1));
}

TEST(Cylinder, ThirdOfPiCone)
{
    auto s = load("cylinder_pi3");
    auto c = cylinder_through(s, 0, {frac(3, 2), frac(1, 2)}, Direction(3, 1));
    EXPECT_EQ(c.multiplier, 3);
    EXPECT_NEAR(c.angle, std::numbers::pi / 3, 1e-8);
    EXPECT_NEAR(c.modulus, dilation_cylinder_modulus(std::numbers::pi / 3, 3), 1e-8);
}

TEST(Cylinder, HalfPlaneConeCrossesRegularVertex)
{
    // the cone is split by a regular vertex; the family continues through it
    for (const char* name : {"cylinder_pi", "pi_cylinder_closed"}) {
        auto s = load(name);
        auto c = cylinder_through(s, 0, {frac(3, 4), frac(3, 4)}, Direction(1, 1));
        EXPECT_EQ(c.multiplier, 2) << name;
        EXPECT_EQ(Direction(c.cone_lo), Direction(1, 0)) << name;
        EXPECT_EQ(Direction(c.cone_hi), Direction(-1, 0)) << name;
        EXPECT_TRUE(std::isinf(c.modulus)) << name;
        EXPECT_FALSE(c.exact_modulus) << name;
        EXPECT_GE(c.itineraries.size(), 2u) << name;
    }
}

TEST(ReturnMap, TrappedPiecesStopEarly)
{
    // On the chord of the closed pi cylinder the leaves that cross into the
    // rectangle get caught in the cylinder and never come back.
    auto s = load("pi_cylinder_closed");
    auto m = return_map(s, {1, 2}, Direction(1, 2), 10000);
    for (const auto& b : m.branches) EXPECT_NE(b.kind, ReturnBranch::Kind::Unresolved);
}

TEST(Sweep, SquareTorusFindsRationalDirections)
{
    auto s = load("square_torus");
    SweepOptions o;
    o.directions = 8;
    o.budget = 50;
    o.max_period = 8;
    o.saddle_crossings = 0;
    auto r = sweep(s, o);
    // (1,0), (0,1), (1,1), (-1,1): each found once though sampled in both orientations
    EXPECT_EQ(r.cylinders.size(), 4u);
    for (const auto& c : r.cylinders) EXPECT_EQ(c.kind, Cylinder::Kind::Flat);
    EXPECT_NEAR(r.max_gap, std::numbers::pi / 4, 1e-9);
}

TEST(Sweep, DilationCylinderCoversItsCone)
{
    auto s = build_dilation_cylinder(std::numbers::pi / 2, 2);
    SweepOptions o;
    o.directions = 36;
    o.budget = 200;
    o.max_period = 4;
    auto r = sweep(s, o);
    ASSERT_EQ(r.cylinders.size(), 1u);
    ASSERT_EQ(r.covered.size(), 2u);
    EXPECT_NEAR(r.covered[0].first, 0, 1e-12);
    EXPECT_NEAR(r.covered[0].second, std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(r.covered[1].first, std::numbers::pi, 1e-12);
    EXPECT_NEAR(r.max_gap, std::numbers::pi / 2, 1e-12);
}

TEST(Sweep, ArcMerging)
{
    const double pi = std::numbers::pi;
    auto [m, gap] = cyl_detail::merge_arcs({{0.1, 0.2}, {0.25, 0.1}, {2 * pi - 0.1, 0.15}});
    // the wrapped arc ends at 0.05, short of the first one
    ASSERT_EQ(m.size(), 2u);
    EXPECT_NEAR(gap, 2 * pi - 0.45, 1e-12);
    auto [m2, gap2] = cyl_detail::merge_arcs({{0, pi}, {pi, pi}});
    EXPECT_EQ(gap2, 0);
}
