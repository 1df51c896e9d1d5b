#include "limit_fixtures.hpp"
#include "support.hpp"

#include <dilatone/exotic.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace dilatone;
using namespace dilatone::testing;
using TK = AttachTarget::Kind;
using SK = AttachSource::Kind;

namespace {

/// Two holed tori with their boundary sides on the two extremities of one
/// edge of type C.
ExoticSurface two_tori_on_a_c_edge()
{
    SurfaceSpec sp;
    sp.polygons = {holed_pentagon(1), holed_pentagon(-1)};
    for (int p : {0, 1}) {
        sp.pairings.push_back({{p, 0}, {p, 2}});
        sp.pairings.push_back({{p, 1}, {p, 3}});
        sp.boundary.push_back({p, 4});
    }
    sp.multi_component = true;
    ExoticSurface x;
    x.core = DilationSurface::from_spec(sp);
    x.edges.push_back({ExoticEdge::Kind::C, Direction(1, 0), Direction(-1, 0)});
    AttachTarget e1{TK::EdgeExtremity, 0, 1, {}, {}, {}};
    AttachTarget e0{TK::EdgeExtremity, 0, 0, {}, {}, {}};
    x.attachments.push_back({{SK::CoreBoundary, {0, 4}, 0, 0}, e1});
    x.attachments.push_back({{SK::CoreBoundary, {1, 4}, 0, 0}, e0});
    return x;
}

void expect_same(const ExoticSurface& a, const ExoticSurface& b)
{
    ASSERT_EQ(a.core.has_value(), b.core.has_value());
    if (a.core) {
        EXPECT_EQ(a.core->spec().polygons, b.core->spec().polygons);
    }
    ASSERT_EQ(a.edges.size(), b.edges.size());
    for (std::size_t e = 0; e < a.edges.size(); ++e) {
        EXPECT_EQ(a.edges[e].theta12, b.edges[e].theta12);
        EXPECT_EQ(a.edges[e].kind, b.edges[e].kind);
    }
    ASSERT_EQ(a.holes.size(), b.holes.size());
    for (std::size_t h = 0; h < a.holes.size(); ++h) EXPECT_EQ(a.holes[h].theta, b.holes[h].theta);
    ASSERT_EQ(a.attachments.size(), b.attachments.size());
    for (std::size_t k = 0; k < a.attachments.size(); ++k) EXPECT_EQ(a.attachments[k].target, b.attachments[k].target);
}

}  // namespace

TEST(Exotic, ValidatesAClosedSurface)
{
    auto x = two_tori_on_a_c_edge();
    auto v = validate_exotic(x);
    EXPECT_TRUE(v.ok()) << (v.ok() ? "" : v.report.violations.front());
    EXPECT_TRUE(v.closed);
}

TEST(Exotic, ValidationRejects)
{
    auto bad_theta = two_tori_on_a_c_edge();
    bad_theta.edges[0].theta21 = Direction(0, 1);
    EXPECT_FALSE(validate_exotic(bad_theta).ok());

    // the outer directions of side 4 of the first torus exclude (1, 0)
    auto inward = two_tori_on_a_c_edge();
    inward.attachments[0].target.extremity = 0;
    EXPECT_FALSE(validate_exotic(inward).ok());

    auto twice = two_tori_on_a_c_edge();
    twice.attachments.push_back(twice.attachments[0]);
    EXPECT_FALSE(validate_exotic(twice).ok());

    auto c_side = two_tori_on_a_c_edge();
    c_side.attachments.push_back({{SK::EdgeSide, {}, 0, 0}, {TK::EdgeExtremity, 0, 1, {}, {}, {}}});
    EXPECT_FALSE(validate_exotic(c_side).ok());

    auto unused_hole = two_tori_on_a_c_edge();
    unused_hole.holes.push_back({Direction(1, 0), true});
    auto v = validate_exotic(unused_hole);
    EXPECT_TRUE(v.ok());
    EXPECT_FALSE(v.closed);

    auto hole_from_edge = unused_hole;
    hole_from_edge.edges.push_back({ExoticEdge::Kind::T, Direction(0, 1), Direction(0, -1)});
    hole_from_edge.attachments.push_back({{SK::EdgeSide, {}, 1, 0}, {TK::HoleEntry, 0, 0, {}, {}, {}}});
    EXPECT_FALSE(validate_exotic(hole_from_edge).ok());

    auto open = two_tori_on_a_c_edge();
    open.attachments.pop_back();
    EXPECT_TRUE(validate_exotic(open).ok());
    EXPECT_FALSE(validate_exotic(open).closed);

    // interior attachment points come from edge sides only
    auto interior = two_tori_on_a_c_edge();
    interior.attachments[0].target = {TK::CorePoint, 0, 0, {0, 0}, Point(frac(1, 2), frac(1, 2)), {}};
    EXPECT_FALSE(validate_exotic(interior).ok());
}

TEST(Exotic, PseudoTracesEndOnTheCEdge)
{
    auto x = two_tori_on_a_c_edge();
    // heading down-left from inside the first torus reaches side 4
    auto t = trace_pseudo(x, 0, Point(frac(-1, 2), frac(3, 4)), Direction(1, -2), 100);
    EXPECT_EQ(t.kind, PseudoKind::HitEdgeC);
    ASSERT_TRUE(t.edge_c.has_value());
    EXPECT_EQ(*t.edge_c, 0);
    // horizontal leaves stay in the torus
    auto h = trace_pseudo(x, 0, Point(frac(1, 2), frac(3, 4)), Direction(1, 0), 100);
    EXPECT_NE(h.kind, PseudoKind::HitEdgeC);
    EXPECT_NE(h.kind, PseudoKind::EnteredHole);
}

TEST(Exotic, PseudoTraceEntersAHole)
{
    auto r = reduce(cyclic_type1().prelimit());
    ASSERT_EQ(r.surface.holes.size(), 1u);
    auto t = trace_pseudo(r.surface, 0, Point(frac(1, 4), frac(1, 4)), Direction(-1, -3), 100);
    EXPECT_EQ(t.kind, PseudoKind::EnteredHole);
    ASSERT_TRUE(t.hole.has_value());
    EXPECT_EQ(*t.hole, 0);
}

TEST(Exotic, CylindersOfTheCEdge)
{
    auto cs = exotic_cylinders(two_tori_on_a_c_edge(), Direction(1, 0));
    auto c = std::find_if(cs.begin(), cs.end(), [](const auto& e) { return e.kind == ExoticCylinder::Kind::EdgeC; });
    ASSERT_NE(c, cs.end());
    ASSERT_TRUE(c->modulus.has_value());
    EXPECT_TRUE(std::isinf(*c->modulus));
}

TEST(Exotic, LinearActionIsAGroupAction)
{
    Sl2Matrix A(2, 1, 1, 1), B(1, frac(1, 3), 0, 1);
    for (auto x : {two_tori_on_a_c_edge(), reduce(cyclic_type1().prelimit()).surface}) {
        expect_same(apply_sl2(A, apply_sl2(B, x)), apply_sl2(A * B, x));
        expect_same(apply_sl2(Sl2Matrix{}, x), x);
        auto y = apply_sl2(A, x);
        for (const auto& e : y.edges) EXPECT_EQ(e.theta21, e.theta12.opposite());
        EXPECT_TRUE(validate_exotic(y).ok());
    }
}

TEST(Exotic, PseudoItinerariesAreEquivariant)
{
    auto x = two_tori_on_a_c_edge();
    Sl2Matrix A(2, 0, 0, frac(1, 2));
    auto y = apply_sl2(A, x);
    Point p(frac(-1, 2), frac(3, 4));
    for (auto d : {Direction(1, -2), Direction(3, 1), Direction(-1, -5)}) {
        auto a = trace_pseudo(x, 0, p, d, 60);
        auto b = trace_pseudo(y, 0, A(p), apply_sl2(A, d), 60);
        EXPECT_EQ(a.kind, b.kind);
        ASSERT_EQ(a.steps.size(), b.steps.size());
        for (std::size_t k = 0; k < a.steps.size(); ++k) {
            EXPECT_EQ(a.steps[k].kind, b.steps[k].kind);
            EXPECT_EQ(a.steps[k].side, b.steps[k].side);
            EXPECT_EQ(a.steps[k].index, b.steps[k].index);
        }
    }
}

TEST(Limit, TwoToriReduceToACEdge)
{
    auto L = two_tori_c_edge().prelimit();
    EXPECT_TRUE(L.source_closed);
    auto r = reduce(L);
    EXPECT_TRUE(r.audit.ok()) << (r.audit.violations.empty() ? "" : r.audit.violations.front());
    ASSERT_EQ(r.surface.edges.size(), 1u);
    EXPECT_EQ(r.surface.edges[0].kind, ExoticEdge::Kind::C);
    EXPECT_TRUE(r.surface.holes.empty());
    EXPECT_EQ(r.components, 2);
    EXPECT_TRUE(validate_exotic(r.surface).closed);
    auto lem = check_limit_lemmas(L, r.surface);
    EXPECT_TRUE(lem.ok());
    // the boundary sides land on opposite extremities
    std::set<int> ext;
    for (const auto& a : r.surface.attachments) {
        EXPECT_EQ(a.target.kind, TK::EdgeExtremity);
        ext.insert(a.target.extremity);
    }
    EXPECT_EQ(ext, (std::set<int>{0, 1}));
}

TEST(Limit, CyclicTypeOneGivesAHole)
{
    auto L = cyclic_type1().prelimit();
    auto r = reduce(L);
    EXPECT_TRUE(r.audit.ok()) << (r.audit.violations.empty() ? "" : r.audit.violations.front());
    EXPECT_EQ(r.surface.holes.size(), 1u);
    EXPECT_TRUE(r.surface.edges.empty());
    EXPECT_EQ(r.surface.attachments.size(), 3u);
    for (const auto& a : r.surface.attachments) EXPECT_EQ(a.target.kind, TK::HoleEntry);
    EXPECT_TRUE(check_limit_lemmas(L, r.surface).ok());
    EXPECT_TRUE(validate_exotic(r.surface).closed);
}

TEST(Limit, CycleGivesAHoleAndTwoTori)
{
    auto L = tori_and_hole().prelimit();
    auto r = reduce(L);
    EXPECT_TRUE(r.audit.ok()) << (r.audit.violations.empty() ? "" : r.audit.violations.front());
    EXPECT_EQ(r.surface.holes.size(), 1u);
    EXPECT_EQ(r.components, 2);
    EXPECT_TRUE(check_limit_lemmas(L, r.surface).ok());
}

TEST(Limit, EdgeOnAPolygonIsRemoved)
{
    auto L = edge_on_polygon().prelimit();
    auto r = reduce(L);
    EXPECT_TRUE(r.audit.ok()) << (r.audit.violations.empty() ? "" : r.audit.violations.front());
    EXPECT_TRUE(r.surface.edges.empty());
    ASSERT_TRUE(r.surface.core.has_value());
    EXPECT_EQ(r.surface.core->genus(), 1);
    EXPECT_TRUE(r.surface.core->spec().boundary.empty());
    EXPECT_TRUE(check_limit_lemmas(L, r.surface).ok());
}

TEST(Limit, SubdividesAPolygonSide)
{
    auto L = subdivided_square().prelimit();
    EXPECT_FALSE(L.source_closed);
    auto r = reduce(L);
    EXPECT_TRUE(r.audit.ok()) << (r.audit.violations.empty() ? "" : r.audit.violations.front());
    ASSERT_TRUE(r.surface.core.has_value());
    const auto& sp = r.surface.core->spec();
    EXPECT_EQ(sp.polygons.size(), 3u);
    ASSERT_EQ(sp.boundary.size(), 1u);
    // the open half of the bottom side
    const auto& b = sp.boundary[0];
    EXPECT_EQ(sp.polygons[static_cast<std::size_t>(b.polygon)].side_vector(b.side), Vector(1, 0));
    EXPECT_TRUE(check_limit_lemmas(L, r.surface).ok());
}

TEST(Limit, ReductionAudits)
{
    for (auto f : {two_tori_c_edge(), cyclic_type1(), tori_and_hole(), edge_on_polygon(), subdivided_square()}) {
        auto r = reduce(f.prelimit());
        EXPECT_FALSE(r.audit.placeholders_left);
        EXPECT_FALSE(r.audit.edge_polygon_gluings);
        EXPECT_FALSE(r.audit.extremity_gluings);
        EXPECT_FALSE(r.log.empty());
    }
}

TEST(Limit, AssemblyErrors)
{
    auto f = two_tori_c_edge();
    f.faces[2].label.kind = LK::Unclassified;
    EXPECT_THROW(f.prelimit(), DomainError);
    auto g = two_tori_c_edge();
    g.faces[2].label.long_sides = {0, 0};
    EXPECT_THROW(g.prelimit(), DomainError);
    auto h = two_tori_c_edge();
    h.pair(0, 0, 1, 0);
    EXPECT_THROW(h.prelimit(), DomainError);
    // a placeholder with its long side open has nowhere to go
    FaceSet lone;
    lone.faces = {{flat_triangle({1, 0}), label(LK::Type1, {0})}};
    EXPECT_THROW(reduce(lone.prelimit()), DomainError);
}

TEST(Limit, FromAFlow)
{
    auto tr = track(load("l_shape_genus2"), {FlowTime::log_of(16), FlowTime::log_of(64), FlowTime::log_of(256)});
    ASSERT_FALSE(tr.truncated) << tr.diagnostic;
    auto L = assemble_prelimit(tr);
    EXPECT_TRUE(L.source_closed);
    auto r = reduce(L);
    EXPECT_TRUE(r.audit.ok()) << (r.audit.violations.empty() ? "" : r.audit.violations.front());
    EXPECT_TRUE(check_limit_lemmas(L, r.surface).ok());
    // both flat cylinders of the L collapse into loops of slivers
    EXPECT_EQ(std::count_if(r.surface.edges.begin(), r.surface.edges.end(), [](const auto& e) { return e.kind == ExoticEdge::Kind::C; }), 2);
}
