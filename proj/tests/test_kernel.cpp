#include "support.hpp"

#include <gtest/gtest.h>

using namespace dilatone;
using dilatone::testing::RationalGen;
using dilatone::testing::det_cofactor;

namespace {

Point P(const char* x, const char* y) { return {parse_scalar(x), parse_scalar(y)}; }

int lifted_incircle_sign(const Point& a, const Point& b, const Point& c, const Point& d)
{
    auto row = [](const Point& p) { return std::vector<Scalar>{p.x, p.y, p.x * p.x + p.y * p.y, Scalar(1)}; };
    // for counterclockwise (a, b, c) the lifted determinant is positive iff d is inside
    int o = sgn(det_cofactor({{a.x, a.y, Scalar(1)}, {b.x, b.y, Scalar(1)}, {c.x, c.y, Scalar(1)}}));
    return o * sgn(det_cofactor({row(a), row(b), row(c), row(d)}));
}

}  // namespace

TEST(Orient2d, Examples)
{
    EXPECT_EQ(orient2d({0, 0}, {1, 0}, {0, 1}), 1);
    EXPECT_EQ(orient2d({0, 0}, {1, 0}, {2, 0}), 0);
    EXPECT_EQ(orient2d({0, 0}, {0, 1}, {1, 0}), -1);
}

TEST(Incircle, Examples)
{
    EXPECT_EQ(incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}), 0);
    EXPECT_EQ(incircle({0, 0}, {2, 0}, {0, 2}, P("1/2", "1/2")), 1);
    EXPECT_EQ(incircle({0, 0}, {1, 0}, {0, 1}, {2, 2}), -1);
    EXPECT_THROW(incircle({0, 0}, {1, 0}, {2, 0}, {5, 5}), DomainError);
}

TEST(Circumcircle, Examples)
{
    auto c = circumcircle({0, 0}, {1, 0}, {0, 1});
    EXPECT_EQ(c.center, P("1/2", "1/2"));
    EXPECT_EQ(c.radius2, Scalar(1, 2));
    c = circumcircle({0, 0}, {2, 0}, {1, 1});
    EXPECT_EQ(c.center, Point(1, 0));
    EXPECT_EQ(c.radius2, 1);
    c = circumcircle({0, 0}, {1, 0}, {Scalar(1, 2), Scalar(10)});
    EXPECT_EQ(c.center.x, Scalar(1, 2));
    EXPECT_THROW(circumcircle({0, 0}, {1, 1}, {2, 2}), DomainError);
}

TEST(DilationMapTest, Examples)
{
    DilationMap m(2, {1, 0});
    EXPECT_EQ(m({0, 0}), Point(1, 0));
    auto inv = invert(m);
    EXPECT_EQ(inv.a, Scalar(1, 2));
    EXPECT_EQ(inv.b, P("-1/2", "0"));
    EXPECT_TRUE(compose(m, inv).is_identity());
    EXPECT_THROW(DilationMap(0, {0, 0}), DomainError);
    EXPECT_THROW(DilationMap(-1, {0, 0}), DomainError);
}

TEST(RayHitsSegment, Examples)
{
    auto h = ray_hits_segment({0, 0}, Direction(1, 1), {1, 0}, {1, 2});
    ASSERT_TRUE(h);
    EXPECT_EQ(h->point, Point(1, 1));
    EXPECT_EQ(h->endpoint, -1);
    EXPECT_FALSE(ray_hits_segment({0, 0}, Direction(1, 0), {2, 1}, {2, 2}));
    h = ray_hits_segment({0, 0}, Direction(0, 1), {-1, 3}, {1, 3});
    ASSERT_TRUE(h);
    EXPECT_EQ(h->point, Point(0, 3));
    EXPECT_EQ(h->endpoint, -1);
    h = ray_hits_segment({0, 0}, Direction(1, 1), {1, 1}, {3, 0});
    ASSERT_TRUE(h);
    EXPECT_EQ(h->endpoint, 0);
    EXPECT_THROW(ray_hits_segment({0, 0}, Direction(1, 0), {2, 0}, {3, 0}), DomainError);
}

TEST(Kernel, ParseAndFormat)
{
    EXPECT_EQ(parse_scalar("6/4"), Scalar(3, 2));
    EXPECT_EQ(parse_scalar("-0.25"), Scalar(-1, 4));
    EXPECT_EQ(parse_scalar("1e-3"), Scalar(1, 1000));
    EXPECT_EQ(format_scalar(Scalar(3, 2)), "3/2");
    EXPECT_THROW(parse_scalar("1/0"), DomainError);
    EXPECT_THROW(parse_scalar("abc"), DomainError);
    EXPECT_EQ(*exact_sqrt(Scalar(9, 4)), Scalar(3, 2));
    EXPECT_FALSE(exact_sqrt(Scalar(2)));
}

TEST(Kernel, DirectionsAndArcs)
{
    EXPECT_EQ(Direction(2, 4), Direction(1, 2));
    EXPECT_NE(Direction(1, 2), Direction(-1, -2));
    EXPECT_THROW(Direction(0, 0), DomainError);
    EXPECT_TRUE(in_ccw_arc({1, 1}, {1, 0}, {0, 1}));
    EXPECT_FALSE(in_ccw_arc({1, -1}, {1, 0}, {0, 1}));
    EXPECT_TRUE(in_ccw_arc({0, 1}, {1, 0}, {0, 1}));
    EXPECT_TRUE(in_ccw_arc({0, -1}, {0, 1}, {1, 0}));  // reflex arc
    Vector m = direction_between({1, 0}, {0, 1});
    EXPECT_GT(sgn(cross({1, 0}, m)), 0);
    EXPECT_GT(sgn(cross(m, {0, 1})), 0);
    m = direction_between({1, 0}, {1, -1});  // reflex
    EXPECT_TRUE(in_ccw_arc(m, {1, 0}, {1, -1}));
    EXPECT_EQ(*exact_half_tan({1, 0}, {0, 1}), 1);
}

TEST(KernelProperty, PredicatesAgreeWithDeterminants)
{
    RationalGen gen(12345);
    for (int i = 0; i < 2000; ++i) {
        Point a = gen.point(), b = gen.point(), c = gen.point(), d = gen.point();
        int o = orient2d(a, b, c);
        EXPECT_EQ(o, sgn(det_cofactor({{a.x, a.y, Scalar(1)}, {b.x, b.y, Scalar(1)}, {c.x, c.y, Scalar(1)}})));
        if (o == 0) continue;
        EXPECT_EQ(incircle(a, b, c, d), lifted_incircle_sign(a, b, c, d));
        auto circ = circumcircle(a, b, c);
        EXPECT_EQ(norm2(a - circ.center), circ.radius2);
        EXPECT_EQ(norm2(b - circ.center), circ.radius2);
        EXPECT_EQ(norm2(c - circ.center), circ.radius2);
    }
}

TEST(KernelProperty, DilationGroupLawsAndDirectionInvariance)
{
    RationalGen gen(777);
    auto rand_map = [&] {
        Scalar a;
        do a = abs(gen()); while (sgn(a) == 0);
        return DilationMap(a, gen.point());
    };
    for (int i = 0; i < 500; ++i) {
        DilationMap m1 = rand_map(), m2 = rand_map(), m3 = rand_map();
        Point p = gen.point();
        EXPECT_EQ(compose(compose(m1, m2), m3), compose(m1, compose(m2, m3)));
        EXPECT_EQ(compose(m1, m2)(p), m1(m2(p)));
        EXPECT_TRUE(compose(m1, invert(m1)).is_identity());
        EXPECT_TRUE(compose(invert(m1), m1).is_identity());
        EXPECT_EQ(compose(DilationMap(), m1), m1);
        Vector v = gen.point();
        if (is_zero(v)) continue;
        EXPECT_EQ(Direction(m1(p + v) - m1(p)), Direction(v));
    }
}
