#include "support.hpp"

#include <dilatone/aiet.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace dilatone;
using dilatone::testing::load;

namespace {

Aiet rotation(const Scalar& a)
{
    if (sgn(a) == 0) return Aiet({0, 1}, {1}, {0});
    return Aiet({0, 1 - a, 1}, {1, 1}, {a, a - 1});
}

Aiet two_branch() { return Aiet({0, frac(1, 3), 1}, {2, frac(1, 2)}, {frac(1, 3), frac(-1, 6)}); }

Aiet random_aiet(unsigned seed, int k)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<long> w(1, 9);
    std::vector<Scalar> len, img;
    Scalar sl = 0, si = 0;
    for (int i = 0; i < k; ++i) {
        len.emplace_back(w(rng));
        img.emplace_back(w(rng));
        sl += len.back();
        si += img.back();
    }
    for (auto& l : len) l /= sl;
    for (auto& l : img) l /= si;
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = k - 1 - i;
    std::shuffle(order.begin(), order.end(), rng);
    return Aiet::from_lengths(len, img, order);
}

}  // namespace

TEST(Aiet, Evaluate)
{
    EXPECT_EQ(rotation(frac(1, 3))(frac(1, 2)), frac(5, 6));
    EXPECT_EQ(two_branch()(0), frac(1, 3));
    // right-continuity at the breakpoint
    EXPECT_EQ(two_branch()(frac(1, 3)), 0);
    EXPECT_THROW(Aiet({0, 1}, {2}, {0}), DomainError);
    EXPECT_THROW(Aiet({0, frac(1, 2), 1}, {1, 1}, {0, -frac(1, 4)}), DomainError);
}

TEST(Aiet, FamilyMember)
{
    AietFamily F{rotation(frac(1, 5))};
    auto m = F.member(frac(2, 3));
    // rotation by 1/5 + 2/3 = 13/15
    for (auto x : {Scalar(0), frac(1, 7), frac(1, 2), frac(9, 10)}) {
        Scalar y = x + frac(13, 15);
        if (y >= 1) y -= 1;
        EXPECT_EQ(m(x), y);
    }
    auto m0 = F.member(0);
    for (auto x : {Scalar(0), frac(1, 7), frac(9, 10)}) EXPECT_EQ(m0(x), F.base(x));
}

TEST(Aiet, BijectiveOffBreakpoints)
{
    for (unsigned seed : {1u, 2u, 3u}) {
        Aiet T = random_aiet(seed, 3 + static_cast<int>(seed));
        std::mt19937 rng(seed);
        std::uniform_int_distribution<long> u(0, 999999);
        for (int i = 0; i < 10000; ++i) {
            Scalar x = frac(u(rng), 1000000);
            EXPECT_EQ(T.inverse(T(x)), x);
        }
    }
}

TEST(PeriodicPoints, SingleBranchContraction)
{
    std::vector<AffineBranch> f{{0, 1, frac(1, 2), frac(1, 4)}};
    auto r = periodic_points(f, 5);
    ASSERT_EQ(r.points.size(), 1u);
    EXPECT_EQ(r.points[0].x, frac(1, 2));
    EXPECT_EQ(r.points[0].multiplier, frac(1, 2));
    EXPECT_EQ(r.points[0].period, 1);
}

TEST(PeriodicPoints, RotationByAThird)
{
    auto r = periodic_points(rotation(frac(1, 3)), 3);
    EXPECT_TRUE(r.points.empty());
    ASSERT_EQ(r.families.size(), 1u);
    EXPECT_EQ(r.families[0].lo, 0);
    EXPECT_EQ(r.families[0].hi, 1);
    EXPECT_EQ(r.families[0].period, 3);
}

TEST(PeriodicPoints, TwoBranchAgainstBruteForce)
{
    Aiet T = two_branch();
    auto r = periodic_points(T, 2);
    // oracle: iterate at 10^6 grid points and record which have T^2 x = x exactly
    std::size_t fixed2 = 0, fixed1 = 0;
    const long N = 1000000;
    for (long k = 0; k < N; ++k) {
        Scalar x = frac(k, N);
        Scalar y = T(x);
        if (y == x) ++fixed1;
        if (T(y) == x) ++fixed2;
    }
    EXPECT_EQ(fixed1, 0u);
    EXPECT_EQ(fixed2, static_cast<std::size_t>(N));
    EXPECT_TRUE(r.points.empty());
    ASSERT_EQ(r.families.size(), 1u);
    EXPECT_EQ(r.families[0].period, 2);
    EXPECT_EQ(r.families[0].lo, 0);
    EXPECT_EQ(r.families[0].hi, 1);
}

TEST(PeriodicPoints, ReverifyByIteration)
{
    for (unsigned seed = 10; seed < 20; ++seed) {
        Aiet T = random_aiet(seed, 3);
        auto r = periodic_points(T, 12);
        for (const auto& p : r.points) {
            Scalar x = p.x, mult = 1;
            for (int i = 0; i < p.period; ++i) {
                std::size_t k = T.interval_of(x);
                EXPECT_EQ(static_cast<int>(k), p.itinerary[static_cast<std::size_t>(i)]);
                mult *= T.slopes()[k];
                x = T(x);
                if (i + 1 < p.period) {
                    EXPECT_NE(x, p.x);
                }
            }
            EXPECT_EQ(x, p.x);
            EXPECT_EQ(mult, p.multiplier);
        }
        for (const auto& f : r.families) {
            Scalar x = (f.lo + f.hi) / 2;
            for (int i = 0; i < f.period; ++i) x = T(x);
            EXPECT_EQ(x, (f.lo + f.hi) / 2);
        }
    }
}

TEST(PeriodicPoints, FromReturnMap)
{
    auto s = load("square_torus");
    auto id = from_return_map(return_map(s, {0, 0}, Direction(0, 1)));
    EXPECT_TRUE(id.is_isometric());
    EXPECT_EQ(id.size(), 1u);
    auto rot = from_return_map(return_map(s, {0, 0}, Direction(frac(2, 5), 1)));
    EXPECT_EQ(rot(frac(1, 10)), frac(1, 2));
    auto fam = periodic_points(rot, 5);
    ASSERT_EQ(fam.families.size(), 1u);
    EXPECT_EQ(fam.families[0].period, 5);

    // the cylinder's return map restricted to its returning branch, then the fixed point
    auto cyl = build_dilation_cylinder(std::numbers::pi / 2, 2);
    auto m = return_map(cyl, {0, 1}, Direction(-1, -1));
    EXPECT_THROW(from_return_map(m), DomainError);
    std::vector<AffineBranch> bs;
    for (const auto& b : m.branches)
        if (b.kind == ReturnBranch::Kind::Resolved) bs.push_back({b.lo, b.hi, b.slope, b.offset});
    auto pts = periodic_points(bs, 4);
    ASSERT_EQ(pts.points.size(), 1u);
    EXPECT_EQ(pts.points[0].x, frac(1, 2));
    EXPECT_EQ(pts.points[0].multiplier, 2);

    // evaluation commutes with retracing on branch midpoints
    auto d = load("dilation_torus");
    auto rm = return_map(d, {0, 0}, Direction(1, 3), 500);
    if (rm.resolved()) {
        Aiet T = from_return_map(rm);
        for (const auto& b : rm.branches) {
            Scalar u = (b.lo + b.hi) / 2;
            EXPECT_EQ(T(u), b.apply(u));
        }
    }
}

TEST(DensitySweep, IdentityBase)
{
    AietFamily F{rotation(0)};
    auto r = density_sweep(F, frac(1, 1000), frac(1, 10), 64, default_workers());
    EXPECT_EQ(r.windows_covered, r.windows);
    EXPECT_LT(r.largest_empty, frac(1, 10));
}

TEST(DensitySweep, TwoBranchFamily)
{
    AietFamily F{two_branch()};
    auto r = density_sweep(F, frac(1, 100), frac(1, 10), 64, default_workers());
    EXPECT_EQ(r.windows_covered, r.windows);
}
