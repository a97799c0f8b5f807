#include "medianshape/coreset1d.hpp"
#include "medianshape/errors.hpp"
#include "medianshape/levels.hpp"
#include "medianshape/testkit.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace medianshape;
using namespace medianshape::levels;

namespace {

PointSet random_sources(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<Eigen::Vector3d> pts;
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), 0.0);
    return PointSet(2, pts);
}

std::vector<double> sorted_values(const SurfaceFamily& fam, const std::vector<double>& base)
{
    std::vector<double> v(fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i) v[i] = fam.surface_value(i, base);
    std::sort(v.begin(), v.end());
    return v;
}

double direct_cost(const std::vector<double>& values, double h, bool squared)
{
    long double s = 0.0L;
    for (double v : values) {
        const long double d = static_cast<long double>(v) - h;
        s += squared ? d * d : std::fabs(d);
    }
    return static_cast<double>(s);
}

} // namespace

TEST(Select, MatchesSort)
{
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> small(0, 20);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> v(1 + rng() % 300);
        for (double& x : v) x = small(rng);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> ranks;
        for (std::size_t r = 0; r < v.size(); r += 1 + rng() % 17) ranks.push_back(r);
        std::vector<double> out(ranks.size());
        std::vector<double> work = v;
        multi_select(work, ranks, out);
        for (std::size_t j = 0; j < ranks.size(); ++j) EXPECT_EQ(out[j], sorted[ranks[j]]);
        work = v;
        const std::size_t r = rng() % v.size();
        EXPECT_EQ(select_rank(work, r), sorted[r]);
    }
}

TEST(LevelValue, TwoCones)
{
    const auto fam = SurfaceFamily::circle_cones(PointSet::from_rows({{0, 0}, {3, 0}}));
    const LevelQuery q{&fam, {0, 0}};
    EXPECT_DOUBLE_EQ(level_value(q, 0, Side::Bottom), 0.0);
    EXPECT_DOUBLE_EQ(level_value(q, 1, Side::Bottom), 3.0);
    EXPECT_DOUBLE_EQ(level_value(q, 0, Side::Top), 3.0);
    EXPECT_DOUBLE_EQ(extent(q, 0, 0), 3.0);
    EXPECT_THROW(level_value(q, 2, Side::Bottom), InputError);
    EXPECT_THROW(extent(q, 1, 1), InputError);
}

TEST(LevelValue, SingleMemberExtentIsZero)
{
    const auto fam = SurfaceFamily::circle_cones(PointSet::from_rows({{1, 2}}));
    EXPECT_EQ(extent(LevelQuery{&fam, {4, -1}}, 0, 0), 0.0);
}

TEST(LevelValue, MatchesSortOracle)
{
    const auto fam = SurfaceFamily::circle_cones(random_sources(200, 4));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int b = 0; b < 20; ++b) {
        const std::vector<double> base{u(rng), u(rng)};
        const auto sorted = sorted_values(fam, base);
        const LevelQuery q{&fam, base};
        for (std::size_t k = 0; k < 200; ++k) {
            ASSERT_EQ(level_value(q, k, Side::Bottom), sorted[k]);
            ASSERT_EQ(level_value(q, k, Side::Top), sorted[199 - k]);
        }
        for (std::size_t k = 0; k < 100; k += 9) {
            EXPECT_EQ(extent(q, k, k), sorted[199 - k] - sorted[k]);
        }
    }
}

TEST(LevelValue, MonotoneInDepth)
{
    const auto fam = SurfaceFamily::circle_cones(random_sources(120, 5));
    const LevelQuery q{&fam, {0.3, -0.8}};
    for (std::size_t k = 1; k < 120; ++k) {
        EXPECT_LE(level_value(q, k - 1, Side::Bottom), level_value(q, k, Side::Bottom));
    }
}

TEST(LevelValue, RespectsSubset)
{
    const auto fam = SurfaceFamily::stack({5, 1, 4, 2, 3});
    const std::vector<MemberIndex> subset{0, 2, 4};
    const LevelQuery q{&fam, {0}};
    EXPECT_EQ(level_value(q, 0, Side::Bottom, &subset), 3.0);
    EXPECT_EQ(level_value(q, 0, Side::Top, &subset), 5.0);
}

TEST(Gradation, SingleMember)
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Gradation g = build_gradation(1, seed);
        EXPECT_EQ(g.sample(0), std::vector<MemberIndex>{0});
        ASSERT_GE(g.levels(), 2U);
        EXPECT_LE(g.sample(1).size(), 1U);
    }
}

TEST(Gradation, NestedAndDeterministic)
{
    const Gradation a = build_gradation(5000, 17);
    const Gradation b = build_gradation(5000, 17);
    ASSERT_EQ(a.levels(), b.levels());
    EXPECT_LE(a.levels(), static_cast<std::size_t>(std::ceil(std::log2(5000.0))) + 2);
    for (std::size_t j = 0; j < a.levels(); ++j) {
        EXPECT_EQ(a.sample(j), b.sample(j));
        if (j > 0) {
            EXPECT_TRUE(std::includes(a.sample(j - 1).begin(), a.sample(j - 1).end(), a.sample(j).begin(),
                                      a.sample(j).end()));
        }
    }
}

TEST(Gradation, SampleSizesConcentrate)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Gradation g = build_gradation(1000, seed);
        for (std::size_t j = 0; j <= 5 && j < g.levels(); ++j) {
            const double mean = 1000.0 / std::ldexp(1.0, static_cast<int>(j));
            const double slack = 5.0 * std::sqrt(mean);
            EXPECT_GE(static_cast<double>(g.sample(j).size()), mean - slack);
            EXPECT_LE(static_cast<double>(g.sample(j).size()), mean + slack);
        }
    }
}

TEST(Plan, SmallInputIsExact)
{
    const Gradation g = build_gradation(40, 1);
    const LevelPlan plan = plan_levels(40, 0.5, g);
    EXPECT_TRUE(plan.exact());
    EXPECT_TRUE(plan.entries.empty());
    EXPECT_EQ(plan.accounted_weight(), 40);
}

TEST(Plan, SamplingRateFormula)
{
    const double c = 4.0;
    const double delta = 0.25 / 40.0;
    for (std::size_t n : {100U, 1000U, 100000U, 100000000U}) {
        const double k = n / 2.0;
        const double expect = std::min(2.0 * c * std::log(static_cast<double>(n)) / (delta * delta * n), 1.0);
        EXPECT_NEAR(sampling_rate(k, delta, n, c), expect, 1e-15);
    }
    EXPECT_EQ(sampling_rate(2500, delta, 5000, c), 1.0);
}

TEST(Plan, DepthsBoundedAndWeightsConserved)
{
    const double eps = 0.25;
    const double c = 4.0;
    const std::size_t n = 5000;
    const Gradation g = build_gradation(n, 3);
    const LevelPlan plan = plan_levels(n, eps, g, {c, 1.0});
    const double delta = eps / 40.0;
    const auto cap = static_cast<std::size_t>(
        std::ceil(c * (1.0 + eps / 20.0) * std::log(static_cast<double>(n)) / (delta * delta)));
    for (const auto& e : plan.entries) EXPECT_LE(e.depth, cap);
    EXPECT_EQ(plan.accounted_weight(), static_cast<std::int64_t>(n));

    for (std::size_t m : {999U, 20000U, 65537U}) {
        for (double ee : {0.5, 0.2}) {
            const Gradation gm = build_gradation(m, m);
            EXPECT_EQ(plan_levels(m, ee, gm, {0.01, 0.1}).accounted_weight(), static_cast<std::int64_t>(m));
        }
    }
}

TEST(Plan, RejectsBadArguments)
{
    const Gradation g = build_gradation(100, 0);
    EXPECT_THROW(plan_levels(100, 1.0, g), InputError);
    EXPECT_THROW(plan_levels(101, 0.5, g), InputError);
}

TEST(Reduced, ExactPlanMatchesFullCost)
{
    const auto fam = SurfaceFamily::circle_cones(random_sources(40, 1));
    const Gradation g = build_gradation(fam, 2);
    const LevelPlan plan = plan_levels(fam.size(), 0.5, g);
    ASSERT_TRUE(plan.exact());
    const ParamPoint p{{0.2, 0.1}, 2.0};
    EXPECT_NEAR(reduced_cost_l1(fam, g, plan, p), cost_l1(fam, p), 1e-12 * cost_l1(fam, p));
    EXPECT_NEAR(reduced_cost_l2(fam, g, plan, p), cost_l2(fam, p), 1e-12 * cost_l2(fam, p));
}

TEST(Reduced, StackMatchesCoresetWithSameChunks)
{
    // At this size every chunk is served by the full set, so the reduced family is a 1D
    // coreset whose representatives sit at the planned depths.
    const auto values = testkit::gen_values_1d(testkit::Distribution1D::Clustered, 3001, 12);
    const auto fam = SurfaceFamily::stack(values);
    const double eps = 0.5;
    const Gradation g = build_gradation(fam, 4);
    const LevelPlan plan = plan_levels(fam.size(), eps, g);
    const coreset1d::ChunkPartition chunks = coreset1d::build_chunks(values.size(), eps, plan.m);

    coreset1d::Coreset1D cs;
    cs.eps = eps;
    cs.source_n = values.size();
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < chunks.prefix(); ++i) {
        cs.left.push_back({values[i], 1});
        cs.right.push_back({values[n - 1 - i], 1});
    }
    std::size_t pair = chunks.prefix();
    for (const auto& e : plan.entries) {
        ASSERT_EQ(e.sample, 0U);
        if (e.side != Side::Bottom) continue;
        ASSERT_GE(e.depth, chunks.left(pair).begin);
        ASSERT_LT(e.depth, chunks.left(pair).end);
        ASSERT_EQ(e.weight, static_cast<std::int64_t>(chunks.pair_size(pair)));
        cs.left.push_back({values[e.depth], e.weight});
        cs.right.push_back({values[n - 1 - e.depth], e.weight});
        ++pair;
    }
    ASSERT_EQ(pair, chunks.pair_count());
    if (auto mid = chunks.middle()) cs.middle = WeightedValue{values[*mid], 1};
    const auto reps = cs.reps();

    for (double h : {values.front() - 1.0, values[700], values[1500], 50.0, values.back() + 3.0}) {
        const ParamPoint p{{0.0}, h};
        const double a = reduced_cost_l1(fam, g, plan, p);
        const double b = coreset1d::eval_weighted_l1(reps, h);
        EXPECT_NEAR(a, b, 1e-12 * b);
        EXPECT_NEAR(reduced_cost_l2(fam, g, plan, p), coreset1d::eval_weighted_l2(reps, h),
                    1e-12 * coreset1d::eval_weighted_l2(reps, h));
    }
}

TEST(Reduced, StalePlanIsRejected)
{
    const auto fam = SurfaceFamily::stack({1, 2, 3, 4});
    const auto other = SurfaceFamily::stack({1, 2, 3});
    const Gradation g = build_gradation(fam, 0);
    const LevelPlan plan = plan_levels(4, 0.5, g);
    EXPECT_THROW(ReducedModel(other, g, plan), InputError);
    const Gradation g2 = build_gradation(fam, 1);
    if (g2.levels() != g.levels() || g2.sample(1).size() != g.sample(1).size()) {
        EXPECT_THROW(ReducedModel(fam, g2, plan), InputError);
    }
}

TEST(Reduced, SampledLevelsStayWithinEps)
{
    // A small Chernoff constant forces real sampling at moderate n.
    const std::size_t n = 40000;
    const auto values = testkit::gen_values_1d(testkit::Distribution1D::Uniform, n, 77);
    const auto fam = SurfaceFamily::stack(values);
    const double eps = 0.2;
    int within = 0;
    int total = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Gradation g = build_gradation(fam, seed);
        const LevelPlan plan = plan_levels(n, eps, g, {0.002, 0.05});
        ASSERT_TRUE(std::any_of(plan.entries.begin(), plan.entries.end(),
                                [](const PlanEntry& e) { return e.sample > 0; }));
        EXPECT_EQ(plan.accounted_weight(), static_cast<std::int64_t>(n));
        for (double h = -0.2; h <= 1.2; h += 0.05) {
            const double exact = direct_cost(values, h, false);
            ++total;
            if (std::fabs(reduced_cost_l1(fam, g, plan, ParamPoint{{0.0}, h}) - exact) <= eps * exact) ++within;
        }
    }
    EXPECT_GE(within, total * 95 / 100);
}

TEST(Reduced, SandwichWithRealSampling)
{
    // Level k of a rate-zeta sample, taken at depth round(zeta k), lands between the
    // (1 - delta) k and (1 + delta) k levels of the full set.
    const std::size_t n = 20000;
    const double delta = 0.1;
    const double k = n / 4.0;
    int hits = 0;
    int trials = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto values = testkit::gen_values_1d(testkit::Distribution1D::Uniform, n, 1000 + seed);
        const auto fam = SurfaceFamily::stack(values);
        const Gradation g = build_gradation(fam, seed);
        const double zeta = sampling_rate(k, delta, n, 1.0);
        std::size_t j = 0;
        while (j + 1 < g.levels() && Gradation::rate(j + 1) >= zeta) ++j;
        ASSERT_GT(j, 0U);
        const auto depth = static_cast<std::size_t>(std::llround(k * Gradation::rate(j)));
        const double v = level_value(LevelQuery{&fam, {0.0}}, depth, Side::Bottom, &g.sample(j));
        ++trials;
        if (v >= values[static_cast<std::size_t>((1 - delta) * k)] && v <= values[static_cast<std::size_t>((1 + delta) * k)])
            ++hits;
    }
    EXPECT_GE(hits, trials * 95 / 100);
}

TEST(Reduced, Deterministic)
{
    const auto fam = SurfaceFamily::circle_cones(random_sources(3000, 8));
    const ParamPoint p{{0.5, 0.5}, 3.0};
    double first = 0.0;
    for (int r = 0; r < 2; ++r) {
        const Gradation g = build_gradation(fam, 42);
        const LevelPlan plan = plan_levels(fam.size(), 0.2, g, {0.01, 0.1});
        const double v = reduced_cost_l1(fam, g, plan, p);
        if (r == 0) first = v;
        else EXPECT_EQ(v, first);
    }
}

TEST(Bernoulli, RateAndDeterminism)
{
    const auto a = bernoulli_sample(100000, 0.25, 5);
    EXPECT_EQ(a, bernoulli_sample(100000, 0.25, 5));
    EXPECT_NEAR(static_cast<double>(a.size()), 25000.0, 5.0 * std::sqrt(25000.0 * 0.75));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}
