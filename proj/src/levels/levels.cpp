#include "medianshape/levels.hpp"

#include "medianshape/coreset1d.hpp"
#include "medianshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace medianshape::levels {

double select_rank(std::span<double> values, std::size_t rank)
{
    if (rank >= values.size()) {
        throw InputError("rank " + std::to_string(rank) + " out of range for " +
                         std::to_string(values.size()) + " values");
    }
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank), values.end());
    return values[rank];
}

namespace {

void multi_select_range(std::span<double> values, std::size_t lo, std::size_t hi,
                        std::span<const std::size_t> ranks, std::size_t rlo, std::size_t rhi,
                        std::span<double> out)
{
    if (rlo >= rhi) return;
    const std::size_t mid = rlo + (rhi - rlo) / 2;
    const std::size_t r = ranks[mid];
    auto first = values.begin();
    std::nth_element(first + static_cast<std::ptrdiff_t>(lo), first + static_cast<std::ptrdiff_t>(r),
                     first + static_cast<std::ptrdiff_t>(hi));
    std::size_t a = mid;
    while (a > rlo && ranks[a - 1] == r) --a;
    std::size_t b = mid + 1;
    while (b < rhi && ranks[b] == r) ++b;
    for (std::size_t t = a; t < b; ++t) out[t] = values[r];
    multi_select_range(values, lo, r, ranks, rlo, a, out);
    multi_select_range(values, r + 1, hi, ranks, b, rhi, out);
}

} // namespace

void multi_select(std::span<double> values, std::span<const std::size_t> ranks, std::span<double> out)
{
    if (out.size() != ranks.size()) throw InputError("multi_select: output size mismatch");
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] >= values.size()) throw InputError("multi_select: rank out of range");
        if (i > 0 && ranks[i] < ranks[i - 1]) throw InputError("multi_select: ranks not ascending");
    }
    multi_select_range(values, 0, values.size(), ranks, 0, ranks.size(), out);
}

namespace {

std::vector<double> active_values(const LevelQuery& q, const std::vector<MemberIndex>* subset)
{
    if (q.family == nullptr) throw InputError("level query without a family");
    std::vector<double> all(q.family->size());
    q.family->values_at(q.base, all);
    if (subset == nullptr) return all;
    std::vector<double> vals;
    vals.reserve(subset->size());
    for (MemberIndex i : *subset) {
        if (i >= all.size()) throw IndexError("subset member " + std::to_string(i) + " out of range");
        vals.push_back(all[i]);
    }
    return vals;
}

} // namespace

double level_value(const LevelQuery& q, std::size_t k, Side side, const std::vector<MemberIndex>* subset)
{
    std::vector<double> vals = active_values(q, subset);
    if (k >= vals.size()) {
        throw InputError("level " + std::to_string(k) + " out of range for " +
                         std::to_string(vals.size()) + " active surfaces");
    }
    const std::size_t rank = side == Side::Bottom ? k : vals.size() - 1 - k;
    return select_rank(vals, rank);
}

double extent(const LevelQuery& q, std::size_t k, std::size_t r)
{
    std::vector<double> vals = active_values(q, nullptr);
    const std::size_t n = vals.size();
    if (k >= n || r >= n || n - 1 - k < r) {
        throw InputError("extent: top level " + std::to_string(k) + " lies below bottom level " +
                         std::to_string(r) + " for " + std::to_string(n) + " surfaces");
    }
    const std::size_t ranks[2] = {r, n - 1 - k};
    double out[2];
    multi_select(vals, ranks, out);
    return out[1] - out[0];
}

Gradation::Gradation(std::size_t n, std::uint64_t seed, std::vector<std::vector<MemberIndex>> samples)
    : n_(n), seed_(seed), samples_(std::move(samples))
{
}

double Gradation::rate(std::size_t j)
{
    return std::ldexp(1.0, -static_cast<int>(j));
}

namespace {

class CoinFlipper {
public:
    explicit CoinFlipper(std::uint64_t seed) : rng_(seed) {}

    bool flip()
    {
        if (bits_left_ == 0) {
            word_ = rng_();
            bits_left_ = 64;
        }
        const bool heads = (word_ & 1U) != 0;
        word_ >>= 1U;
        --bits_left_;
        return heads;
    }

private:
    std::mt19937_64 rng_;
    std::uint64_t word_ = 0;
    int bits_left_ = 0;
};

} // namespace

Gradation build_gradation(std::size_t n, std::uint64_t seed)
{
    if (n == 0) throw InputError("build_gradation: empty family");
    const auto last = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;

    std::vector<std::vector<MemberIndex>> samples;
    samples.reserve(last + 1);
    std::vector<MemberIndex> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<MemberIndex>(i);
    samples.push_back(std::move(all));

    CoinFlipper coin(seed);
    for (std::size_t j = 1; j <= last && !samples.back().empty(); ++j) {
        const auto& prev = samples.back();
        std::vector<MemberIndex> next;
        next.reserve(prev.size() / 2 + 16);
        for (MemberIndex i : prev) {
            if (coin.flip()) next.push_back(i);
        }
        samples.push_back(std::move(next));
    }
    return Gradation(n, seed, std::move(samples));
}

Gradation build_gradation(const SurfaceFamily& family, std::uint64_t seed)
{
    return build_gradation(family.size(), seed);
}

std::int64_t LevelPlan::accounted_weight() const
{
    std::int64_t w = 2 * static_cast<std::int64_t>(prefix);
    for (const auto& e : entries) w += e.weight;
    if (middle_depth) w += 1;
    return w;
}

bool LevelPlan::exact() const
{
    return std::all_of(entries.begin(), entries.end(),
                       [](const PlanEntry& e) { return e.sample == 0 && e.weight == 1; });
}

std::size_t plan_prefix(std::size_t n, double eps, double m_c)
{
    const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
    const double linear = std::ceil(10.0 / eps - 1e-12);
    const double logarithmic = std::ceil(m_c * ln_n / (eps * eps) - 1e-12);
    return static_cast<std::size_t>(std::max({linear, logarithmic, 1.0}));
}

double sampling_rate(double k, double delta, std::size_t n, double c)
{
    if (k <= 0.0) return 1.0;
    const double ln_n = std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
    return std::min(c * ln_n / (k * delta * delta), 1.0);
}

LevelPlan plan_levels(std::size_t n, double eps, const Gradation& gradation, PlanSettings settings)
{
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("plan_levels: eps must lie in (0, 1)");
    if (gradation.n() != n) {
        throw InputError("plan_levels: gradation built over " + std::to_string(gradation.n()) +
                         " members, expected " + std::to_string(n));
    }
    if (!(settings.chernoff_c > 0.0) || !(settings.m_c > 0.0)) {
        throw InputError("plan_levels: chernoff_c and m_c must be positive");
    }

    LevelPlan plan;
    plan.n = n;
    plan.eps = eps;
    plan.m = plan_prefix(n, eps, settings.m_c);
    for (std::size_t j = 0; j < gradation.levels(); ++j) plan.sample_sizes.push_back(gradation.sample(j).size());

    const coreset1d::ChunkPartition chunks = coreset1d::build_chunks(n, eps, plan.m);
    plan.prefix = chunks.prefix();
    plan.middle_depth = chunks.middle();

    const double delta = eps / 40.0;
    for (std::size_t i = chunks.prefix(); i < chunks.pair_count(); ++i) {
        const auto before = static_cast<double>(chunks.alpha_before(i));
        const double k = (1.0 + eps / 20.0) * before;
        const double zeta = sampling_rate(k, delta, n, settings.chernoff_c);

        std::size_t j = 0;
        while (j + 1 < gradation.levels() && Gradation::rate(j + 1) >= zeta &&
               !gradation.sample(j + 1).empty()) {
            ++j;
        }
        const std::size_t size = gradation.sample(j).size();
        auto depth = static_cast<std::size_t>(std::llround(k * Gradation::rate(j)));
        if (j == 0) {
            depth = std::clamp(depth, chunks.alpha_before(i), chunks.alpha(i) - 1);
        } else {
            depth = std::min(depth, size - 1);
        }
        const auto w = static_cast<std::int64_t>(chunks.pair_size(i));
        plan.entries.push_back({Side::Bottom, j, depth, w});
        plan.entries.push_back({Side::Top, j, depth, w});
    }
    return plan;
}

ReducedModel::ReducedModel(const SurfaceFamily& family, const Gradation& gradation, const LevelPlan& plan)
    : family_(&family), gradation_(&gradation)
{
    if (plan.n != family.size() || gradation.n() != family.size()) {
        throw InputError("reduced model: plan/gradation built for " + std::to_string(plan.n) + "/" +
                         std::to_string(gradation.n()) + " members, family has " +
                         std::to_string(family.size()));
    }
    if (plan.sample_sizes.size() != gradation.levels()) {
        throw InputError("reduced model: plan was built for a different gradation");
    }
    for (std::size_t j = 0; j < gradation.levels(); ++j) {
        if (plan.sample_sizes[j] != gradation.sample(j).size()) {
            throw InputError("reduced model: plan was built for a different gradation");
        }
    }

    // Collect (sample, rank, weight) requests, then group by sample.
    struct Request {
        std::size_t sample;
        std::size_t rank;
        std::int64_t weight;
    };
    std::vector<Request> requests;
    const std::size_t n = family.size();
    for (std::size_t t = 0; t < plan.prefix; ++t) {
        requests.push_back({0, t, 1});
        requests.push_back({0, n - 1 - t, 1});
    }
    for (const auto& e : plan.entries) {
        if (e.sample >= gradation.levels()) throw InputError("reduced model: plan references a missing sample");
        const std::size_t size = gradation.sample(e.sample).size();
        if (e.depth >= size) throw InputError("reduced model: plan depth exceeds sample size");
        requests.push_back({e.sample, e.side == Side::Bottom ? e.depth : size - 1 - e.depth, e.weight});
    }
    if (plan.middle_depth) requests.push_back({0, *plan.middle_depth, 1});

    std::map<std::size_t, std::vector<std::size_t>> by_sample;
    for (std::size_t s = 0; s < requests.size(); ++s) by_sample[requests[s].sample].push_back(s);
    for (auto& [sample, slots] : by_sample) {
        SampleGroup g;
        g.sample = sample;
        for (std::size_t s : slots) g.ranks.push_back(requests[s].rank);
        std::sort(g.ranks.begin(), g.ranks.end());
        g.ranks.erase(std::unique(g.ranks.begin(), g.ranks.end()), g.ranks.end());
        for (std::size_t s : slots) {
            const auto it = std::lower_bound(g.ranks.begin(), g.ranks.end(), requests[s].rank);
            g.slots.push_back({s, static_cast<std::size_t>(it - g.ranks.begin()), requests[s].weight});
        }
        groups_.push_back(std::move(g));
    }
    slot_count_ = requests.size();
    for (const auto& r : requests) total_weight_ += r.weight;
}

void ReducedModel::heights_at(std::span<const double> base, std::vector<WeightedValue>& out) const
{
    std::vector<double> full(family_->size());
    family_->values_at(base, full);
    out.resize(slot_count_);
    std::vector<double> buf;
    std::vector<double> picked;
    for (const auto& g : groups_) {
        if (g.sample == 0) {
            buf = full;
        } else {
            const auto& members = gradation_->sample(g.sample);
            buf.resize(members.size());
            for (std::size_t t = 0; t < members.size(); ++t) buf[t] = full[members[t]];
        }
        picked.resize(g.ranks.size());
        multi_select(buf, g.ranks, picked);
        for (const auto& s : g.slots) out[s.slot] = {picked[s.rank_index], s.weight};
    }
}

double reduced_cost_l1(const SurfaceFamily& family, const Gradation& gradation, const LevelPlan& plan,
                       const ParamPoint& p)
{
    return model_cost(ReducedModel(family, gradation, plan), p, Objective::L1);
}

double reduced_cost_l2(const SurfaceFamily& family, const Gradation& gradation, const LevelPlan& plan,
                       const ParamPoint& p)
{
    return model_cost(ReducedModel(family, gradation, plan), p, Objective::L2);
}

std::vector<MemberIndex> bernoulli_sample(std::size_t n, double rate, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<MemberIndex> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(rng() >> 11U) * 0x1.0p-53;
        if (u < rate) out.push_back(static_cast<MemberIndex>(i));
    }
    return out;
}

} // namespace medianshape::levels
