#include "medianshape/coreset1d.hpp"

#include "medianshape/errors.hpp"

#include <algorithm>
#include <string>

namespace medianshape::coreset1d {

ChunkPartition::ChunkPartition(std::size_t n, double eps, std::size_t prefix,
                               std::vector<std::size_t> bounds)
    : n_(n), eps_(eps), prefix_(prefix), bounds_(std::move(bounds))
{
}

std::vector<std::size_t> ChunkPartition::alphas() const
{
    if (all_singletons()) return {};
    return {bounds_.begin() + static_cast<std::ptrdiff_t>(prefix_ - 1), bounds_.end()};
}

IndexRange ChunkPartition::left(std::size_t pair) const
{
    return {alpha_before(pair), alpha(pair)};
}

IndexRange ChunkPartition::right(std::size_t pair) const
{
    return {n_ - alpha(pair), n_ - alpha_before(pair)};
}

std::optional<std::size_t> ChunkPartition::middle() const noexcept
{
    if (n_ % 2 == 1) return n_ / 2;
    return std::nullopt;
}

namespace {

// ceil(x) that ignores representation error just above an integer.
std::size_t robust_ceil(double x)
{
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(x));
}

} // namespace

ChunkPartition build_chunks(std::size_t n, double eps, std::size_t m)
{
    if (n == 0) throw InputError("build_chunks: n must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("build_chunks: eps must be positive");
    if (m == 0) throw InputError("build_chunks: singleton prefix must be positive");

    const std::size_t half = n / 2;
    const std::size_t prefix = std::min(m, half);
    std::vector<std::size_t> bounds;
    bounds.reserve(prefix + 64);
    for (std::size_t i = 1; i <= prefix; ++i) bounds.push_back(i);
    std::size_t alpha = prefix;
    while (alpha < half) {
        const std::size_t next =
            std::min(robust_ceil((1.0 + eps / 10.0) * static_cast<double>(alpha)), half);
        alpha = std::max(next, alpha + 1);
        bounds.push_back(alpha);
    }
    return ChunkPartition(n, eps, prefix, std::move(bounds));
}

ChunkPartition build_chunks(std::size_t n, double eps)
{
    if (!(eps > 0.0 && eps <= 1.0)) throw InputError("build_chunks: eps must lie in (0, 1]");
    return build_chunks(n, eps, robust_ceil(10.0 / eps));
}

std::vector<WeightedValue> Coreset1D::reps() const
{
    std::vector<WeightedValue> out;
    out.reserve(left.size() + right.size() + 1);
    out.insert(out.end(), left.begin(), left.end());
    if (middle) out.push_back(*middle);
    out.insert(out.end(), right.rbegin(), right.rend());
    return out;
}

std::int64_t Coreset1D::total_weight() const
{
    std::int64_t w = middle ? middle->weight : 0;
    for (const auto& r : left) w += r.weight;
    for (const auto& r : right) w += r.weight;
    return w;
}

Coreset1D build_coreset(std::span<const double> values, const ChunkPartition& partition, RepRule rule)
{
    if (values.size() != partition.n()) {
        throw InputError("build_coreset: partition built for " + std::to_string(partition.n()) +
                         " values, got " + std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) throw InputError("build_coreset: value " + std::to_string(i) + " is NaN");
        if (i > 0 && values[i] < values[i - 1]) {
            throw InputError("build_coreset: values are not sorted at position " + std::to_string(i));
        }
    }

    Coreset1D out;
    out.eps = partition.eps();
    out.source_n = values.size();
    out.left.reserve(partition.pair_count());
    out.right.reserve(partition.pair_count());
    for (std::size_t i = 0; i < partition.pair_count(); ++i) {
        const IndexRange l = partition.left(i);
        const IndexRange r = partition.right(i);
        const auto w = static_cast<std::int64_t>(l.size());
        std::size_t li = l.begin;
        std::size_t ri = r.end - 1;
        if (rule == RepRule::MedianOfChunk) {
            li = l.begin + (l.size() - 1) / 2;
            ri = r.begin + r.size() / 2;
        }
        out.left.push_back({values[li], w});
        out.right.push_back({values[ri], w});
    }
    if (auto mid = partition.middle()) out.middle = WeightedValue{values[*mid], 1};
    return out;
}

Coreset1D build_coreset(std::span<const double> values, double eps, RepRule rule)
{
    if (values.empty()) throw InputError("build_coreset: empty input");
    return build_coreset(values, build_chunks(values.size(), eps), rule);
}

double eval_weighted_l1(std::span<const WeightedValue> reps, double query)
{
    if (std::isnan(query)) throw InputError("eval_weighted_l1: query is NaN");
    return eval_weighted_monotone(reps, query, [](double d) { return d; });
}

double eval_weighted_l2(std::span<const WeightedValue> reps, double query)
{
    if (std::isnan(query)) throw InputError("eval_weighted_l2: query is NaN");
    return eval_weighted_monotone(reps, query, [](double d) { return d * d; });
}

double max_offset(const Coreset1D& coreset, std::size_t pair)
{
    return coreset.eps / 20.0 * std::abs(coreset.left.at(pair).value - coreset.right.at(pair).value);
}

Coreset1D perturb(const Coreset1D& coreset, std::span<const PairOffset> offsets)
{
    if (offsets.size() != coreset.left.size()) {
        throw InputError("perturb: expected " + std::to_string(coreset.left.size()) +
                         " offset pairs, got " + std::to_string(offsets.size()));
    }
    Coreset1D out = coreset;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        const double bound = max_offset(coreset, i);
        const double slack = 1e-12 * bound;
        if (std::abs(offsets[i].left) > bound + slack || std::abs(offsets[i].right) > bound + slack) {
            throw ValidationError("perturb: offset for pair " + std::to_string(i) +
                                  " exceeds (eps/20)|l_i - r_i| = " + std::to_string(bound));
        }
        out.left[i].value += offsets[i].left;
        out.right[i].value += offsets[i].right;
    }
    return out;
}

} // namespace medianshape::coreset1d
