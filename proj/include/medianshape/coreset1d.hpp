#pragma once

#include "medianshape/summation.hpp"
#include "medianshape/vertical_model.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace medianshape::coreset1d {

/// Half-open range of 0-based positions in the sorted sequence.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
};

/// Symmetric exponential partition of positions 0..n-1 into chunk pairs (L_i, R_i).
///
/// The first `prefix()` pairs are singletons; past that the left boundary grows as
/// alpha <- min(ceil((1 + eps/10) alpha), floor(n/2)). For odd n the middle position is a
/// separate singleton.
class ChunkPartition {
public:
    ChunkPartition(std::size_t n, double eps, std::size_t prefix, std::vector<std::size_t> bounds);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }
    /// Number of leading singleton pairs (min(m, floor(n/2))).
    [[nodiscard]] std::size_t prefix() const noexcept { return prefix_; }
    /// Number of chunk pairs M.
    [[nodiscard]] std::size_t pair_count() const noexcept { return bounds_.size(); }
    /// alpha_i: number of positions covered by L_1..L_i.
    [[nodiscard]] std::size_t alpha(std::size_t pair) const { return bounds_.at(pair); }
    /// alpha_{i-1} for pair i (0 for the first pair).
    [[nodiscard]] std::size_t alpha_before(std::size_t pair) const
    {
        return pair == 0 ? 0 : bounds_.at(pair - 1);
    }
    /// The alpha sequence alpha_m..alpha_M (empty when every pair is a singleton).
    [[nodiscard]] std::vector<std::size_t> alphas() const;
    [[nodiscard]] IndexRange left(std::size_t pair) const;
    [[nodiscard]] IndexRange right(std::size_t pair) const;
    [[nodiscard]] std::size_t pair_size(std::size_t pair) const { return left(pair).size(); }
    [[nodiscard]] std::optional<std::size_t> middle() const noexcept;
    [[nodiscard]] bool all_singletons() const noexcept { return prefix_ == bounds_.size(); }

private:
    std::size_t n_;
    double eps_;
    std::size_t prefix_;
    std::vector<std::size_t> bounds_;
};

/// Partition with m = ceil(10/eps). eps must lie in (0, 1].
ChunkPartition build_chunks(std::size_t n, double eps);
/// Partition with an explicit singleton prefix m >= 1; eps only sets the growth rate.
ChunkPartition build_chunks(std::size_t n, double eps, std::size_t m);

enum class RepRule { First, MedianOfChunk };

/// One weighted representative per chunk; left[i] and right[i] share weight |L_i| = |R_i|.
struct Coreset1D {
    std::vector<WeightedValue> left;
    std::vector<WeightedValue> right;
    std::optional<WeightedValue> middle;
    double eps = 0.0;
    std::size_t source_n = 0;

    /// All representatives in ascending chunk order.
    [[nodiscard]] std::vector<WeightedValue> reps() const;
    [[nodiscard]] std::int64_t total_weight() const;
};

/// `values` must be sorted ascending. RepRule::First takes the outermost element of
/// each chunk (lowest position on the left side, highest on the right).
Coreset1D build_coreset(std::span<const double> values, double eps, RepRule rule = RepRule::First);
Coreset1D build_coreset(std::span<const double> values, const ChunkPartition& partition,
                        RepRule rule = RepRule::First);

double eval_weighted_l1(std::span<const WeightedValue> reps, double query);
double eval_weighted_l2(std::span<const WeightedValue> reps, double query);

/// Sum of w_i * transform(|v_i - query|); transform must be increasing on [0, inf).
template <class Transform>
double eval_weighted_monotone(std::span<const WeightedValue> reps, double query, Transform&& transform)
{
    CompensatedSum sum;
    for (const auto& r : reps) sum += static_cast<double>(r.weight) * transform(std::abs(r.value - query));
    return sum.value();
}

struct PairOffset {
    double left = 0.0;
    double right = 0.0;
};

/// Shifts each pair's representatives by the given offsets. Each offset magnitude must be
/// at most (eps/20) |l_i - r_i|; the middle singleton (odd n) is left in place.
Coreset1D perturb(const Coreset1D& coreset, std::span<const PairOffset> offsets);

/// Largest offset magnitude perturb() accepts for pair i.
double max_offset(const Coreset1D& coreset, std::size_t pair);

} // namespace medianshape::coreset1d
