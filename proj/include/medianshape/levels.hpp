#pragma once

#include "medianshape/surface_family.hpp"
#include "medianshape/vertical_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace medianshape::levels {

enum class Side { Bottom, Top };

using MemberIndex = std::uint32_t;

/// rank-th smallest element (0-based). Reorders `values`; expected linear time.
double select_rank(std::span<double> values, std::size_t rank);

/// out[j] = ranks[j]-th smallest element. `ranks` must be ascending. Reorders `values`.
void multi_select(std::span<double> values, std::span<const std::size_t> ranks, std::span<double> out);

/// A vertical line through the family's parameter space.
struct LevelQuery {
    const SurfaceFamily* family = nullptr;
    std::vector<double> base;
};

/// Bottom level k is the (k+1)-th smallest surface value at the query base; the top level k
/// is bottom level (size - 1 - k). With `subset`, only those members are active.
double level_value(const LevelQuery& q, std::size_t k, Side side,
                   const std::vector<MemberIndex>* subset = nullptr);

/// Top k-level minus bottom r-level.
double extent(const LevelQuery& q, std::size_t k, std::size_t r);

/// Nested samples: sample 0 holds every member, sample j+1 keeps each member of sample j
/// with probability 1/2.
class Gradation {
public:
    Gradation(std::size_t n, std::uint64_t seed, std::vector<std::vector<MemberIndex>> samples);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::size_t levels() const noexcept { return samples_.size(); }
    [[nodiscard]] const std::vector<MemberIndex>& sample(std::size_t j) const { return samples_.at(j); }
    /// Retention probability of sample j, 2^-j.
    [[nodiscard]] static double rate(std::size_t j);

private:
    std::size_t n_;
    std::uint64_t seed_;
    std::vector<std::vector<MemberIndex>> samples_;
};

/// Samples 0..T with T = ceil(log2 n) + 1, stopping after the first empty sample.
Gradation build_gradation(std::size_t n, std::uint64_t seed);
Gradation build_gradation(const SurfaceFamily& family, std::uint64_t seed);

struct PlanSettings {
    double chernoff_c = 4.0;
    double m_c = 1.0;
};

struct PlanEntry {
    Side side = Side::Bottom;
    std::size_t sample = 0;
    std::size_t depth = 0;
    std::int64_t weight = 1;
};

/// Which levels stand in for the full family, and with what weight.
///
/// `prefix` bottom and `prefix` top levels of the full family enter with weight 1; each
/// entry contributes the level at `depth` of gradation sample `sample`; for odd n the
/// median level `middle_depth` enters with weight 1.
struct LevelPlan {
    std::size_t n = 0;
    double eps = 0.0;
    std::size_t m = 0;
    std::size_t prefix = 0;
    std::optional<std::size_t> middle_depth;
    std::vector<PlanEntry> entries;
    std::vector<std::size_t> sample_sizes;

    /// Total weight crossing any vertical line; equals n for a valid plan.
    [[nodiscard]] std::int64_t accounted_weight() const;
    [[nodiscard]] bool exact() const;
};

/// max(ceil(10/eps), ceil(m_c ln(n) / eps^2)).
std::size_t plan_prefix(std::size_t n, double eps, double m_c);

/// min(c ln(n) / (k delta^2), 1).
double sampling_rate(double k, double delta, std::size_t n, double c);

LevelPlan plan_levels(std::size_t n, double eps, const Gradation& gradation, PlanSettings settings = {});

/// The weighted level set described by a plan, evaluated exactly per vertical line.
class ReducedModel final : public VerticalModel {
public:
    ReducedModel(const SurfaceFamily& family, const Gradation& gradation, const LevelPlan& plan);

    [[nodiscard]] std::size_t base_dim() const override { return family_->base_dim(); }
    [[nodiscard]] std::int64_t total_weight() const override { return total_weight_; }
    void heights_at(std::span<const double> base, std::vector<WeightedValue>& out) const override;

    /// Number of weighted level surfaces per vertical line.
    [[nodiscard]] std::size_t surface_count() const noexcept { return slot_count_; }

private:
    struct SampleGroup {
        std::size_t sample = 0;
        std::vector<std::size_t> ranks;
        // (slot, index into ranks, weight)
        struct Slot {
            std::size_t slot;
            std::size_t rank_index;
            std::int64_t weight;
        };
        std::vector<Slot> slots;
    };

    const SurfaceFamily* family_;
    const Gradation* gradation_;
    std::vector<SampleGroup> groups_;
    std::size_t slot_count_ = 0;
    std::int64_t total_weight_ = 0;
};

double reduced_cost_l1(const SurfaceFamily& family, const Gradation& gradation, const LevelPlan& plan,
                       const ParamPoint& p);
double reduced_cost_l2(const SurfaceFamily& family, const Gradation& gradation, const LevelPlan& plan,
                       const ParamPoint& p);

/// Independent Bernoulli(rate) sample of 0..n-1.
std::vector<MemberIndex> bernoulli_sample(std::size_t n, double rate, std::uint64_t seed);

} // namespace medianshape::levels
