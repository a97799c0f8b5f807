#pragma once

#include "medianshape/errors.hpp"
#include "medianshape/geometry.hpp"
#include "medianshape/vertical_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace medianshape::ladder {

/// Axis-aligned box over the base space plus an admissible height range.
struct SearchRegion {
    std::vector<double> lo;
    std::vector<double> hi;
    double height_lo = 0.0;
    double height_hi = 0.0;

    [[nodiscard]] std::size_t dim() const noexcept { return lo.size(); }
    void validate(std::size_t base_dim) const;
};

/// A short vertical segment crossing every surface at `base`.
struct StabInfo {
    std::vector<double> base;
    double length = 0.0;
    double mid_height = 0.0;
};

/// Approximates the shortest vertical segment stabbing every surface over the region: the
/// minimum of (top 0-level - bottom 0-level) over a grid, refined locally. With a fixed
/// height the segment must also reach that height.
StabInfo find_stab(const VerticalModel& model, const SearchRegion& region, std::size_t grid,
                   std::optional<double> fixed_height = std::nullopt);

/// Thrown by build_ladder when the stabbing segment has zero length: an exact fit exists.
class ZeroCostCandidate : public InputError {
public:
    ZeroCostCandidate() : InputError("stabbing segment has zero length; an exact fit exists") {}
};

/// Quantization thresholds u_1 < ... < u_M: i*u for i <= m_linear, then growing by
/// (1 + eps/20), until u_M > W^2 * sigma. Here u = eps * sigma / (10 W^2).
class Ladder {
public:
    Ladder(double sigma, std::int64_t total_weight, double eps, double step, std::size_t m_linear,
           std::vector<double> values);

    [[nodiscard]] double sigma() const noexcept { return sigma_; }
    [[nodiscard]] std::int64_t total_weight() const noexcept { return total_weight_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] double step() const noexcept { return step_; }
    [[nodiscard]] std::size_t m_linear() const noexcept { return m_linear_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    /// Smallest ladder value >= distance, or nullopt when distance > u_M.
    [[nodiscard]] std::optional<double> round_up(double distance) const;

private:
    double sigma_;
    std::int64_t total_weight_;
    double eps_;
    double step_;
    std::size_t m_linear_;
    std::vector<double> values_;
};

Ladder build_ladder(double sigma_len, std::int64_t total_weight, double eps);

struct QuantizedCost {
    double value = 0.0;
    /// Some distance exceeded u_M; such terms enter with their exact value.
    bool saturated = false;
};

/// Each vertical distance a_i is replaced by the smallest ladder value >= a_i; the sum is
/// weighted (L1) or weighted and squared (L2).
QuantizedCost quantize_heights(std::span<const WeightedValue> heights, double height,
                               const Ladder& ladder, Objective objective);
QuantizedCost quantized_cost(const VerticalModel& model, const Ladder& ladder, const ParamPoint& p,
                             Objective objective = Objective::L1);

struct MinimizeSettings {
    double eps = 0.1;
    Objective objective = Objective::L1;
    /// Coarse grid cells per axis; 0 picks a default for the base dimension.
    std::size_t grid = 0;
    std::size_t top_k = 16;
    std::size_t budget = 400000;
    std::uint64_t seed = 0;
    /// Problems whose vertical coordinate is pinned (median of flats).
    std::optional<double> fixed_height;
};

struct MinimizeResult {
    ParamPoint point;
    double cost = 0.0;
    bool budget_exhausted = false;
    bool zero_cost = false;
    std::size_t evaluations = 0;
};

std::size_t default_grid(std::size_t base_dim);

/// Ladder-guided search. Coarse grid cells are scored by the quantized cost of `scorer`
/// (height set to the best height on that vertical line), the top_k cells are refined by
/// recursive subdivision, and the refined candidates are polished by Nelder-Mead on the
/// exact cost of `exact`. The returned cost is the exact cost at the returned point.
MinimizeResult minimize(const VerticalModel& scorer, const VerticalModel& exact, const Ladder& ladder,
                        const SearchRegion& region, const MinimizeSettings& settings);

/// Single-model convenience: finds the stab, builds the ladder over model.total_weight()
/// and searches with scorer == exact. Zero-length stabs return the stab directly.
MinimizeResult minimize(const VerticalModel& model, const SearchRegion& region,
                        const MinimizeSettings& settings);

} // namespace medianshape::ladder
