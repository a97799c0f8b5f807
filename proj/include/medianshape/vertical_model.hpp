#pragma once

#include "medianshape/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace medianshape {

struct WeightedValue {
    double value = 0.0;
    std::int64_t weight = 1;
};

/// Anything that reports weighted surface heights along a vertical line: the full
/// surface family, or the weighted level set produced by the reduction.
class VerticalModel {
public:
    virtual ~VerticalModel() = default;

    [[nodiscard]] virtual std::size_t base_dim() const = 0;
    /// Total weight of the surfaces crossing any vertical line.
    [[nodiscard]] virtual std::int64_t total_weight() const = 0;
    virtual void heights_at(std::span<const double> base, std::vector<WeightedValue>& out) const = 0;
};

/// Sum of w * |v - height| (L1) or w * (v - height)^2 (L2).
double vertical_cost(std::span<const WeightedValue> heights, double height, Objective objective);

/// Height minimizing vertical_cost on this line: lower weighted median for L1, weighted
/// mean for L2.
double best_height(std::span<const WeightedValue> heights, Objective objective);

/// Convenience: exact cost of the model at p.
double model_cost(const VerticalModel& model, const ParamPoint& p, Objective objective);

} // namespace medianshape
