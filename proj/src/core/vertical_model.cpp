#include "medianshape/vertical_model.hpp"

#include "medianshape/errors.hpp"
#include "medianshape/summation.hpp"

#include <algorithm>
#include <cmath>

namespace medianshape {

double vertical_cost(std::span<const WeightedValue> heights, double height, Objective objective)
{
    CompensatedSum sum;
    if (objective == Objective::L1) {
        for (const auto& h : heights) sum += static_cast<double>(h.weight) * std::abs(h.value - height);
    } else {
        for (const auto& h : heights) {
            const double d = h.value - height;
            sum += static_cast<double>(h.weight) * d * d;
        }
    }
    return sum.value();
}

double best_height(std::span<const WeightedValue> heights, Objective objective)
{
    if (heights.empty()) return 0.0;
    if (objective == Objective::L2) {
        CompensatedSum num;
        double den = 0.0;
        for (const auto& h : heights) {
            num += static_cast<double>(h.weight) * h.value;
            den += static_cast<double>(h.weight);
        }
        return num.value() / den;
    }
    std::vector<WeightedValue> sorted(heights.begin(), heights.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
    std::int64_t total = 0;
    for (const auto& h : sorted) total += h.weight;
    std::int64_t acc = 0;
    for (const auto& h : sorted) {
        acc += h.weight;
        if (2 * acc >= total) return h.value;
    }
    return sorted.back().value;
}

double model_cost(const VerticalModel& model, const ParamPoint& p, Objective objective)
{
    if (p.base.size() != model.base_dim()) {
        throw InputError("parameter point has " + std::to_string(p.base.size()) +
                         " base coordinates, model expects " + std::to_string(model.base_dim()));
    }
    std::vector<WeightedValue> heights;
    model.heights_at(p.base, heights);
    return vertical_cost(heights, p.height, objective);
}

} // namespace medianshape
