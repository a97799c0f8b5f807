#include "medianshape/ladder.hpp"

#include "medianshape/parallel.hpp"
#include "medianshape/summation.hpp"
#include "nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace medianshape::ladder {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Visits all points of a g^d lattice in lexicographic order of their index.
std::vector<double> lattice_point(std::size_t index, std::size_t g, const SearchRegion& region,
                                  bool cell_centers)
{
    const std::size_t d = region.dim();
    std::vector<double> x(d);
    for (std::size_t c = d; c-- > 0;) {
        const std::size_t t = index % g;
        index /= g;
        const double span = region.hi[c] - region.lo[c];
        x[c] = cell_centers ? region.lo[c] + span * (static_cast<double>(t) + 0.5) / static_cast<double>(g)
                            : region.lo[c] + span * static_cast<double>(t) / static_cast<double>(g - 1);
    }
    return x;
}

std::size_t lattice_size(std::size_t g, std::size_t d)
{
    std::size_t total = 1;
    for (std::size_t c = 0; c < d; ++c) total *= g;
    return total;
}

struct Span {
    double lo;
    double hi;
};

Span height_span(std::span<const WeightedValue> heights, std::optional<double> fixed)
{
    double lo = kInf;
    double hi = -kInf;
    for (const auto& h : heights) {
        lo = std::min(lo, h.value);
        hi = std::max(hi, h.value);
    }
    if (fixed) {
        lo = std::min(lo, *fixed);
        hi = std::max(hi, *fixed);
    }
    if (heights.empty() && !fixed) return {0.0, 0.0};
    return {lo, hi};
}

} // namespace

void SearchRegion::validate(std::size_t base_dim) const
{
    if (lo.size() != base_dim || hi.size() != base_dim) {
        throw InputError("search region has dimension " + std::to_string(lo.size()) + "/" +
                         std::to_string(hi.size()) + ", model expects " + std::to_string(base_dim));
    }
    for (std::size_t c = 0; c < base_dim; ++c) {
        if (!std::isfinite(lo[c]) || !std::isfinite(hi[c]) || !(hi[c] > lo[c])) {
            throw InputError("search region is degenerate along axis " + std::to_string(c));
        }
    }
    if (!std::isfinite(height_lo) || !std::isfinite(height_hi) || height_hi < height_lo) {
        throw InputError("search region has an invalid height range");
    }
}

StabInfo find_stab(const VerticalModel& model, const SearchRegion& region, std::size_t grid,
                   std::optional<double> fixed_height)
{
    region.validate(model.base_dim());
    if (grid < 2) throw InputError("find_stab: grid must be at least 2");
    const std::size_t d = region.dim();

    auto extent_at = [&](const std::vector<double>& base, std::vector<WeightedValue>& buf) {
        model.heights_at(base, buf);
        const Span s = height_span(buf, fixed_height);
        return s.hi - s.lo;
    };

    const std::size_t total = lattice_size(grid, d);
    std::vector<double> scores(total);
    parallel_for(total, [&](std::size_t begin, std::size_t end) {
        std::vector<WeightedValue> buf;
        for (std::size_t i = begin; i < end; ++i) scores[i] = extent_at(lattice_point(i, grid, region, false), buf);
    });

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t starts = std::min<std::size_t>(4, total);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                      [&](std::size_t a, std::size_t b) { return scores[a] < scores[b] || (scores[a] == scores[b] && a < b); });

    std::vector<double> best_x = lattice_point(order.front(), grid, region, false);
    double best = scores[order.front()];
    std::vector<WeightedValue> buf;
    // Compass search from the best few lattice nodes.
    for (std::size_t s = 0; s < starts && best > 0.0; ++s) {
        std::vector<double> x = lattice_point(order[s], grid, region, false);
        double fx = scores[order[s]];
        std::vector<double> step(d);
        for (std::size_t c = 0; c < d; ++c) step[c] = (region.hi[c] - region.lo[c]) / static_cast<double>(grid - 1);
        for (int iter = 0; iter < 2000 && fx > 0.0; ++iter) {
            bool moved = false;
            for (std::size_t c = 0; c < d && !moved; ++c) {
                for (double sign : {1.0, -1.0}) {
                    std::vector<double> y = x;
                    y[c] = std::clamp(y[c] + sign * step[c], region.lo[c], region.hi[c]);
                    const double fy = extent_at(y, buf);
                    if (fy < fx) {
                        x = std::move(y);
                        fx = fy;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) {
                bool tiny = true;
                for (std::size_t c = 0; c < d; ++c) {
                    step[c] *= 0.5;
                    if (step[c] > 1e-13 * (region.hi[c] - region.lo[c])) tiny = false;
                }
                if (tiny) break;
            }
        }
        if (fx < best) {
            best = fx;
            best_x = x;
        }
    }

    model.heights_at(best_x, buf);
    const Span sp = height_span(buf, fixed_height);
    return {best_x, sp.hi - sp.lo, 0.5 * (sp.hi + sp.lo)};
}

Ladder::Ladder(double sigma, std::int64_t total_weight, double eps, double step, std::size_t m_linear,
               std::vector<double> values)
    : sigma_(sigma), total_weight_(total_weight), eps_(eps), step_(step), m_linear_(m_linear),
      values_(std::move(values))
{
}

std::optional<double> Ladder::round_up(double distance) const
{
    const auto it = std::lower_bound(values_.begin(), values_.end(), distance);
    if (it == values_.end()) return std::nullopt;
    return *it;
}

Ladder build_ladder(double sigma_len, std::int64_t total_weight, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("build_ladder: eps must lie in (0, 1)");
    if (total_weight <= 0) throw InputError("build_ladder: total weight must be positive");
    if (!std::isfinite(sigma_len) || sigma_len < 0.0) throw InputError("build_ladder: invalid stab length");
    if (sigma_len == 0.0) throw ZeroCostCandidate();

    const double w = static_cast<double>(total_weight);
    const double u = eps * sigma_len / (10.0 * w * w);
    const double top = w * w * sigma_len;
    const auto m_linear = static_cast<std::size_t>(std::ceil(10.0 / eps - 1e-12));

    std::vector<double> values;
    values.reserve(m_linear + 64);
    for (std::size_t i = 1; i <= m_linear; ++i) {
        values.push_back(static_cast<double>(i) * u);
        if (values.back() > top) break;
    }
    while (!(values.back() > top)) values.push_back((1.0 + eps / 20.0) * values.back());
    const std::size_t linear = std::min(m_linear, values.size());
    return Ladder(sigma_len, total_weight, eps, u, linear, std::move(values));
}

QuantizedCost quantize_heights(std::span<const WeightedValue> heights, double height, const Ladder& ladder,
                               Objective objective)
{
    CompensatedSum sum;
    bool saturated = false;
    for (const auto& h : heights) {
        const double a = std::abs(h.value - height);
        const auto b = ladder.round_up(a);
        double v = a;
        if (b) {
            v = *b;
        } else {
            saturated = true;
        }
        sum += static_cast<double>(h.weight) * (objective == Objective::L1 ? v : v * v);
    }
    return {sum.value(), saturated};
}

QuantizedCost quantized_cost(const VerticalModel& model, const Ladder& ladder, const ParamPoint& p,
                             Objective objective)
{
    if (p.base.size() != model.base_dim()) throw InputError("quantized_cost: base dimension mismatch");
    std::vector<WeightedValue> heights;
    model.heights_at(p.base, heights);
    return quantize_heights(heights, p.height, ladder, objective);
}

std::size_t default_grid(std::size_t base_dim)
{
    switch (base_dim) {
    case 0: return 1;
    case 1: return 64;
    case 2: return 32;
    case 3: return 14;
    default: return 8;
    }
}

namespace {

class Searcher {
public:
    Searcher(const VerticalModel& scorer, const VerticalModel& exact, const Ladder& ladder,
             const SearchRegion& region, const MinimizeSettings& settings)
        : scorer_(scorer), exact_(exact), ladder_(ladder), region_(region), settings_(settings)
    {
    }

    double line_height(std::span<const WeightedValue> heights) const
    {
        if (settings_.fixed_height) return *settings_.fixed_height;
        return std::clamp(best_height(heights, settings_.objective), region_.height_lo, region_.height_hi);
    }

    // Quantized score of the best point on the vertical line through base; +inf if saturated.
    double score(const std::vector<double>& base, std::vector<WeightedValue>& buf) const
    {
        scorer_.heights_at(base, buf);
        const QuantizedCost q = quantize_heights(buf, line_height(buf), ladder_, settings_.objective);
        return q.saturated ? kInf : q.value;
    }

    // Exact cost of the best point on the vertical line through base.
    double exact_cost(const std::vector<double>& base, double* height_out = nullptr)
    {
        exact_.heights_at(base, exact_buf_);
        const double h = line_height(exact_buf_);
        if (height_out != nullptr) *height_out = h;
        return vertical_cost(exact_buf_, h, settings_.objective);
    }

    bool spend(std::size_t n = 1)
    {
        if (evaluations_ + n > settings_.budget) {
            exhausted_ = true;
            return false;
        }
        evaluations_ += n;
        return true;
    }

    MinimizeResult run()
    {
        const std::size_t d = region_.dim();
        const std::size_t g = settings_.grid == 0 ? default_grid(d) : settings_.grid;

        // Phase 1: coarse grid.
        const std::size_t total = lattice_size(g, d);
        std::vector<double> scores(total, kInf);
        const std::size_t affordable = std::min(total, settings_.budget);
        spend(affordable);
        if (affordable < total) exhausted_ = true;
        parallel_for(affordable, [&](std::size_t begin, std::size_t end) {
            std::vector<WeightedValue> buf;
            for (std::size_t i = begin; i < end; ++i) scores[i] = score(lattice_point(i, g, region_, true), buf);
        });

        std::vector<std::size_t> order(affordable);
        std::iota(order.begin(), order.end(), 0);
        const std::size_t k = std::min(settings_.top_k == 0 ? std::size_t{1} : settings_.top_k, affordable);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              return scores[a] < scores[b] || (scores[a] == scores[b] && a < b);
                          });

        std::vector<double> cell_half(d);
        for (std::size_t c = 0; c < d; ++c) cell_half[c] = 0.5 * (region_.hi[c] - region_.lo[c]) / static_cast<double>(g);

        // Phase 2: refine the top cells.
        std::vector<Candidate> candidates;
        for (std::size_t r = 0; r < k; ++r) {
            candidates.push_back(refine(lattice_point(order[r], g, region_, true), cell_half, scores[order[r]]));
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) { return a.score < b.score; });

        // Phase 3: polish on the exact cost.
        MinimizeResult result;
        result.cost = kInf;
        std::mt19937_64 rng(settings_.seed);
        std::vector<std::vector<double>> polished;
        for (const auto& cand : candidates) {
            if (exhausted_) break;
            // Refinements that landed in the same coarse cell share a basin; polish one of them.
            const bool repeat = std::any_of(polished.begin(), polished.end(), [&](const std::vector<double>& b) {
                for (std::size_t c = 0; c < d; ++c) {
                    if (std::fabs(b[c] - cand.base[c]) > cell_half[c]) return false;
                }
                return true;
            });
            if (repeat) continue;
            polished.push_back(cand.base);
            std::vector<double> steps(d);
            for (std::size_t c = 0; c < d; ++c) {
                const double sign = (rng() & 1U) != 0 ? 1.0 : -1.0;
                steps[c] = sign * std::max(cand.half[c], cell_half[c] * 0.5);
            }
            auto f = [this](const std::vector<double>& x) { return exact_cost(x); };
            auto ok = [this]() { return spend(); };
            auto nm = detail::nelder_mead(f, cand.base, steps, region_.lo, region_.hi, ok);
            if (nm.stopped_by_budget) exhausted_ = true;
            if (nm.value < result.cost) {
                result.cost = nm.value;
                result.point.base = nm.x;
            }
        }
        if (!std::isfinite(result.cost)) {
            const std::vector<double> base = candidates.empty() ? lattice_point(0, g, region_, true)
                                                                : candidates.front().base;
            result.point.base = base;
        }
        result.cost = exact_cost(result.point.base, &result.point.height);
        result.budget_exhausted = exhausted_;
        result.evaluations = evaluations_;
        return result;
    }

private:
    struct Candidate {
        std::vector<double> base;
        std::vector<double> half;
        double score;
    };

    // Recursive 3^d subdivision around the best child until the gain drops below eps/10.
    Candidate refine(std::vector<double> center, std::vector<double> half, double best)
    {
        const std::size_t d = center.size();
        const std::size_t children = lattice_size(3, d);
        std::vector<WeightedValue> buf;
        for (int depth = 0; depth < 40; ++depth) {
            if (!spend(children)) break;
            std::vector<double> child_best_x = center;
            double child_best = best;
            for (std::size_t i = 0; i < children; ++i) {
                std::vector<double> x(d);
                std::size_t idx = i;
                for (std::size_t c = d; c-- > 0;) {
                    const double t = static_cast<double>(idx % 3) - 1.0;
                    idx /= 3;
                    x[c] = center[c] + t * (2.0 / 3.0) * half[c];
                }
                const double s = score(x, buf);
                if (s < child_best) {
                    child_best = s;
                    child_best_x = std::move(x);
                }
            }
            const double improvement = best - child_best;
            center = std::move(child_best_x);
            for (auto& h : half) h /= 3.0;
            const bool was_finite = std::isfinite(best);
            best = child_best;
            if (depth >= 1 && was_finite && improvement < settings_.eps / 10.0 * best) break;
        }
        return {center, half, best};
    }

    const VerticalModel& scorer_;
    const VerticalModel& exact_;
    const Ladder& ladder_;
    const SearchRegion& region_;
    const MinimizeSettings& settings_;
    std::vector<WeightedValue> exact_buf_;
    std::size_t evaluations_ = 0;
    bool exhausted_ = false;
};

} // namespace

MinimizeResult minimize(const VerticalModel& scorer, const VerticalModel& exact, const Ladder& ladder,
                        const SearchRegion& region, const MinimizeSettings& settings)
{
    region.validate(scorer.base_dim());
    if (exact.base_dim() != scorer.base_dim()) throw InputError("minimize: scorer and exact model disagree on base dimension");
    if (!(settings.eps > 0.0 && settings.eps < 1.0)) throw InputError("minimize: eps must lie in (0, 1)");
    Searcher s(scorer, exact, ladder, region, settings);
    return s.run();
}

MinimizeResult minimize(const VerticalModel& model, const SearchRegion& region, const MinimizeSettings& settings)
{
    region.validate(model.base_dim());
    const std::size_t d = region.dim();
    const std::size_t g = std::max<std::size_t>(2, settings.grid == 0 ? default_grid(d) : settings.grid);
    const StabInfo stab = find_stab(model, region, g, settings.fixed_height);
    if (stab.length == 0.0) {
        MinimizeResult r;
        r.point.base = stab.base;
        r.point.height = settings.fixed_height.value_or(stab.mid_height);
        r.cost = model_cost(model, r.point, settings.objective);
        r.zero_cost = true;
        return r;
    }
    const Ladder ladder = build_ladder(stab.length, model.total_weight(), settings.eps);
    return minimize(model, model, ladder, region, settings);
}

} // namespace medianshape::ladder
