#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace medianshape::ladder::detail {

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    bool stopped_by_budget = false;
};

/// Box-projected Nelder-Mead with restarts. `steps` sets the initial simplex edge per axis
/// (signed). `eval` returns false from `budget_ok` once the evaluation budget is spent.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, std::vector<double> steps,
                                    const std::vector<double>& lo, const std::vector<double>& hi,
                                    const std::function<bool()>& budget_ok, std::size_t max_restarts = 6)
{
    const std::size_t d = x0.size();
    auto project = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };
    NelderMeadResult best;
    project(x0);
    if (!budget_ok()) {
        best.stopped_by_budget = true;
        best.x = x0;
        return best;
    }
    best.x = x0;
    best.value = f(x0);
    if (d == 0) return best;

    for (std::size_t restart = 0; restart <= max_restarts; ++restart) {
        std::vector<std::vector<double>> simplex(d + 1, best.x);
        std::vector<double> fx(d + 1, best.value);
        for (std::size_t i = 0; i < d; ++i) {
            simplex[i + 1][i] += steps[i];
            if (simplex[i + 1][i] > hi[i] || simplex[i + 1][i] < lo[i]) simplex[i + 1][i] -= 2.0 * steps[i];
            project(simplex[i + 1]);
            if (!budget_ok()) {
                best.stopped_by_budget = true;
                return best;
            }
            fx[i + 1] = f(simplex[i + 1]);
        }
        const double start_value = best.value;

        std::vector<std::size_t> order(d + 1);
        std::vector<double> centroid(d), xr(d), xe(d), xc(d);
        for (std::size_t iter = 0; iter < 4000 * d; ++iter) {
            for (std::size_t i = 0; i <= d; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return fx[a] < fx[b] || (fx[a] == fx[b] && a < b);
            });
            const std::size_t ib = order.front();
            const std::size_t iw = order.back();
            const std::size_t is = order[d - 1];

            double size = 0.0;
            for (std::size_t i = 0; i <= d; ++i) {
                for (std::size_t c = 0; c < d; ++c) {
                    const double scale = std::max(1.0, std::abs(simplex[ib][c]));
                    size = std::max(size, std::abs(simplex[i][c] - simplex[ib][c]) / scale);
                }
            }
            const double spread = fx[iw] - fx[ib];
            if (size < 1e-13 || (spread <= 1e-15 * std::abs(fx[ib]) && size < 1e-9)) break;

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t i = 0; i <= d; ++i) {
                if (i == iw) continue;
                for (std::size_t c = 0; c < d; ++c) centroid[c] += simplex[i][c] / static_cast<double>(d);
            }
            for (std::size_t c = 0; c < d; ++c) xr[c] = centroid[c] + (centroid[c] - simplex[iw][c]);
            project(xr);
            if (!budget_ok()) {
                best.stopped_by_budget = true;
                break;
            }
            const double fr = f(xr);
            if (fr < fx[ib]) {
                for (std::size_t c = 0; c < d; ++c) xe[c] = centroid[c] + 2.0 * (centroid[c] - simplex[iw][c]);
                project(xe);
                if (!budget_ok()) {
                    best.stopped_by_budget = true;
                    break;
                }
                const double fe = f(xe);
                if (fe < fr) {
                    simplex[iw] = xe;
                    fx[iw] = fe;
                } else {
                    simplex[iw] = xr;
                    fx[iw] = fr;
                }
                continue;
            }
            if (fr < fx[is]) {
                simplex[iw] = xr;
                fx[iw] = fr;
                continue;
            }
            const bool outside = fr < fx[iw];
            for (std::size_t c = 0; c < d; ++c) {
                xc[c] = outside ? centroid[c] + 0.5 * (xr[c] - centroid[c])
                                : centroid[c] + 0.5 * (simplex[iw][c] - centroid[c]);
            }
            project(xc);
            if (!budget_ok()) {
                best.stopped_by_budget = true;
                break;
            }
            const double fc = f(xc);
            if (fc < std::min(fr, fx[iw])) {
                simplex[iw] = xc;
                fx[iw] = fc;
                continue;
            }
            for (std::size_t i = 0; i <= d; ++i) {
                if (i == ib) continue;
                for (std::size_t c = 0; c < d; ++c) simplex[i][c] = simplex[ib][c] + 0.5 * (simplex[i][c] - simplex[ib][c]);
                if (!budget_ok()) {
                    best.stopped_by_budget = true;
                    break;
                }
                fx[i] = f(simplex[i]);
            }
            if (best.stopped_by_budget) break;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (fx[i] < best.value) {
                best.value = fx[i];
                best.x = simplex[i];
            }
        }
        if (best.stopped_by_budget) break;
        if (restart > 0 && !(best.value < start_value - 1e-12 * std::abs(start_value))) break;
    }
    return best;
}

} // namespace medianshape::ladder::detail
