#include "medianshape/testkit.hpp"

#include "medianshape/errors.hpp"
#include "medianshape/summation.hpp"
#include "medianshape/surface_family.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace medianshape::testkit {

double oracle_1d(std::span<const WeightedValue> values, double query, Objective objective)
{
    long double total = 0.0L;
    for (const auto& v : values) {
        const long double d = static_cast<long double>(v.value) - query;
        total += static_cast<long double>(v.weight) * (objective == Objective::L1 ? std::fabs(d) : d * d);
    }
    return static_cast<double>(total);
}

Minimum1D oracle_1d_minimize(std::span<const WeightedValue> values, Objective objective)
{
    if (values.empty()) return {};
    Minimum1D out;
    if (objective == Objective::L2) {
        long double num = 0.0L;
        long double den = 0.0L;
        for (const auto& v : values) {
            num += static_cast<long double>(v.weight) * v.value;
            den += static_cast<long double>(v.weight);
        }
        out.minimizer = static_cast<double>(num / den);
    } else {
        std::vector<WeightedValue> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end(),
                  [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
        std::int64_t total = 0;
        for (const auto& v : sorted) total += v.weight;
        std::int64_t acc = 0;
        for (const auto& v : sorted) {
            acc += v.weight;
            if (2 * acc >= total) {
                out.minimizer = v.value;
                break;
            }
        }
    }
    out.minimum = oracle_1d(values, out.minimizer, objective);
    return out;
}

namespace {

double point_line_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& unit_dir)
{
    const Eigen::Vector3d w = p - a;
    return w.cross(unit_dir).norm();
}

double point_flat_distance(const Eigen::Vector3d& p, const Flat& flat)
{
    Eigen::Vector3d w = p - flat.anchor;
    for (const auto& b : flat.basis) w -= w.dot(b) * b;
    return w.norm();
}

/// Best vertical offset and the resulting cost for unit-weight distances.
std::pair<double, double> profile(std::vector<double>& d, Objective objective)
{
    double h = 0.0;
    if (objective == Objective::L1) {
        const std::size_t mid = (d.size() - 1) / 2;
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
        h = d[mid];
    } else {
        long double s = 0.0L;
        for (double x : d) s += x;
        h = static_cast<double>(s / static_cast<long double>(d.size()));
    }
    h = std::max(h, 0.0);
    long double c = 0.0L;
    for (double x : d) {
        const long double r = static_cast<long double>(x) - h;
        c += objective == Objective::L1 ? std::fabs(r) : r * r;
    }
    return {h, static_cast<double>(c)};
}

/// Exact cost of a chart point with the height profiled out.
struct ChartProblem {
    std::size_t dim = 0;
    std::vector<double> lo;
    std::vector<double> hi;
    std::function<double(const std::vector<double>&)> cost;
    std::function<Shape(const std::vector<double>&)> shape;
};

struct SearchOutcome {
    std::vector<double> x;
    double cost = std::numeric_limits<double>::infinity();
};

std::size_t default_resolution(std::size_t dim)
{
    switch (dim) {
    case 1: return 200;
    case 2: return 24;
    case 3: return 12;
    default: return 7;
    }
}

SearchOutcome pattern_search(const ChartProblem& prob, std::vector<double> x, double fx,
                             std::vector<double> step, std::mt19937_64& rng)
{
    constexpr std::size_t kMaxEvals = 20000;
    const std::size_t d = prob.dim;
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto clamp = [&](std::vector<double>& y) {
        for (std::size_t i = 0; i < d; ++i) y[i] = std::clamp(y[i], prob.lo[i], prob.hi[i]);
    };
    double scale = 1.0;
    std::size_t evals = 0;
    std::vector<double> y(d);
    while (scale > 1e-10 && evals < kMaxEvals) {
        bool moved = false;
        // Coordinate polls first, then two random directions.
        for (std::size_t k = 0; k < 2 * d + 2 && !moved; ++k) {
            if (k < 2 * d) {
                y = x;
                y[k / 2] += (k % 2 == 0 ? 1.0 : -1.0) * scale * step[k / 2];
            } else {
                std::vector<double> dir(d);
                double norm = 0.0;
                for (auto& v : dir) {
                    v = gauss(rng);
                    norm += v * v;
                }
                norm = std::sqrt(norm);
                for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + scale * step[i] * dir[i] / norm;
            }
            clamp(y);
            const double fy = prob.cost(y);
            ++evals;
            if (fy < fx) {
                x = y;
                fx = fy;
                moved = true;
            }
        }
        if (!moved) scale *= 0.5;
    }
    return {std::move(x), fx};
}

SearchOutcome multistart(const ChartProblem& prob, std::size_t resolution, std::size_t restarts, std::uint64_t seed)
{
    const std::size_t d = prob.dim;
    if (d == 0) return {{}, prob.cost({})};
    std::vector<double> spacing(d);
    for (std::size_t i = 0; i < d; ++i) spacing[i] = (prob.hi[i] - prob.lo[i]) / static_cast<double>(resolution);

    std::size_t nodes = 1;
    for (std::size_t i = 0; i < d; ++i) nodes *= resolution;
    std::vector<std::pair<double, std::size_t>> scored(nodes);
    std::vector<double> x(d);
    auto node_point = [&](std::size_t idx, std::vector<double>& out) {
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t c = idx % resolution;
            idx /= resolution;
            out[i] = prob.lo[i] + (static_cast<double>(c) + 0.5) * spacing[i];
        }
    };
    for (std::size_t idx = 0; idx < nodes; ++idx) {
        node_point(idx, x);
        scored[idx] = {prob.cost(x), idx};
    }
    const std::size_t keep = std::min(restarts, nodes);
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());

    std::mt19937_64 rng(seed ^ 0x6f7261636c65ULL);
    SearchOutcome best;
    std::vector<double> step(d);
    for (std::size_t i = 0; i < d; ++i) step[i] = spacing[i] / 2.0;
    for (std::size_t r = 0; r < keep; ++r) {
        node_point(scored[r].second, x);
        SearchOutcome o = pattern_search(prob, x, scored[r].first, step, rng);
        if (o.cost < best.cost) best = std::move(o);
    }
    return best;
}

struct OracleRun {
    SearchOutcome outcome;
    std::size_t chart = 0;
};

FitResult finish(const std::vector<ChartProblem>& charts, const OracleSettings& settings, Objective objective,
                 std::size_t n, std::chrono::steady_clock::time_point t0)
{
    auto run_all = [&](std::size_t res_scale, std::size_t restart_scale) {
        OracleRun best;
        for (std::size_t c = 0; c < charts.size(); ++c) {
            const ChartProblem& chart = charts[c];
            const std::size_t res =
                (settings.resolution == 0 ? default_resolution(chart.dim) : settings.resolution) * res_scale;
            SearchOutcome o = multistart(chart, res, settings.restarts * restart_scale, settings.seed);
            if (o.cost < best.outcome.cost) best = {std::move(o), c};
        }
        return best;
    };
    OracleRun best = run_all(1, 1);
    bool unstable = false;
    if (settings.self_check) {
        OracleRun fine = run_all(2, 2);
        const double a = best.outcome.cost;
        const double b = fine.outcome.cost;
        if (std::fabs(a - b) > 0.005 * std::max(a, b) + 1e-12) unstable = true;
        if (b < a) best = std::move(fine);
    }
    FitResult r;
    r.shape = charts[best.chart].shape(best.outcome.x);
    r.cost = best.outcome.cost;
    r.objective = objective;
    r.method = Method::Oracle;
    r.seed = settings.seed;
    r.n = n;
    r.flags.oracle_unstable = unstable;
    r.param.base = best.outcome.x;
    r.param.height = std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ParallelLines>) return s.half_separation;
            else if constexpr (std::is_same_v<T, MedianPoint>) return 0.0;
            else return s.radius;
        },
        r.shape);
    r.chart_axis = charts.size() > 1 ? static_cast<int>(best.chart) : -1;
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

ChartProblem center_chart(const PointSet& points, Objective objective)
{
    const int dim = points.dim();
    const SurfaceFamily fam = dim == 2 ? SurfaceFamily::circle_cones(points) : SurfaceFamily::sphere_cones(points);
    const ladder::SearchRegion region = search_region(fam, points);
    ChartProblem prob;
    prob.dim = static_cast<std::size_t>(dim);
    prob.lo = region.lo;
    prob.hi = region.hi;
    auto dists = [&points, dim](const std::vector<double>& x) {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int i = 0; i < dim; ++i) c[i] = x[static_cast<std::size_t>(i)];
        std::vector<double> d(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) d[i] = (points[i] - c).norm();
        return d;
    };
    prob.cost = [dists, objective](const std::vector<double>& x) {
        auto d = dists(x);
        return profile(d, objective).second;
    };
    prob.shape = [dists, objective, dim](const std::vector<double>& x) -> Shape {
        auto d = dists(x);
        const double h = profile(d, objective).first;
        if (dim == 2) return Circle{Eigen::Vector2d(x[0], x[1]), h};
        return Sphere{Eigen::Vector3d(x[0], x[1], x[2]), h};
    };
    return prob;
}

ChartProblem line_chart(const PointSet& points, int axis, Objective objective)
{
    const int dim = points.dim();
    const SurfaceFamily fam = SurfaceFamily::cylinders(points, axis);
    const ladder::SearchRegion region = search_region(fam, points);
    const double offset = points.centroid()[axis];
    ChartProblem prob;
    prob.dim = region.lo.size();
    prob.lo = region.lo;
    prob.hi = region.hi;
    auto line = [dim, axis, offset](const std::vector<double>& x) {
        const Line l = decode_line_chart(dim, axis, offset, x);
        return std::pair<Eigen::Vector3d, Eigen::Vector3d>{l.point, l.dir.normalized()};
    };
    auto dists = [&points, line](const std::vector<double>& x) {
        const auto [a, u] = line(x);
        std::vector<double> d(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) d[i] = point_line_distance(points[i], a, u);
        return d;
    };
    prob.cost = [dists, objective](const std::vector<double>& x) {
        auto d = dists(x);
        return profile(d, objective).second;
    };
    prob.shape = [dists, line, objective, dim](const std::vector<double>& x) -> Shape {
        auto d = dists(x);
        const double h = profile(d, objective).first;
        const auto [a, u] = line(x);
        if (dim == 2) return ParallelLines{a.head<2>(), u.head<2>().normalized(), h};
        return Cylinder{a, u, h};
    };
    return prob;
}

} // namespace

FitResult oracle_fit(const PointSet& points, ShapeKind kind, Objective objective, const OracleSettings& settings)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (points.empty()) throw InputError("oracle_fit: empty point set");
    if (settings.restarts == 0) throw InputError("oracle_fit: restarts must be positive");
    std::vector<ChartProblem> charts;
    switch (kind) {
    case ShapeKind::Circle:
        if (points.dim() != 2) throw InputError("circle fitting needs planar points");
        charts.push_back(center_chart(points, objective));
        break;
    case ShapeKind::Sphere:
        if (points.dim() != 3) throw InputError("sphere fitting needs points in R^3");
        charts.push_back(center_chart(points, objective));
        break;
    case ShapeKind::Cylinder:
    case ShapeKind::TwoLines:
        if (kind == ShapeKind::Cylinder && points.dim() != 3) throw InputError("cylinder fitting needs points in R^3");
        if (kind == ShapeKind::TwoLines && points.dim() != 2) throw InputError("two-lines fitting needs planar points");
        for (int axis = 0; axis < points.dim(); ++axis) charts.push_back(line_chart(points, axis, objective));
        break;
    case ShapeKind::FlatMedian:
        throw InputError("flat-median fitting takes flats, not points");
    }
    return finish(charts, settings, objective, points.size(), t0);
}

FitResult oracle_fit_flats(const std::vector<Flat>& flats, int dim, Objective objective,
                           const OracleSettings& settings)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (flats.empty()) throw InputError("oracle_fit_flats: no flats");
    if (settings.restarts == 0) throw InputError("oracle_fit_flats: restarts must be positive");
    for (const auto& f : flats) validate_flat(f, dim);
    const ladder::SearchRegion region = search_region(flats, dim);
    ChartProblem prob;
    prob.dim = static_cast<std::size_t>(dim);
    prob.lo = region.lo;
    prob.hi = region.hi;
    auto to_point = [dim](const std::vector<double>& x) {
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        for (int i = 0; i < dim; ++i) p[i] = x[static_cast<std::size_t>(i)];
        return p;
    };
    prob.cost = [&flats, to_point, objective](const std::vector<double>& x) {
        const Eigen::Vector3d p = to_point(x);
        long double c = 0.0L;
        for (const auto& f : flats) {
            const long double d = point_flat_distance(p, f);
            c += objective == Objective::L1 ? d : d * d;
        }
        return static_cast<double>(c);
    };
    prob.shape = [to_point, dim](const std::vector<double>& x) -> Shape { return MedianPoint{dim, to_point(x)}; };
    std::vector<ChartProblem> charts{std::move(prob)};
    return finish(charts, settings, objective, flats.size(), t0);
}

std::string_view to_string(InstanceKind kind)
{
    switch (kind) {
    case InstanceKind::Circle: return "circle";
    case InstanceKind::Sphere: return "sphere";
    case InstanceKind::Cylinder: return "cylinder";
    case InstanceKind::Lines: return "lines";
    case InstanceKind::Flats: return "flats";
    case InstanceKind::Stack1D: return "stack-1d";
    }
    return "unknown";
}

InstanceKind parse_instance_kind(std::string_view text)
{
    if (text == "circle") return InstanceKind::Circle;
    if (text == "sphere") return InstanceKind::Sphere;
    if (text == "cylinder") return InstanceKind::Cylinder;
    if (text == "lines") return InstanceKind::Lines;
    if (text == "flats") return InstanceKind::Flats;
    if (text == "stack-1d") return InstanceKind::Stack1D;
    throw InputError("unknown instance kind '" + std::string(text) + "'");
}

void InstanceSpec::validate() const
{
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw InputError("noise must be a finite nonnegative number");
    if (!(outlier_frac >= 0.0 && outlier_frac < 1.0)) throw InputError("outlier fraction must lie in [0, 1)");
    if (!(outlier_box_scale > 0.0) || !std::isfinite(outlier_box_scale))
        throw InputError("outlier box scale must be positive");
    if (flat_dim != 2 && flat_dim != 3) throw InputError("flat dimension must be 2 or 3");
    if (n == 0) throw InputError("instance size must be positive");
}

std::size_t outlier_count(const InstanceSpec& spec)
{
    return static_cast<std::size_t>(std::llround(spec.outlier_frac * static_cast<double>(spec.n)));
}

namespace {

Eigen::Vector3d random_unit(std::mt19937_64& rng, int dim)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    do {
        for (int i = 0; i < dim; ++i) v[i] = g(rng);
    } while (v.norm() < 1e-9);
    return v.normalized();
}

/// A unit vector orthogonal to u, uniformly distributed in the orthogonal plane.
Eigen::Vector3d random_orthogonal(std::mt19937_64& rng, const Eigen::Vector3d& u)
{
    Eigen::Vector3d v;
    do {
        v = random_unit(rng, 3);
        v -= v.dot(u) * u;
    } while (v.norm() < 1e-6);
    return v.normalized();
}

} // namespace

Instance gen_instance(const InstanceSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };
    std::normal_distribution<double> noise(0.0, 1.0);
    auto jitter = [&]() { return spec.noise > 0.0 ? spec.noise * noise(rng) : 0.0; };

    Instance inst;
    const std::size_t outliers = spec.kind == InstanceKind::Stack1D ? 0 : std::min(outlier_count(spec), spec.n);
    const std::size_t inliers = spec.n - outliers;
    inst.outliers = outliers;

    if (spec.kind == InstanceKind::Stack1D) {
        inst.values.resize(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) inst.values[i] = static_cast<double>(i) + std::fabs(jitter());
        std::sort(inst.values.begin(), inst.values.end());
        return inst;
    }

    if (spec.kind == InstanceKind::Flats) {
        const int dim = spec.flat_dim;
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int i = 0; i < dim; ++i) c[i] = uni(-1.0, 1.0);
        inst.truth = MedianPoint{dim, c};
        Eigen::Vector3d lo = c;
        Eigen::Vector3d hi = c;
        for (std::size_t i = 0; i < inliers; ++i) {
            Flat f;
            const Eigen::Vector3d u = random_unit(rng, dim);
            f.basis.push_back(u);
            Eigen::Vector3d a = c + uni(-1.0, 1.0) * u;
            for (int k = 0; k < dim; ++k) a[k] += jitter();
            f.anchor = a;
            lo = lo.cwiseMin(a);
            hi = hi.cwiseMax(a);
            inst.flats.push_back(std::move(f));
        }
        const Eigen::Vector3d mid = (lo + hi) / 2.0;
        const Eigen::Vector3d half = (hi - lo) / 2.0 * spec.outlier_box_scale;
        for (std::size_t i = 0; i < outliers; ++i) {
            Flat f;
            f.basis.push_back(random_unit(rng, dim));
            for (int k = 0; k < dim; ++k) f.anchor[k] = uni(mid[k] - half[k], mid[k] + half[k]);
            inst.flats.push_back(std::move(f));
        }
        return inst;
    }

    const int dim = (spec.kind == InstanceKind::Circle || spec.kind == InstanceKind::Lines) ? 2 : 3;
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(spec.n);
    switch (spec.kind) {
    case InstanceKind::Circle: {
        const Eigen::Vector2d c(uni(-1.0, 1.0), uni(-1.0, 1.0));
        const double r = uni(0.75, 1.25);
        inst.truth = Circle{c, r};
        for (std::size_t i = 0; i < inliers; ++i) {
            const double t = uni(0.0, 2.0 * std::numbers::pi);
            const double rr = r + jitter();
            pts.emplace_back(c.x() + rr * std::cos(t), c.y() + rr * std::sin(t), 0.0);
        }
        break;
    }
    case InstanceKind::Sphere: {
        const Eigen::Vector3d c(uni(-1.0, 1.0), uni(-1.0, 1.0), uni(-1.0, 1.0));
        const double r = uni(0.75, 1.25);
        inst.truth = Sphere{c, r};
        for (std::size_t i = 0; i < inliers; ++i) {
            const Eigen::Vector3d u = random_unit(rng, 3);
            pts.push_back(c + (r + jitter()) * u);
        }
        break;
    }
    case InstanceKind::Cylinder: {
        const Eigen::Vector3d a(uni(-1.0, 1.0), uni(-1.0, 1.0), uni(-1.0, 1.0));
        const Eigen::Vector3d u = random_unit(rng, 3);
        const double r = uni(0.5, 1.0);
        inst.truth = Cylinder{a, u, r};
        for (std::size_t i = 0; i < inliers; ++i) {
            const double t = uni(-1.5, 1.5);
            const Eigen::Vector3d v = random_orthogonal(rng, u);
            pts.push_back(a + t * u + (r + jitter()) * v);
        }
        break;
    }
    case InstanceKind::Lines: {
        const Eigen::Vector2d c(uni(-1.0, 1.0), uni(-1.0, 1.0));
        const double theta = uni(0.0, std::numbers::pi);
        const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
        const Eigen::Vector2d nrm(-u.y(), u.x());
        const double h = uni(0.5, 1.0);
        inst.truth = ParallelLines{c, u, h};
        for (std::size_t i = 0; i < inliers; ++i) {
            const double t = uni(-2.0, 2.0);
            const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
            const Eigen::Vector2d p = c + t * u + (side * h + jitter()) * nrm;
            pts.emplace_back(p.x(), p.y(), 0.0);
        }
        break;
    }
    default:
        break;
    }

    Eigen::Vector3d lo = Eigen::Vector3d::Zero();
    Eigen::Vector3d hi = Eigen::Vector3d::Zero();
    if (!pts.empty()) {
        lo = hi = pts.front();
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    }
    const Eigen::Vector3d mid = (lo + hi) / 2.0;
    const Eigen::Vector3d half = (hi - lo) / 2.0 * spec.outlier_box_scale;
    for (std::size_t i = 0; i < outliers; ++i) {
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        for (int k = 0; k < dim; ++k) p[k] = uni(mid[k] - half[k], mid[k] + half[k]);
        pts.push_back(p);
    }
    inst.points = PointSet(dim, std::move(pts));
    return inst;
}

std::vector<double> gen_values_1d(Distribution1D dist, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<double> v(n);
    switch (dist) {
    case Distribution1D::Uniform: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& x : v) x = u(rng);
        break;
    }
    case Distribution1D::Clustered: {
        constexpr int kClusters = 5;
        std::uniform_real_distribution<double> centers(0.0, 100.0);
        double c[kClusters];
        for (double& x : c) x = centers(rng);
        std::uniform_int_distribution<int> pick(0, kClusters - 1);
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto& x : v) x = c[pick(rng)] + g(rng);
        break;
    }
    case Distribution1D::HeavyTailed: {
        std::cauchy_distribution<double> cauchy(0.0, 1.0);
        for (auto& x : v) {
            do {
                x = cauchy(rng);
            } while (!std::isfinite(x) || std::fabs(x) > 1e12);
        }
        break;
    }
    }
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace medianshape::testkit
