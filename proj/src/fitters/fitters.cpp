#include "medianshape/fitters.hpp"

#include "medianshape/errors.hpp"
#include "medianshape/levels.hpp"
#include "medianshape/testkit.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

namespace medianshape {

std::string_view to_string(Method method)
{
    switch (method) {
    case Method::Pipeline: return "pipeline";
    case Method::Direct: return "direct";
    case Method::Oracle: return "oracle";
    }
    return "unknown";
}

Method parse_method(std::string_view text)
{
    if (text == "pipeline") return Method::Pipeline;
    if (text == "direct") return Method::Direct;
    if (text == "oracle") return Method::Oracle;
    throw InputError("unknown method '" + std::string(text) + "' (expected pipeline, direct or oracle)");
}

std::string_view to_string(ShapeKind kind)
{
    switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::FlatMedian: return "flat-median";
    case ShapeKind::TwoLines: return "two-lines";
    }
    return "unknown";
}

ShapeKind parse_shape_kind(std::string_view text)
{
    if (text == "circle") return ShapeKind::Circle;
    if (text == "sphere") return ShapeKind::Sphere;
    if (text == "cylinder") return ShapeKind::Cylinder;
    if (text == "flat-median") return ShapeKind::FlatMedian;
    if (text == "two-lines") return ShapeKind::TwoLines;
    throw InputError("unknown shape '" + std::string(text) + "'");
}

void FitConfig::validate() const
{
    if (!(eps > 0.0 && eps < 0.25)) throw InputError("eps must lie in (0, 1/4), got " + std::to_string(eps));
    if (!(chernoff_c > 0.0) || !(m_c > 0.0)) throw InputError("chernoff_c and m_c must be positive");
    if (budget == 0) throw InputError("budget must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr double kAngleLimit = std::numbers::pi / 3.0;

double safe_scale(double diameter)
{
    return diameter > 0.0 ? diameter : 1.0;
}

struct Attempt {
    ParamPoint point;
    double search_cost = std::numeric_limits<double>::infinity();
    bool zero_cost = false;
    bool budget_exhausted = false;
    double reduction_ms = 0.0;
    double search_ms = 0.0;
};

// Reduction (pipeline only), stab, ladder and ladder-guided search over one chart.
Attempt run_chart(const SurfaceFamily& family, const ladder::SearchRegion& region, const FitConfig& cfg,
                  double diameter, std::optional<double> fixed_height)
{
    Attempt out;
    auto t0 = Clock::now();
    std::unique_ptr<levels::Gradation> gradation;
    levels::LevelPlan plan;
    std::unique_ptr<levels::ReducedModel> reduced;
    const VerticalModel* scorer = &family;
    if (cfg.method == Method::Pipeline) {
        gradation = std::make_unique<levels::Gradation>(levels::build_gradation(family, cfg.seed));
        plan = levels::plan_levels(family.size(), cfg.eps, *gradation, {cfg.chernoff_c, cfg.m_c});
        reduced = std::make_unique<levels::ReducedModel>(family, *gradation, plan);
        scorer = reduced.get();
    }
    out.reduction_ms = ms_since(t0);

    t0 = Clock::now();
    const std::size_t g = cfg.grid == 0 ? ladder::default_grid(region.dim()) : cfg.grid;
    const ladder::StabInfo stab = ladder::find_stab(*scorer, region, std::max<std::size_t>(g, 2), fixed_height);
    if (stab.length <= 1e-12 * safe_scale(diameter)) {
        out.point = {stab.base, fixed_height.value_or(stab.mid_height)};
        out.zero_cost = true;
        out.search_cost = model_cost(family, out.point, cfg.objective);
    } else {
        const ladder::Ladder lad = ladder::build_ladder(stab.length, scorer->total_weight(), cfg.eps);
        ladder::MinimizeSettings ms;
        ms.eps = cfg.eps;
        ms.objective = cfg.objective;
        ms.grid = cfg.grid;
        ms.top_k = cfg.top_k;
        ms.budget = cfg.budget;
        ms.seed = cfg.seed;
        ms.fixed_height = fixed_height;
        const ladder::MinimizeResult r = ladder::minimize(*scorer, family, lad, region, ms);
        out.point = r.point;
        out.search_cost = r.cost;
        out.budget_exhausted = r.budget_exhausted;
    }
    out.search_ms = ms_since(t0);
    return out;
}

/// Direction of the line through all points, when they are collinear within a relative 1e-12.
std::optional<Eigen::Vector3d> common_line(const PointSet& points)
{
    const Eigen::Vector3d& a = points[0];
    std::size_t far = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if ((points[i] - a).norm() > (points[far] - a).norm()) far = i;
    }
    const double reach = (points[far] - a).norm();
    if (reach == 0.0) return Eigen::Vector3d::UnitX();
    const Eigen::Vector3d u = (points[far] - a) / reach;
    for (const auto& p : points.points()) {
        const Eigen::Vector3d d = p - a;
        if ((d - d.dot(u) * u).norm() > 1e-12 * reach) return std::nullopt;
    }
    return u;
}

FitResult make_result(const FitConfig& cfg, std::size_t n)
{
    FitResult r;
    r.objective = cfg.objective;
    r.eps = cfg.eps;
    r.method = cfg.method;
    r.seed = cfg.seed;
    r.n = n;
    return r;
}

FitResult fit_point_shape(ShapeKind kind, const PointSet& points, const FitConfig& cfg)
{
    cfg.validate();
    const auto t0 = Clock::now();
    if (points.empty()) throw InputError("cannot fit a shape to an empty point set");

    if (cfg.method == Method::Oracle) {
        testkit::OracleSettings os;
        os.seed = cfg.seed;
        FitResult r = testkit::oracle_fit(points, kind, cfg.objective, os);
        r.eps = cfg.eps;
        r.elapsed_ms = ms_since(t0);
        return r;
    }

    FitResult result = make_result(cfg, points.size());
    if (points.size() == 1 && kind != ShapeKind::TwoLines) {
        const Eigen::Vector3d& p = points[0];
        if (kind == ShapeKind::Circle) result.shape = Circle{p.head<2>(), 0.0};
        else if (kind == ShapeKind::Sphere) result.shape = Sphere{p, 0.0};
        else result.shape = Cylinder{p, Eigen::Vector3d::UnitZ(), 0.0};
        result.cost = 0.0;
        result.flags.zero_cost_shortcut = true;
        result.elapsed_ms = ms_since(t0);
        return result;
    }

    if (kind == ShapeKind::Cylinder || kind == ShapeKind::TwoLines) {
        if (const auto u = common_line(points)) {
            const Eigen::Vector3d& p = points[0];
            if (kind == ShapeKind::Cylinder) result.shape = Cylinder{p, *u, 0.0};
            else result.shape = ParallelLines{p.head<2>(), u->head<2>(), 0.0};
            result.cost = shape_cost(result.shape, points, cfg.objective);
            result.flags.zero_cost_shortcut = true;
            result.elapsed_ms = ms_since(t0);
            return result;
        }
    }

    const int axes = (kind == ShapeKind::Cylinder || kind == ShapeKind::TwoLines) ? points.dim() : 1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < axes; ++axis) {
        const SurfaceFamily family = family_for(kind, points, axis);
        const ladder::SearchRegion region = search_region(family, points);
        const Attempt a = run_chart(family, region, cfg, points.diameter(), std::nullopt);
        result.reduction_ms += a.reduction_ms;
        result.search_ms += a.search_ms;
        result.flags.budget_exhausted = result.flags.budget_exhausted || a.budget_exhausted;
        const Shape shape = decode_shape(family, a.point);
        const double cost = shape_cost(shape, points, cfg.objective);
        if (cost < best_cost) {
            best_cost = cost;
            result.shape = shape;
            result.cost = cost;
            result.param = a.point;
            result.chart_axis = axes > 1 ? axis : -1;
            result.flags.zero_cost_shortcut = a.zero_cost;
        }
    }
    result.elapsed_ms = ms_since(t0);
    return result;
}

} // namespace

SurfaceFamily family_for(ShapeKind kind, const PointSet& points, int axis)
{
    switch (kind) {
    case ShapeKind::Circle: return SurfaceFamily::circle_cones(points);
    case ShapeKind::Sphere: return SurfaceFamily::sphere_cones(points);
    case ShapeKind::Cylinder:
        if (points.dim() != 3) throw InputError("cylinder fitting needs points in R^3");
        return SurfaceFamily::cylinders(points, axis);
    case ShapeKind::TwoLines:
        if (points.dim() != 2) throw InputError("two-lines fitting needs planar points");
        return SurfaceFamily::cylinders(points, axis);
    case ShapeKind::FlatMedian: break;
    }
    throw InputError("flat-median fitting takes flats, not points");
}

ladder::SearchRegion search_region(const SurfaceFamily& family, const PointSet& points)
{
    const double diam = safe_scale(points.diameter());
    const Eigen::Vector3d lo = points.bbox_min();
    const Eigen::Vector3d hi = points.bbox_max();
    ladder::SearchRegion region;
    region.height_lo = 0.0;
    region.height_hi = 2.0 * diam;
    auto push = [&](double a, double b) {
        region.lo.push_back(a - diam);
        region.hi.push_back(b + diam);
    };
    switch (family.kind()) {
    case SurfaceKind::CircleCone:
    case SurfaceKind::SphereCone:
        for (int c = 0; c < points.dim(); ++c) push(lo[c], hi[c]);
        break;
    case SurfaceKind::Cylinder: {
        const int axis = family.dominant_axis();
        if (points.dim() == 2) {
            push(lo[1 - axis], hi[1 - axis]);
            region.lo.push_back(-kAngleLimit);
            region.hi.push_back(kAngleLimit);
        } else {
            const int b = (axis + 1) % 3;
            const int c = (axis + 2) % 3;
            push(lo[b], hi[b]);
            push(lo[c], hi[c]);
            for (int t = 0; t < 2; ++t) {
                region.lo.push_back(-kAngleLimit);
                region.hi.push_back(kAngleLimit);
            }
        }
        break;
    }
    default:
        throw InputError("search_region: unsupported family kind");
    }
    return region;
}

ladder::SearchRegion search_region(const std::vector<Flat>& flats, int dim)
{
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& f : flats) {
        lo = lo.cwiseMin(f.anchor);
        hi = hi.cwiseMax(f.anchor);
    }
    const double diam = safe_scale((hi - lo).norm());
    ladder::SearchRegion region;
    for (int c = 0; c < dim; ++c) {
        region.lo.push_back(lo[c] - diam);
        region.hi.push_back(hi[c] + diam);
    }
    return region;
}

Shape decode_shape(const SurfaceFamily& family, const ParamPoint& p)
{
    switch (family.kind()) {
    case SurfaceKind::CircleCone:
        return Circle{Eigen::Vector2d(p.base.at(0), p.base.at(1)), std::max(0.0, p.height)};
    case SurfaceKind::SphereCone:
        return Sphere{Eigen::Vector3d(p.base.at(0), p.base.at(1), p.base.at(2)), std::max(0.0, p.height)};
    case SurfaceKind::Cylinder: {
        const Line line = family.line_at(p.base);
        if (family.point_dim() == 2) {
            return ParallelLines{line.point.head<2>(), line.dir.head<2>().normalized(), std::max(0.0, p.height)};
        }
        return Cylinder{line.point, line.dir, std::max(0.0, p.height)};
    }
    case SurfaceKind::FlatMedian: {
        MedianPoint m;
        m.dim = family.point_dim();
        for (std::size_t c = 0; c < p.base.size(); ++c) m.coords[static_cast<Eigen::Index>(c)] = p.base[c];
        return m;
    }
    case SurfaceKind::Stack1D: break;
    }
    throw InputError("decode_shape: stack families do not encode a shape");
}

FitResult fit_circle(const PointSet& points, const FitConfig& cfg)
{
    if (points.dim() != 2) throw InputError("circle fitting needs planar points");
    return fit_point_shape(ShapeKind::Circle, points, cfg);
}

FitResult fit_sphere(const PointSet& points, const FitConfig& cfg)
{
    if (points.dim() != 3) throw InputError("sphere fitting needs points in R^3");
    return fit_point_shape(ShapeKind::Sphere, points, cfg);
}

FitResult fit_cylinder(const PointSet& points, const FitConfig& cfg)
{
    if (points.dim() != 3) throw InputError("cylinder fitting needs points in R^3");
    return fit_point_shape(ShapeKind::Cylinder, points, cfg);
}

FitResult two_lines_fit(const PointSet& points, const FitConfig& cfg)
{
    if (points.dim() != 2) throw InputError("two-lines fitting needs planar points");
    if (points.size() < 2) throw InputError("two-lines fitting needs at least 2 points");
    return fit_point_shape(ShapeKind::TwoLines, points, cfg);
}

FitResult fit_points(ShapeKind kind, const PointSet& points, const FitConfig& cfg)
{
    switch (kind) {
    case ShapeKind::Circle: return fit_circle(points, cfg);
    case ShapeKind::Sphere: return fit_sphere(points, cfg);
    case ShapeKind::Cylinder: return fit_cylinder(points, cfg);
    case ShapeKind::TwoLines: return two_lines_fit(points, cfg);
    case ShapeKind::FlatMedian: break;
    }
    throw InputError("flat-median fitting takes flats, not points");
}

FitResult fit_flat_median(const std::vector<Flat>& flats, int dim, const FitConfig& cfg)
{
    cfg.validate();
    const auto t0 = Clock::now();
    if (flats.empty()) throw InputError("cannot fit a median to an empty set of flats");
    SurfaceFamily family = SurfaceFamily::flats(flats, dim);

    if (cfg.method == Method::Oracle) {
        testkit::OracleSettings os;
        os.seed = cfg.seed;
        FitResult r = testkit::oracle_fit_flats(flats, dim, cfg.objective, os);
        r.eps = cfg.eps;
        r.elapsed_ms = ms_since(t0);
        return r;
    }

    FitResult result = make_result(cfg, flats.size());
    const ladder::SearchRegion region = search_region(flats, dim);
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (const auto& f : flats) {
        lo = lo.cwiseMin(f.anchor);
        hi = hi.cwiseMax(f.anchor);
    }
    const Attempt a = run_chart(family, region, cfg, (hi - lo).norm(), 0.0);
    const MedianPoint m = std::get<MedianPoint>(decode_shape(family, a.point));
    result.shape = m;
    result.cost = flat_median_cost(m, flats, cfg.objective);
    result.param = a.point;
    result.reduction_ms = a.reduction_ms;
    result.search_ms = a.search_ms;
    result.flags.budget_exhausted = a.budget_exhausted;
    result.flags.zero_cost_shortcut = a.zero_cost;
    result.elapsed_ms = ms_since(t0);
    return result;
}

} // namespace medianshape
