#pragma once

#include "medianshape/geometry.hpp"
#include "medianshape/ladder.hpp"
#include "medianshape/surface_family.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace medianshape {

enum class Method { Pipeline, Direct, Oracle };
enum class ShapeKind { Circle, Sphere, Cylinder, FlatMedian, TwoLines };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view text);

struct FitConfig {
    double eps = 0.1;
    Objective objective = Objective::L1;
    Method method = Method::Pipeline;
    std::uint64_t seed = 0;
    std::size_t budget = 400000;
    double chernoff_c = 4.0;
    double m_c = 1.0;
    /// Coarse grid cells per axis (0: default for the parameter dimension).
    std::size_t grid = 0;
    std::size_t top_k = 16;

    /// eps must lie in (0, 1/4).
    void validate() const;
};

struct FitFlags {
    bool budget_exhausted = false;
    bool zero_cost_shortcut = false;
    /// Oracle only: doubling resolution and restarts moved the cost by more than 0.5%.
    bool oracle_unstable = false;
};

struct FitResult {
    Shape shape;
    /// Exact cost of `shape` against the input, recomputed from scratch.
    double cost = 0.0;
    Objective objective = Objective::L1;
    double eps = 0.0;
    Method method = Method::Pipeline;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double elapsed_ms = 0.0;
    FitFlags flags;

    /// Parameter-space point of the winning chart (empty base for degenerate inputs).
    ParamPoint param;
    /// Dominant axis of the winning line chart (cylinder / two-lines), else -1.
    int chart_axis = -1;
    double reduction_ms = 0.0;
    double search_ms = 0.0;
};

FitResult fit_circle(const PointSet& points, const FitConfig& cfg);
FitResult fit_sphere(const PointSet& points, const FitConfig& cfg);
FitResult fit_cylinder(const PointSet& points, const FitConfig& cfg);
/// Two parallel lines minimizing the summed distance to the nearer line.
FitResult two_lines_fit(const PointSet& points, const FitConfig& cfg);
/// Point minimizing the summed (squared) distance to the flats.
FitResult fit_flat_median(const std::vector<Flat>& flats, int dim, const FitConfig& cfg);

/// Dispatch on kind for point inputs (not FlatMedian).
FitResult fit_points(ShapeKind kind, const PointSet& points, const FitConfig& cfg);

/// Default search box: the base-space bounding box of the input expanded by its diameter,
/// line-chart angles within +-pi/3, height in [0, 2 * diameter].
ladder::SearchRegion search_region(const SurfaceFamily& family, const PointSet& points);
ladder::SearchRegion search_region(const std::vector<Flat>& flats, int dim);

/// The surface family a point fit searches over; `axis` selects the line chart.
SurfaceFamily family_for(ShapeKind kind, const PointSet& points, int axis = 0);

/// The shape encoded by a parameter point of the family's chart.
Shape decode_shape(const SurfaceFamily& family, const ParamPoint& p);

} // namespace medianshape
