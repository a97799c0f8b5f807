#pragma once

#include "medianshape/geometry.hpp"
#include "medianshape/vertical_model.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace medianshape {

enum class SurfaceKind { CircleCone, SphereCone, Cylinder, FlatMedian, Stack1D };

std::string_view to_string(SurfaceKind kind);

struct Line {
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    Eigen::Vector3d dir = Eigen::Vector3d::UnitZ();
};

/// Line chart used for cylinders (dim 3) and parallel-line pairs (dim 2).
///
/// The line crosses the hyperplane {x[axis] = offset}. In dim 3 the base is
/// (q_b, q_c, theta_b, theta_c) with b = axis+1, c = axis+2 (mod 3), and the direction is
/// e_axis + tan(theta_b) e_b + tan(theta_c) e_c, normalized. In dim 2 the base is
/// (q_b, theta) with b = 1 - axis. Directions orthogonal to the axis are not representable.
Line decode_line_chart(int dim, int axis, double offset, std::span<const double> base);
std::size_t line_chart_dim(int dim);

/// Distance from p to the line.
double distance_to_line(const Line& line, const Eigen::Vector3d& p);

/// A weighted family of distance surfaces over a parameter base space. Member i defines
/// f_i(base) >= 0; the vertical distance of (base, h) to it is |f_i(base) - h|.
///
/// Immutable after construction.
class SurfaceFamily final : public VerticalModel {
public:
    using Weights = std::vector<std::int64_t>;

    /// Cones over planar points; base = circle center, height = radius.
    static SurfaceFamily circle_cones(const PointSet& points, Weights weights = {});
    /// Cones over points in R^3; base = sphere center, height = radius.
    static SurfaceFamily sphere_cones(const PointSet& points, Weights weights = {});
    /// Distance-to-line surfaces in the line chart of `dominant_axis`. The chart hyperplane
    /// passes through the centroid of the points. height = radius (dim 3) or
    /// half-separation of a parallel-line pair (dim 2).
    static SurfaceFamily cylinders(const PointSet& points, int dominant_axis, Weights weights = {});
    /// Distance-to-flat surfaces; base = candidate median point in R^dim.
    static SurfaceFamily flats(std::vector<Flat> flats, int dim, Weights weights = {});
    /// Constant surfaces f_i == values[i] over a base space of the given dimension.
    static SurfaceFamily stack(std::vector<double> values, Weights weights = {},
                               std::size_t base_dim = 1);

    [[nodiscard]] SurfaceKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] std::size_t base_dim() const override { return base_dim_; }
    [[nodiscard]] std::int64_t total_weight() const override { return total_weight_; }
    [[nodiscard]] std::int64_t weight(std::size_t i) const;
    [[nodiscard]] const Weights& weights() const noexcept { return weights_; }
    [[nodiscard]] int point_dim() const noexcept { return point_dim_; }
    [[nodiscard]] int dominant_axis() const noexcept { return axis_; }
    [[nodiscard]] double chart_offset() const noexcept { return chart_offset_; }

    /// f_i(base). Throws IndexError / InputError.
    [[nodiscard]] double surface_value(std::size_t i, std::span<const double> base) const;

    /// f_i(base) for every member, written to out (size() entries).
    void values_at(std::span<const double> base, std::span<double> out) const;

    void heights_at(std::span<const double> base, std::vector<WeightedValue>& out) const override;

    /// The line encoded by `base` (cylinder kind only).
    [[nodiscard]] Line line_at(std::span<const double> base) const;

private:
    SurfaceFamily() = default;
    void set_weights(Weights weights, std::size_t n);
    void check_base(std::span<const double> base) const;
    [[nodiscard]] double value_unchecked(std::size_t i, std::span<const double> base,
                                         const Line& line) const;

    SurfaceKind kind_ = SurfaceKind::Stack1D;
    std::size_t base_dim_ = 1;
    int point_dim_ = 0;
    int axis_ = 0;
    double chart_offset_ = 0.0;
    std::vector<Eigen::Vector3d> sources_;
    std::vector<Flat> flats_;
    std::vector<double> constants_;
    Weights weights_;
    std::int64_t total_weight_ = 0;
};

/// Sum of w_i |f_i(base) - height|, compensated.
double cost_l1(const SurfaceFamily& family, const ParamPoint& p);
/// Sum of w_i (f_i(base) - height)^2, compensated.
double cost_l2(const SurfaceFamily& family, const ParamPoint& p);

} // namespace medianshape
