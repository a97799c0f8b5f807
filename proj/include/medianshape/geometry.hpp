#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace medianshape {

enum class Objective { L1, L2 };

std::string_view to_string(Objective objective);
Objective parse_objective(std::string_view text);

/// Points in R^2 or R^3. For dim == 2 the z coordinate is kept at 0.
class PointSet {
public:
    PointSet() = default;
    PointSet(int dim, std::vector<Eigen::Vector3d> points);

    /// Builds from coordinate rows; every row must have the same length (2 or 3).
    static PointSet from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
    [[nodiscard]] const Eigen::Vector3d& operator[](std::size_t i) const { return points_[i]; }
    [[nodiscard]] const std::vector<Eigen::Vector3d>& points() const noexcept { return points_; }

    [[nodiscard]] Eigen::Vector3d centroid() const;
    [[nodiscard]] Eigen::Vector3d bbox_min() const;
    [[nodiscard]] Eigen::Vector3d bbox_max() const;
    /// Length of the bounding-box diagonal.
    [[nodiscard]] double diameter() const;

    [[nodiscard]] PointSet translated(const Eigen::Vector3d& t) const;

private:
    int dim_ = 2;
    std::vector<Eigen::Vector3d> points_;
};

/// Affine subspace anchor + span(basis). Vectors live in R^dim (unused coordinates 0).
struct Flat {
    Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
    std::vector<Eigen::Vector3d> basis;

    [[nodiscard]] double distance(const Eigen::Vector3d& p) const;
};

/// Throws InputError unless the basis is orthonormal within `tol`.
void validate_flat(const Flat& flat, int dim, double tol = 1e-9);

/// A point in the lifted parameter space: base coordinates plus the vertical coordinate.
struct ParamPoint {
    std::vector<double> base;
    double height = 0.0;
};

struct Circle {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.0;
};

struct Sphere {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 0.0;
};

struct Cylinder {
    Eigen::Vector3d axis_point = Eigen::Vector3d::Zero();
    Eigen::Vector3d axis_dir = Eigen::Vector3d::UnitZ();
    double radius = 0.0;
};

/// Two parallel lines at distance half_separation on either side of a center line.
struct ParallelLines {
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
    Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
    double half_separation = 0.0;
};

struct MedianPoint {
    int dim = 2;
    Eigen::Vector3d coords = Eigen::Vector3d::Zero();
};

using Shape = std::variant<Circle, Sphere, Cylinder, ParallelLines, MedianPoint>;

std::string_view shape_kind(const Shape& shape);

/// Euclidean distance from p to the shape (for MedianPoint: to the point).
double distance_to_shape(const Shape& shape, const Eigen::Vector3d& p);

/// Sum of distances (L1) or squared distances (L2), compensated.
double shape_cost(const Shape& shape, const PointSet& points, Objective objective);

/// Sum of (squared) distances from the median point to each flat.
double flat_median_cost(const MedianPoint& point, const std::vector<Flat>& flats,
                        Objective objective);

/// x and y are (1 +- eps)-approximations of each other. eps must lie in (0, 1/4).
bool approx_eq(double x, double y, double eps);

} // namespace medianshape
