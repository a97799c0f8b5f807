#include "medianshape/geometry.hpp"

#include "medianshape/errors.hpp"
#include "medianshape/summation.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

namespace medianshape {

std::string_view to_string(Objective objective)
{
    return objective == Objective::L1 ? "l1" : "l2";
}

Objective parse_objective(std::string_view text)
{
    if (text == "l1") return Objective::L1;
    if (text == "l2") return Objective::L2;
    throw InputError("unknown objective '" + std::string(text) + "' (expected l1 or l2)");
}

PointSet::PointSet(int dim, std::vector<Eigen::Vector3d> points)
    : dim_(dim), points_(std::move(points))
{
    if (dim_ != 2 && dim_ != 3) {
        throw InputError("point dimension must be 2 or 3, got " + std::to_string(dim_));
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        auto& p = points_[i];
        if (!p.allFinite()) {
            throw InputError("point " + std::to_string(i) + " has a non-finite coordinate");
        }
        if (dim_ == 2) p.z() = 0.0;
    }
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows)
{
    if (rows.empty()) return PointSet(2, {});
    const std::size_t dim = rows.front().size();
    if (dim != 2 && dim != 3) {
        throw InputError("point dimension must be 2 or 3, got " + std::to_string(dim));
    }
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) {
            throw InputError("point " + std::to_string(i) + " has " +
                             std::to_string(rows[i].size()) + " coordinates, expected " +
                             std::to_string(dim));
        }
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        for (std::size_t c = 0; c < dim; ++c) p[static_cast<Eigen::Index>(c)] = rows[i][c];
        pts.push_back(p);
    }
    return PointSet(static_cast<int>(dim), std::move(pts));
}

Eigen::Vector3d PointSet::centroid() const
{
    if (points_.empty()) return Eigen::Vector3d::Zero();
    CompensatedSum s[3];
    for (const auto& p : points_) {
        for (int c = 0; c < 3; ++c) s[c] += p[c];
    }
    const double n = static_cast<double>(points_.size());
    return {s[0].value() / n, s[1].value() / n, s[2].value() / n};
}

Eigen::Vector3d PointSet::bbox_min() const
{
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    for (const auto& p : points_) lo = lo.cwiseMin(p);
    return points_.empty() ? Eigen::Vector3d::Zero() : lo;
}

Eigen::Vector3d PointSet::bbox_max() const
{
    Eigen::Vector3d hi = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());
    for (const auto& p : points_) hi = hi.cwiseMax(p);
    return points_.empty() ? Eigen::Vector3d::Zero() : hi;
}

double PointSet::diameter() const
{
    return (bbox_max() - bbox_min()).norm();
}

PointSet PointSet::translated(const Eigen::Vector3d& t) const
{
    std::vector<Eigen::Vector3d> pts = points_;
    Eigen::Vector3d shift = t;
    if (dim_ == 2) shift.z() = 0.0;
    for (auto& p : pts) p += shift;
    return PointSet(dim_, std::move(pts));
}

double Flat::distance(const Eigen::Vector3d& p) const
{
    Eigen::Vector3d r = p - anchor;
    const Eigen::Vector3d d = r;
    for (const auto& v : basis) r -= d.dot(v) * v;
    return r.norm();
}

void validate_flat(const Flat& flat, int dim, double tol)
{
    if (!flat.anchor.allFinite()) throw InputError("flat anchor has a non-finite coordinate");
    if (dim == 2 && flat.anchor.z() != 0.0) throw InputError("flat anchor is not planar");
    if (static_cast<int>(flat.basis.size()) >= dim) {
        throw InputError("flat basis must have fewer than " + std::to_string(dim) + " vectors");
    }
    for (std::size_t i = 0; i < flat.basis.size(); ++i) {
        const auto& v = flat.basis[i];
        if (dim == 2 && v.z() != 0.0) throw InputError("flat basis vector is not planar");
        for (std::size_t j = i; j < flat.basis.size(); ++j) {
            const double expected = (i == j) ? 1.0 : 0.0;
            if (std::abs(v.dot(flat.basis[j]) - expected) > tol) {
                throw InputError("flat basis is not orthonormal (vectors " + std::to_string(i) +
                                 ", " + std::to_string(j) + ")");
            }
        }
    }
}

std::string_view shape_kind(const Shape& shape)
{
    return std::visit(
        [](const auto& s) -> std::string_view {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) return "circle";
            else if constexpr (std::is_same_v<T, Sphere>) return "sphere";
            else if constexpr (std::is_same_v<T, Cylinder>) return "cylinder";
            else if constexpr (std::is_same_v<T, ParallelLines>) return "two-lines";
            else return "median-point";
        },
        shape);
}

double distance_to_shape(const Shape& shape, const Eigen::Vector3d& p)
{
    return std::visit(
        [&p](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return std::abs((p.head<2>() - s.center).norm() - s.radius);
            } else if constexpr (std::is_same_v<T, Sphere>) {
                return std::abs((p - s.center).norm() - s.radius);
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                const Eigen::Vector3d r = p - s.axis_point;
                return std::abs((r - r.dot(s.axis_dir) * s.axis_dir).norm() - s.radius);
            } else if constexpr (std::is_same_v<T, ParallelLines>) {
                const Eigen::Vector2d r = p.head<2>() - s.point;
                const double off = std::abs(r.x() * s.direction.y() - r.y() * s.direction.x());
                return std::abs(off - s.half_separation);
            } else {
                return (p - s.coords).norm();
            }
        },
        shape);
}

double shape_cost(const Shape& shape, const PointSet& points, Objective objective)
{
    CompensatedSum sum;
    for (const auto& p : points.points()) {
        const double d = distance_to_shape(shape, p);
        sum += objective == Objective::L1 ? d : d * d;
    }
    return sum.value();
}

double flat_median_cost(const MedianPoint& point, const std::vector<Flat>& flats,
                        Objective objective)
{
    CompensatedSum sum;
    for (const auto& f : flats) {
        const double d = f.distance(point.coords);
        sum += objective == Objective::L1 ? d : d * d;
    }
    return sum.value();
}

bool approx_eq(double x, double y, double eps)
{
    if (!(eps > 0.0 && eps < 0.25)) throw InputError("approx_eq: eps must lie in (0, 1/4)");
    if (x < 0.0 || y < 0.0) throw InputError("approx_eq: arguments must be nonnegative");
    return (1.0 - eps) * x <= y && y <= (1.0 + eps) * x && (1.0 - eps) * y <= x &&
           x <= (1.0 + eps) * y;
}

} // namespace medianshape
