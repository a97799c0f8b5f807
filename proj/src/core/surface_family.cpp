#include "medianshape/surface_family.hpp"

#include "medianshape/errors.hpp"
#include "medianshape/summation.hpp"

#include <cmath>
#include <string>

namespace medianshape {

std::string_view to_string(SurfaceKind kind)
{
    switch (kind) {
    case SurfaceKind::CircleCone: return "circle-cone";
    case SurfaceKind::SphereCone: return "sphere-cone";
    case SurfaceKind::Cylinder: return "cylinder";
    case SurfaceKind::FlatMedian: return "flat-median";
    case SurfaceKind::Stack1D: return "explicit-1d-stack";
    }
    return "unknown";
}

std::size_t line_chart_dim(int dim)
{
    return dim == 2 ? 2 : 4;
}

Line decode_line_chart(int dim, int axis, double offset, std::span<const double> base)
{
    Line line;
    line.point.setZero();
    line.dir.setZero();
    line.point[axis] = offset;
    line.dir[axis] = 1.0;
    if (dim == 2) {
        const int b = 1 - axis;
        line.point[b] = base[0];
        line.dir[b] = std::tan(base[1]);
    } else {
        const int b = (axis + 1) % 3;
        const int c = (axis + 2) % 3;
        line.point[b] = base[0];
        line.point[c] = base[1];
        line.dir[b] = std::tan(base[2]);
        line.dir[c] = std::tan(base[3]);
    }
    line.dir.normalize();
    return line;
}

double distance_to_line(const Line& line, const Eigen::Vector3d& p)
{
    const Eigen::Vector3d r = p - line.point;
    return (r - r.dot(line.dir) * line.dir).norm();
}

void SurfaceFamily::set_weights(Weights weights, std::size_t n)
{
    if (weights.empty()) weights.assign(n, 1);
    if (weights.size() != n) {
        throw InputError("expected " + std::to_string(n) + " weights, got " +
                         std::to_string(weights.size()));
    }
    total_weight_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] <= 0) {
            throw InputError("weight of member " + std::to_string(i) + " is not positive");
        }
        total_weight_ += weights[i];
    }
    weights_ = std::move(weights);
}

SurfaceFamily SurfaceFamily::circle_cones(const PointSet& points, Weights weights)
{
    if (points.dim() != 2) throw InputError("circle cones need planar points");
    SurfaceFamily f;
    f.kind_ = SurfaceKind::CircleCone;
    f.base_dim_ = 2;
    f.point_dim_ = 2;
    f.sources_ = points.points();
    f.set_weights(std::move(weights), points.size());
    return f;
}

SurfaceFamily SurfaceFamily::sphere_cones(const PointSet& points, Weights weights)
{
    if (points.dim() != 3) throw InputError("sphere cones need points in R^3");
    SurfaceFamily f;
    f.kind_ = SurfaceKind::SphereCone;
    f.base_dim_ = 3;
    f.point_dim_ = 3;
    f.sources_ = points.points();
    f.set_weights(std::move(weights), points.size());
    return f;
}

SurfaceFamily SurfaceFamily::cylinders(const PointSet& points, int dominant_axis, Weights weights)
{
    if (dominant_axis < 0 || dominant_axis >= points.dim()) {
        throw InputError("dominant axis " + std::to_string(dominant_axis) +
                         " out of range for dimension " + std::to_string(points.dim()));
    }
    SurfaceFamily f;
    f.kind_ = SurfaceKind::Cylinder;
    f.point_dim_ = points.dim();
    f.base_dim_ = line_chart_dim(points.dim());
    f.axis_ = dominant_axis;
    f.chart_offset_ = points.centroid()[dominant_axis];
    f.sources_ = points.points();
    f.set_weights(std::move(weights), points.size());
    return f;
}

SurfaceFamily SurfaceFamily::flats(std::vector<Flat> flats, int dim, Weights weights)
{
    if (dim != 2 && dim != 3) throw InputError("flats must live in R^2 or R^3");
    for (const auto& fl : flats) validate_flat(fl, dim);
    SurfaceFamily f;
    f.kind_ = SurfaceKind::FlatMedian;
    f.point_dim_ = dim;
    f.base_dim_ = static_cast<std::size_t>(dim);
    const std::size_t n = flats.size();
    f.flats_ = std::move(flats);
    f.set_weights(std::move(weights), n);
    return f;
}

SurfaceFamily SurfaceFamily::stack(std::vector<double> values, Weights weights, std::size_t base_dim)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            throw InputError("stack value " + std::to_string(i) + " must be finite and nonnegative");
        }
    }
    SurfaceFamily f;
    f.kind_ = SurfaceKind::Stack1D;
    f.base_dim_ = base_dim;
    const std::size_t n = values.size();
    f.constants_ = std::move(values);
    f.set_weights(std::move(weights), n);
    return f;
}

std::int64_t SurfaceFamily::weight(std::size_t i) const
{
    if (i >= weights_.size()) throw IndexError("member index " + std::to_string(i) + " out of range");
    return weights_[i];
}

void SurfaceFamily::check_base(std::span<const double> base) const
{
    if (base.size() != base_dim_) {
        throw InputError("base has " + std::to_string(base.size()) + " components, family expects " +
                         std::to_string(base_dim_));
    }
}

Line SurfaceFamily::line_at(std::span<const double> base) const
{
    if (kind_ != SurfaceKind::Cylinder) throw InputError("line_at: family is not a cylinder family");
    check_base(base);
    return decode_line_chart(point_dim_, axis_, chart_offset_, base);
}

double SurfaceFamily::value_unchecked(std::size_t i, std::span<const double> base,
                                      const Line& line) const
{
    switch (kind_) {
    case SurfaceKind::CircleCone: {
        const double dx = sources_[i].x() - base[0];
        const double dy = sources_[i].y() - base[1];
        return std::sqrt(dx * dx + dy * dy);
    }
    case SurfaceKind::SphereCone: {
        const double dx = sources_[i].x() - base[0];
        const double dy = sources_[i].y() - base[1];
        const double dz = sources_[i].z() - base[2];
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    case SurfaceKind::Cylinder:
        return distance_to_line(line, sources_[i]);
    case SurfaceKind::FlatMedian: {
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        for (std::size_t c = 0; c < base_dim_; ++c) p[static_cast<Eigen::Index>(c)] = base[c];
        return flats_[i].distance(p);
    }
    case SurfaceKind::Stack1D:
        return constants_[i];
    }
    return 0.0;
}

double SurfaceFamily::surface_value(std::size_t i, std::span<const double> base) const
{
    if (i >= size()) throw IndexError("member index " + std::to_string(i) + " out of range");
    check_base(base);
    Line line;
    if (kind_ == SurfaceKind::Cylinder) line = decode_line_chart(point_dim_, axis_, chart_offset_, base);
    return value_unchecked(i, base, line);
}

void SurfaceFamily::values_at(std::span<const double> base, std::span<double> out) const
{
    check_base(base);
    if (out.size() != size()) throw InputError("values_at: output span has the wrong size");
    Line line;
    if (kind_ == SurfaceKind::Cylinder) line = decode_line_chart(point_dim_, axis_, chart_offset_, base);
    for (std::size_t i = 0; i < size(); ++i) out[i] = value_unchecked(i, base, line);
}

void SurfaceFamily::heights_at(std::span<const double> base, std::vector<WeightedValue>& out) const
{
    check_base(base);
    Line line;
    if (kind_ == SurfaceKind::Cylinder) line = decode_line_chart(point_dim_, axis_, chart_offset_, base);
    out.resize(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = {value_unchecked(i, base, line), weights_[i]};
}

double cost_l1(const SurfaceFamily& family, const ParamPoint& p)
{
    return model_cost(family, p, Objective::L1);
}

double cost_l2(const SurfaceFamily& family, const ParamPoint& p)
{
    return model_cost(family, p, Objective::L2);
}

} // namespace medianshape
