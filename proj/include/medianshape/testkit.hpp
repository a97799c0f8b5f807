#pragma once

#include "medianshape/fitters.hpp"
#include "medianshape/geometry.hpp"
#include "medianshape/vertical_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace medianshape::testkit {

/// Direct summation of w * |v - query| or w * (v - query)^2.
double oracle_1d(std::span<const WeightedValue> values, double query, Objective objective);

struct Minimum1D {
    double minimizer = 0.0;
    double minimum = 0.0;
};

/// Exact minimizer: lower weighted median (L1) or weighted mean (L2).
Minimum1D oracle_1d_minimize(std::span<const WeightedValue> values, Objective objective);

struct OracleSettings {
    /// Multistart lattice nodes per axis (0: default for the chart dimension).
    std::size_t resolution = 0;
    std::size_t restarts = 8;
    std::uint64_t seed = 0;
    /// Rerun with doubled resolution and restarts; flag the result if the cost moves > 0.5%.
    bool self_check = true;
};

/// Brute-force reference: dense multistart lattice over the fitters' chart followed by a
/// randomized pattern search on the exact cost.
FitResult oracle_fit(const PointSet& points, ShapeKind kind, Objective objective,
                     const OracleSettings& settings = {});
FitResult oracle_fit_flats(const std::vector<Flat>& flats, int dim, Objective objective,
                           const OracleSettings& settings = {});

enum class InstanceKind { Circle, Sphere, Cylinder, Lines, Flats, Stack1D };

std::string_view to_string(InstanceKind kind);
InstanceKind parse_instance_kind(std::string_view text);

struct InstanceSpec {
    InstanceKind kind = InstanceKind::Circle;
    std::size_t n = 100;
    /// Gaussian sigma of the perpendicular / radial noise, world units.
    double noise = 0.0;
    double outlier_frac = 0.0;
    /// Outliers are uniform in the inlier bounding box scaled by this factor about its center.
    double outlier_box_scale = 2.0;
    std::uint64_t seed = 0;
    /// Ambient dimension for Flats (2 or 3).
    int flat_dim = 2;

    void validate() const;
};

/// Generated data. `points` for circle/sphere/cylinder/lines, `flats` for Flats, `values`
/// for Stack1D. Outliers come after the inliers.
struct Instance {
    PointSet points;
    std::vector<Flat> flats;
    std::vector<double> values;
    std::optional<Shape> truth;
    std::size_t outliers = 0;
};

/// round(outlier_frac * n).
std::size_t outlier_count(const InstanceSpec& spec);

Instance gen_instance(const InstanceSpec& spec);

enum class Distribution1D { Uniform, Clustered, HeavyTailed };

/// n sorted samples from the distribution.
std::vector<double> gen_values_1d(Distribution1D dist, std::size_t n, std::uint64_t seed);

} // namespace medianshape::testkit
