#pragma once

#include "medianshape/fitters.hpp"
#include "medianshape/geometry.hpp"
#include "medianshape/testkit.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace medianshape::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBudget = 3;

inline constexpr const char* kVersion = "0.1.0";

/// One point per line, comma-separated coordinates (2 or 3 per row, consistent), an optional
/// first line starting with '#'. `source` names the input in error messages.
PointSet parse_points_csv(std::istream& in, const std::string& source);
PointSet read_points_csv(const std::string& path);
void write_points_csv(std::ostream& out, const PointSet& points);

/// JSON array of {"anchor": [...], "basis": [[...], ...]}. Returns the ambient dimension via `dim`.
std::vector<Flat> parse_flats_json(const nlohmann::json& j, int& dim);
std::vector<Flat> read_flats_json(const std::string& path, int& dim);
nlohmann::json flats_to_json(const std::vector<Flat>& flats, int dim);

nlohmann::json shape_to_json(const Shape& shape);
Shape shape_from_json(const nlohmann::json& j);

struct Environment {
    std::string version = kVersion;
    std::uint64_t seed = 0;
    /// UTC, ISO 8601.
    std::string timestamp;
};

struct RunRecord {
    ShapeKind shape_kind = ShapeKind::Circle;
    std::string input;
    FitConfig config;
    FitResult result;
    Environment environment;
};

nlohmann::json to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

struct FitOptions {
    std::string shape = "circle";
    std::string input;
    std::string output;
    std::string objective = "l1";
    std::string method = "pipeline";
    FitConfig config;
};

struct GenOptions {
    std::string kind = "circle";
    testkit::InstanceSpec spec;
    std::string output;
    /// Optional JSON sidecar with the ground truth and outlier count.
    std::string truth;
};

struct BenchOptions {
    std::string shape = "circle";
    std::vector<std::size_t> sizes{1000, 10000};
    std::vector<double> eps{0.2};
    std::size_t repeats = 3;
    std::uint64_t seed = 0;
    double noise = 0.05;
    double outlier_frac = 0.0;
    std::string method = "pipeline";
    std::string output;
};

struct PlotOptions {
    std::string shape = "circle";
    std::string input;
    std::string output;
    std::string objective = "l1";
    std::string method = "pipeline";
    FitConfig config;
    /// Points per slice axis (odd values put the fitted optimum on a node).
    std::size_t grid = 21;
    /// Two parameter indices; index == base dimension selects the height coordinate.
    std::vector<std::size_t> axes{0, 1};
    /// Half-width of the slice per axis (0: a tenth of the input diameter).
    double span = 0.0;
};

/// Each command writes its payload to `out` (or the named output file) and diagnostics to `err`.
int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err);
int cmd_plot_data(const PlotOptions& opts, std::ostream& out, std::ostream& err);

/// 17 significant digits.
std::string format_double(double v);

} // namespace medianshape::cli
