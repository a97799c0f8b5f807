#include "medianshape/cli.hpp"

#include "medianshape/errors.hpp"
#include "medianshape/levels.hpp"
#include "medianshape/surface_family.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace medianshape::cli {

using nlohmann::json;

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& field, const std::string& source, std::size_t line)
{
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    if (!field.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw InputError(source + ":" + std::to_string(line) + ": not a finite number: '" + field + "'");
    }
    return v;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open output file: " + path);
    return f;
}

/// Writes to the named file when given, else to `fallback`.
template <typename Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write)
{
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream f = open_output(path);
    write(f);
    if (!f) throw InputError("failed writing " + path);
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json vec_json(const Eigen::Vector3d& v, int dim)
{
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(v[i]);
    return a;
}

Eigen::Vector3d vec_from_json(const json& a, int dim, const std::string& what)
{
    if (!a.is_array() || static_cast<int>(a.size()) != dim) {
        throw InputError(what + " must be an array of " + std::to_string(dim) + " numbers");
    }
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int i = 0; i < dim; ++i) {
        if (!a[static_cast<std::size_t>(i)].is_number()) throw InputError(what + " must contain numbers");
        v[i] = a[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

Eigen::Vector2d vec2(const json& a, const std::string& what)
{
    return vec_from_json(a, 2, what).head<2>();
}

json config_to_json(const FitConfig& c)
{
    return {{"eps", c.eps},         {"objective", to_string(c.objective)}, {"method", std::string(to_string(c.method))},
            {"seed", c.seed},       {"budget", c.budget},                  {"chernoff_c", c.chernoff_c},
            {"m_c", c.m_c},         {"grid", c.grid},                      {"top_k", c.top_k}};
}

FitConfig config_from_json(const json& j)
{
    FitConfig c;
    c.eps = j.at("eps").get<double>();
    c.objective = parse_objective(j.at("objective").get<std::string>());
    c.method = parse_method(j.at("method").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.budget = j.at("budget").get<std::size_t>();
    c.chernoff_c = j.at("chernoff_c").get<double>();
    c.m_c = j.at("m_c").get<double>();
    c.grid = j.at("grid").get<std::size_t>();
    c.top_k = j.at("top_k").get<std::size_t>();
    return c;
}

FitConfig resolved_config(FitConfig c, const std::string& objective, const std::string& method)
{
    c.objective = parse_objective(objective);
    c.method = parse_method(method);
    c.validate();
    return c;
}

struct LoadedInput {
    PointSet points;
    std::vector<Flat> flats;
    int flat_dim = 0;
};

LoadedInput load_input(ShapeKind kind, const std::string& path)
{
    LoadedInput in;
    if (kind == ShapeKind::FlatMedian) in.flats = read_flats_json(path, in.flat_dim);
    else in.points = read_points_csv(path);
    return in;
}

FitResult run_fit(ShapeKind kind, const LoadedInput& in, const FitConfig& cfg)
{
    if (kind == ShapeKind::FlatMedian) return fit_flat_median(in.flats, in.flat_dim, cfg);
    return fit_points(kind, in.points, cfg);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
    }
    return kExitInput;
}

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

PointSet parse_points_csv(std::istream& in, const std::string& source)
{
    std::vector<Eigen::Vector3d> pts;
    int dim = 0;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line_no == 1) continue;
            throw InputError(source + ":" + std::to_string(line_no) + ": header allowed only on the first line");
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.push_back(parse_number(trim(field), source, line_no));
        if (line.back() == ',') throw InputError(source + ":" + std::to_string(line_no) + ": trailing comma");
        if (row.size() != 2 && row.size() != 3) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected 2 or 3 coordinates, got " +
                             std::to_string(row.size()));
        }
        if (dim == 0) dim = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != dim) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                             " coordinates, got " + std::to_string(row.size()));
        }
        pts.emplace_back(row[0], row[1], dim == 3 ? row[2] : 0.0);
    }
    if (pts.empty()) throw InputError(source + ": no points");
    return PointSet(dim, std::move(pts));
}

PointSet read_points_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw InputError("cannot open input file: " + path);
    return parse_points_csv(f, path);
}

void write_points_csv(std::ostream& out, const PointSet& points)
{
    for (const auto& p : points.points()) {
        out << format_double(p.x()) << ',' << format_double(p.y());
        if (points.dim() == 3) out << ',' << format_double(p.z());
        out << '\n';
    }
}

std::vector<Flat> parse_flats_json(const json& j, int& dim)
{
    if (!j.is_array() || j.empty()) throw InputError("flats input must be a non-empty JSON array");
    dim = static_cast<int>(j.at(0).at("anchor").size());
    if (dim != 2 && dim != 3) throw InputError("flat anchors must have 2 or 3 coordinates");
    std::vector<Flat> flats;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string what = "flat " + std::to_string(i);
        Flat f;
        f.anchor = vec_from_json(j[i].at("anchor"), dim, what + " anchor");
        for (const auto& b : j[i].at("basis")) f.basis.push_back(vec_from_json(b, dim, what + " basis vector"));
        try {
            validate_flat(f, dim);
        } catch (const InputError& e) {
            throw InputError(what + ": " + e.what());
        }
        flats.push_back(std::move(f));
    }
    return flats;
}

std::vector<Flat> read_flats_json(const std::string& path, int& dim)
{
    std::ifstream f(path);
    if (!f) throw InputError("cannot open input file: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": malformed JSON: " + e.what());
    }
    return parse_flats_json(j, dim);
}

json flats_to_json(const std::vector<Flat>& flats, int dim)
{
    json a = json::array();
    for (const auto& f : flats) {
        json basis = json::array();
        for (const auto& b : f.basis) basis.push_back(vec_json(b, dim));
        a.push_back({{"anchor", vec_json(f.anchor, dim)}, {"basis", basis}});
    }
    return a;
}

json shape_to_json(const Shape& shape)
{
    json params = std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return {{"center", {s.center.x(), s.center.y()}}, {"radius", s.radius}};
            } else if constexpr (std::is_same_v<T, Sphere>) {
                return {{"center", vec_json(s.center, 3)}, {"radius", s.radius}};
            } else if constexpr (std::is_same_v<T, Cylinder>) {
                return {{"axis_point", vec_json(s.axis_point, 3)},
                        {"axis_dir", vec_json(s.axis_dir, 3)},
                        {"radius", s.radius}};
            } else if constexpr (std::is_same_v<T, ParallelLines>) {
                return {{"point", {s.point.x(), s.point.y()}},
                        {"direction", {s.direction.x(), s.direction.y()}},
                        {"half_separation", s.half_separation}};
            } else {
                return {{"point", vec_json(s.coords, s.dim)}};
            }
        },
        shape);
    return {{"kind", shape_kind(shape)}, {"params", params}};
}

Shape shape_from_json(const json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    const json& p = j.at("params");
    if (kind == "circle") return Circle{vec2(p.at("center"), "center"), p.at("radius").get<double>()};
    if (kind == "sphere") return Sphere{vec_from_json(p.at("center"), 3, "center"), p.at("radius").get<double>()};
    if (kind == "cylinder") {
        return Cylinder{vec_from_json(p.at("axis_point"), 3, "axis_point"),
                        vec_from_json(p.at("axis_dir"), 3, "axis_dir"), p.at("radius").get<double>()};
    }
    if (kind == "two-lines") {
        return ParallelLines{vec2(p.at("point"), "point"), vec2(p.at("direction"), "direction"),
                             p.at("half_separation").get<double>()};
    }
    if (kind == "median-point") {
        const int dim = static_cast<int>(p.at("point").size());
        return MedianPoint{dim, vec_from_json(p.at("point"), dim, "point")};
    }
    throw InputError("unknown shape kind '" + kind + "'");
}

json to_json(const RunRecord& r)
{
    const FitResult& f = r.result;
    json j = shape_to_json(f.shape);
    json out;
    out["shape"] = j;
    out["cost"] = f.cost;
    out["objective"] = to_string(f.objective);
    out["eps"] = f.eps;
    out["method"] = to_string(f.method);
    out["seed"] = f.seed;
    out["n"] = f.n;
    out["elapsed_ms"] = f.elapsed_ms;
    out["flags"] = {{"budget_exhausted", f.flags.budget_exhausted},
                    {"zero_cost_shortcut", f.flags.zero_cost_shortcut},
                    {"oracle_unstable", f.flags.oracle_unstable}};
    out["chart"] = {{"axis", f.chart_axis}, {"base", f.param.base}, {"height", f.param.height}};
    out["timings"] = {{"reduction_ms", f.reduction_ms}, {"search_ms", f.search_ms}};
    out["config"] = config_to_json(r.config);
    out["config"]["shape"] = to_string(r.shape_kind);
    out["config"]["input"] = r.input;
    out["environment"] = {{"version", r.environment.version},
                          {"seed", r.environment.seed},
                          {"timestamp", r.environment.timestamp}};
    return out;
}

RunRecord run_record_from_json(const json& j)
{
    RunRecord r;
    FitResult& f = r.result;
    f.shape = shape_from_json(j.at("shape"));
    f.cost = j.at("cost").get<double>();
    f.objective = parse_objective(j.at("objective").get<std::string>());
    f.eps = j.at("eps").get<double>();
    f.method = parse_method(j.at("method").get<std::string>());
    f.seed = j.at("seed").get<std::uint64_t>();
    f.n = j.at("n").get<std::size_t>();
    f.elapsed_ms = j.at("elapsed_ms").get<double>();
    const json& flags = j.at("flags");
    f.flags.budget_exhausted = flags.at("budget_exhausted").get<bool>();
    f.flags.zero_cost_shortcut = flags.at("zero_cost_shortcut").get<bool>();
    f.flags.oracle_unstable = flags.at("oracle_unstable").get<bool>();
    f.chart_axis = j.at("chart").at("axis").get<int>();
    f.param.base = j.at("chart").at("base").get<std::vector<double>>();
    f.param.height = j.at("chart").at("height").get<double>();
    f.reduction_ms = j.at("timings").at("reduction_ms").get<double>();
    f.search_ms = j.at("timings").at("search_ms").get<double>();
    r.config = config_from_json(j.at("config"));
    r.shape_kind = parse_shape_kind(j.at("config").at("shape").get<std::string>());
    r.input = j.at("config").at("input").get<std::string>();
    const json& env = j.at("environment");
    r.environment.version = env.at("version").get<std::string>();
    r.environment.seed = env.at("seed").get<std::uint64_t>();
    r.environment.timestamp = env.at("timestamp").get<std::string>();
    return r;
}

int cmd_fit(const FitOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const ShapeKind kind = parse_shape_kind(opts.shape);
        const FitConfig cfg = resolved_config(opts.config, opts.objective, opts.method);
        const LoadedInput in = load_input(kind, opts.input);
        RunRecord rec;
        rec.shape_kind = kind;
        rec.input = opts.input;
        rec.config = cfg;
        rec.result = run_fit(kind, in, cfg);
        rec.environment.seed = cfg.seed;
        rec.environment.timestamp = utc_timestamp();
        emit(opts.output, out, [&](std::ostream& o) { o << to_json(rec).dump(2) << '\n'; });
        if (rec.result.flags.budget_exhausted) {
            err << "warning: evaluation budget exhausted before the search converged\n";
            return kExitBudget;
        }
        return kExitOk;
    });
}

int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        testkit::InstanceSpec spec = opts.spec;
        spec.kind = testkit::parse_instance_kind(opts.kind);
        const testkit::Instance inst = testkit::gen_instance(spec);
        emit(opts.output, out, [&](std::ostream& o) {
            if (spec.kind == testkit::InstanceKind::Flats) {
                o << flats_to_json(inst.flats, spec.flat_dim).dump(2) << '\n';
            } else if (spec.kind == testkit::InstanceKind::Stack1D) {
                for (double v : inst.values) o << format_double(v) << '\n';
            } else {
                write_points_csv(o, inst.points);
            }
        });
        if (!opts.truth.empty()) {
            json t;
            t["kind"] = testkit::to_string(spec.kind);
            t["seed"] = spec.seed;
            t["n"] = spec.n;
            t["outliers"] = inst.outliers;
            t["outlier_rows_start"] = spec.n - inst.outliers;
            t["truth"] = inst.truth ? shape_to_json(*inst.truth) : json(nullptr);
            std::ofstream f = open_output(opts.truth);
            f << t.dump(2) << '\n';
        }
        return kExitOk;
    });
}

int cmd_bench(const BenchOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const ShapeKind kind = parse_shape_kind(opts.shape);
        const Method method = parse_method(opts.method);
        if (opts.repeats == 0) throw InputError("repeats must be positive");
        if (opts.sizes.empty() || opts.eps.empty()) throw InputError("need at least one size and one eps");
        testkit::InstanceKind ik = testkit::InstanceKind::Circle;
        switch (kind) {
        case ShapeKind::Circle: ik = testkit::InstanceKind::Circle; break;
        case ShapeKind::Sphere: ik = testkit::InstanceKind::Sphere; break;
        case ShapeKind::Cylinder: ik = testkit::InstanceKind::Cylinder; break;
        case ShapeKind::TwoLines: ik = testkit::InstanceKind::Lines; break;
        case ShapeKind::FlatMedian: ik = testkit::InstanceKind::Flats; break;
        }
        std::ostringstream csv;
        csv << "n,eps,phase,median_ms,cost\n";
        bool exhausted = false;
        for (std::size_t n : opts.sizes) {
            testkit::InstanceSpec spec;
            spec.kind = ik;
            spec.n = n;
            spec.noise = opts.noise;
            spec.outlier_frac = opts.outlier_frac;
            spec.seed = opts.seed;
            const testkit::Instance inst = testkit::gen_instance(spec);
            LoadedInput in;
            in.points = inst.points;
            in.flats = inst.flats;
            in.flat_dim = spec.flat_dim;
            for (double eps : opts.eps) {
                FitConfig cfg;
                cfg.eps = eps;
                cfg.method = method;
                cfg.seed = opts.seed;
                cfg.validate();
                std::vector<double> red;
                std::vector<double> search;
                double cost = 0.0;
                for (std::size_t r = 0; r < opts.repeats; ++r) {
                    const FitResult res = run_fit(kind, in, cfg);
                    red.push_back(res.reduction_ms);
                    search.push_back(res.search_ms);
                    cost = res.cost;
                    exhausted = exhausted || res.flags.budget_exhausted;
                }
                csv << n << ',' << format_double(eps) << ",reduction," << format_double(median_of(red)) << ','
                    << format_double(cost) << '\n';
                csv << n << ',' << format_double(eps) << ",search," << format_double(median_of(search)) << ','
                    << format_double(cost) << '\n';
            }
        }
        emit(opts.output, out, [&](std::ostream& o) { o << csv.str(); });
        return exhausted ? kExitBudget : kExitOk;
    });
}

int cmd_plot_data(const PlotOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (opts.grid < 2) throw InputError("grid must be at least 2");
        if (opts.axes.size() != 2 || opts.axes[0] == opts.axes[1]) {
            throw InputError("slice needs two distinct parameter axes");
        }
        if (!(opts.span >= 0.0) || !std::isfinite(opts.span)) throw InputError("span must be nonnegative");
        const ShapeKind kind = parse_shape_kind(opts.shape);
        const FitConfig cfg = resolved_config(opts.config, opts.objective, opts.method);
        const LoadedInput in = load_input(kind, opts.input);
        const FitResult res = run_fit(kind, in, cfg);
        if (res.param.base.empty()) throw InputError("the fit is degenerate; there is no landscape to slice");

        const SurfaceFamily family = kind == ShapeKind::FlatMedian
                                         ? SurfaceFamily::flats(in.flats, in.flat_dim)
                                         : family_for(kind, in.points, std::max(res.chart_axis, 0));
        const std::size_t base_dim = family.base_dim();
        for (std::size_t a : opts.axes) {
            if (a > base_dim) {
                throw InputError("slice axis " + std::to_string(a) + " out of range (parameter dimension " +
                                 std::to_string(base_dim + 1) + ")");
            }
        }
        double span = opts.span;
        if (span == 0.0) {
            const double diam = kind == ShapeKind::FlatMedian ? 1.0 : in.points.diameter();
            span = 0.1 * (diam > 0.0 ? diam : 1.0);
        }
        auto coord = [base_dim](ParamPoint& p, std::size_t a) -> double& {
            return a == base_dim ? p.height : p.base[a];
        };
        const ParamPoint center = res.param;
        const auto offset = [&](std::size_t i) {
            return span * (2.0 * static_cast<double>(i) / static_cast<double>(opts.grid - 1) - 1.0);
        };
        std::ostringstream tsv;
        for (std::size_t i = 0; i < opts.grid; ++i) {
            for (std::size_t k = 0; k < opts.grid; ++k) {
                ParamPoint p = center;
                double& x = coord(p, opts.axes[0]);
                x += offset(i);
                double& y = coord(p, opts.axes[1]);
                y += offset(k);
                const double c = cfg.objective == Objective::L1 ? cost_l1(family, p) : cost_l2(family, p);
                tsv << format_double(coord(p, opts.axes[0])) << '\t' << format_double(coord(p, opts.axes[1]))
                    << '\t' << format_double(c) << '\n';
            }
        }
        emit(opts.output, out, [&](std::ostream& o) { o << tsv.str(); });
        return kExitOk;
    });
}

} // namespace medianshape::cli
