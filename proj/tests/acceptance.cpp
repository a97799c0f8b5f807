// Acceptance suite: one PASS/FAIL line per criterion. Every reference value is computed here
// by direct summation or sorting, independently of the code under test.
#include "medianshape/coreset1d.hpp"
#include "medianshape/fitters.hpp"
#include "medianshape/ladder.hpp"
#include "medianshape/levels.hpp"
#include "medianshape/surface_family.hpp"
#include "medianshape/testkit.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace medianshape;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<double> costs;
    double seconds = 0.0;
};

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t digest(const std::vector<double>& v)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (double x : v) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &x, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---------------------------------------------------------------- 1D coreset suites

constexpr std::size_t kInstances1D = 50;
constexpr std::size_t kN1D = 10000;
constexpr std::size_t kQueries = 1000;
const double kEps1D[] = {0.5, 0.2, 0.1};

std::vector<double> instance_1d(std::size_t i)
{
    const auto dist = static_cast<testkit::Distribution1D>(i % 3);
    return testkit::gen_values_1d(dist, kN1D, 9000 + i);
}

/// Half a linear sweep across the data range, half at midpoints between sorted data values.
std::vector<double> sweep_queries(const std::vector<double>& v)
{
    std::vector<double> q;
    const double lo = v.front();
    const double hi = v.back();
    const std::size_t lin = kQueries / 2;
    for (std::size_t j = 0; j < lin; ++j) {
        q.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(lin - 1));
    }
    const std::size_t mids = kQueries - lin;
    for (std::size_t j = 0; j < mids; ++j) {
        const std::size_t idx = (j * (v.size() - 2)) / (mids - 1);
        q.push_back(0.5 * (v[idx] + v[idx + 1]));
    }
    return q;
}

double direct_sum(const std::vector<double>& v, double q, const std::function<double(double)>& f)
{
    long double s = 0.0L;
    for (double x : v) s += f(std::fabs(x - q));
    return static_cast<double>(s);
}

double rel_err(double approx, double exact)
{
    if (exact == 0.0) return approx == 0.0 ? 0.0 : INFINITY;
    return std::fabs(approx - exact) / exact;
}

enum class Variant { Plain, Perturbed, PerturbedSquared, Monotone };

Outcome coreset_suite(Variant variant)
{
    const auto t0 = Clock::now();
    Outcome out;
    double worst_ratio = 0.0;
    double worst_err = 0.0;
    bool ok = true;
    for (std::size_t inst = 0; inst < kInstances1D; ++inst) {
        const std::vector<double> values = instance_1d(inst);
        const std::vector<double> queries = sweep_queries(values);

        std::vector<std::function<double(double)>> transforms;
        switch (variant) {
        case Variant::Plain:
        case Variant::Perturbed: transforms = {[](double d) { return d; }}; break;
        case Variant::PerturbedSquared: transforms = {[](double d) { return d * d; }}; break;
        case Variant::Monotone:
            transforms = {[](double d) { return d * d; }, [](double d) { return d * d * d; }};
            break;
        }
        std::vector<std::vector<double>> exact(transforms.size());
        for (std::size_t t = 0; t < transforms.size(); ++t) {
            for (double q : queries) exact[t].push_back(direct_sum(values, q, transforms[t]));
        }

        for (double eps : kEps1D) {
            coreset1d::Coreset1D cs = coreset1d::build_coreset(values, eps);
            double tol = eps / 5.0 + 1e-9;
            if (variant == Variant::Perturbed || variant == Variant::PerturbedSquared) {
                std::mt19937_64 rng(inst * 31 + static_cast<std::uint64_t>(eps * 1000));
                std::vector<coreset1d::PairOffset> offsets(cs.left.size());
                for (std::size_t p = 0; p < offsets.size(); ++p) {
                    // Check the bound against the pair's own representatives.
                    const double bound = eps / 20.0 * std::fabs(cs.left[p].value - cs.right[p].value);
                    offsets[p].left = (rng() & 1U) ? bound : -bound;
                    offsets[p].right = (rng() & 1U) ? bound : -bound;
                }
                cs = coreset1d::perturb(cs, offsets);
                tol = eps;
            }
            const std::vector<WeightedValue> reps = cs.reps();
            for (std::size_t t = 0; t < transforms.size(); ++t) {
                for (std::size_t qi = 0; qi < queries.size(); ++qi) {
                    double approx = 0.0;
                    if (variant == Variant::Plain || variant == Variant::Perturbed) {
                        approx = coreset1d::eval_weighted_l1(reps, queries[qi]);
                    } else if (variant == Variant::PerturbedSquared) {
                        approx = coreset1d::eval_weighted_l2(reps, queries[qi]);
                    } else {
                        approx = coreset1d::eval_weighted_monotone(reps, queries[qi], transforms[t]);
                    }
                    out.costs.push_back(approx);
                    const double e = rel_err(approx, exact[t][qi]);
                    worst_err = std::max(worst_err, e);
                    worst_ratio = std::max(worst_ratio, e / tol);
                    if (e > tol) ok = false;
                }
            }
        }
    }
    out.pass = ok;
    out.seconds = seconds_since(t0);
    out.detail = fmt("worst relative error %.3g (%.3g of tolerance)", worst_err, worst_ratio);
    return out;
}

// ---------------------------------------------------------------- Level sandwich

Outcome sandwich_suite()
{
    const auto t0 = Clock::now();
    constexpr std::size_t n = 2000;
    constexpr double delta = 0.1;
    constexpr double c = 4.0;
    const double k = n / 4.0;
    std::size_t hits = 0;
    std::size_t trials = 0;
    Outcome out;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed + 500);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> stack(n);
        for (double& s : stack) s = u(rng);
        const SurfaceFamily fam = SurfaceFamily::stack(stack);
        const levels::Gradation grad = levels::build_gradation(fam, seed);

        const double zeta = std::min(c * std::log(static_cast<double>(n)) / (k * delta * delta), 1.0);
        std::size_t j = 0;
        while (j + 1 < grad.levels() && std::ldexp(1.0, -static_cast<int>(j + 1)) >= zeta) ++j;
        const auto depth = static_cast<std::size_t>(std::llround(k * std::ldexp(1.0, -static_cast<int>(j))));

        std::vector<double> sorted = stack;
        std::sort(sorted.begin(), sorted.end());
        const double lower = sorted[static_cast<std::size_t>(std::floor((1.0 - delta) * k))];
        const double upper = sorted[static_cast<std::size_t>(std::ceil((1.0 + delta) * k))];
        for (int b = 0; b < 10; ++b) {
            const levels::LevelQuery q{&fam, {u(rng) * 10.0 - 5.0}};
            ++trials;
            const auto& sample = grad.sample(j);
            if (depth >= sample.size()) continue;
            const double v = levels::level_value(q, depth, levels::Side::Bottom, &sample);
            out.costs.push_back(v);
            if (v >= lower && v <= upper) ++hits;
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(trials);
    out.pass = frac >= 0.95;
    out.seconds = seconds_since(t0);
    out.detail = fmt("sandwich held in %.1f%% of %.0f (seed, base) pairs", 100.0 * frac, static_cast<double>(trials));
    return out;
}

// ---------------------------------------------------------------- Reduced-cost suite

double exact_circle_cost(const PointSet& pts, const ParamPoint& p, bool squared)
{
    long double s = 0.0L;
    for (const auto& q : pts.points()) {
        const double d = std::hypot(q.x() - p.base[0], q.y() - p.base[1]) - p.height;
        s += squared ? static_cast<long double>(d) * d : std::fabs(d);
    }
    return static_cast<double>(s);
}

Outcome reduction_suite()
{
    const auto t0 = Clock::now();
    Outcome out;
    bool ok = true;
    double worst_frac = 1.0;
    for (double eps : {0.25, 0.1}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            testkit::InstanceSpec spec;
            spec.kind = testkit::InstanceKind::Circle;
            spec.n = 5000;
            spec.noise = 0.05;
            spec.outlier_frac = 0.1;
            spec.seed = 700 + seed;
            const testkit::Instance inst = testkit::gen_instance(spec);
            const SurfaceFamily fam = SurfaceFamily::circle_cones(inst.points);
            const levels::Gradation grad = levels::build_gradation(fam, seed);
            const levels::LevelPlan plan = levels::plan_levels(fam.size(), eps, grad);
            const ladder::SearchRegion region = search_region(fam, inst.points);
            std::mt19937_64 rng(seed * 17 + 3);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::size_t good1 = 0;
            std::size_t good2 = 0;
            for (int i = 0; i < 100; ++i) {
                ParamPoint p;
                p.base = {region.lo[0] + u(rng) * (region.hi[0] - region.lo[0]),
                          region.lo[1] + u(rng) * (region.hi[1] - region.lo[1])};
                p.height = region.height_lo + u(rng) * (region.height_hi - region.height_lo);
                const double r1 = levels::reduced_cost_l1(fam, grad, plan, p);
                const double r2 = levels::reduced_cost_l2(fam, grad, plan, p);
                out.costs.push_back(r1);
                out.costs.push_back(r2);
                if (rel_err(r1, exact_circle_cost(inst.points, p, false)) <= eps) ++good1;
                if (rel_err(r2, exact_circle_cost(inst.points, p, true)) <= eps) ++good2;
            }
            const double frac = std::min(good1, good2) / 100.0;
            worst_frac = std::min(worst_frac, frac);
            if (frac < 0.95) ok = false;
        }
    }
    out.seconds = seconds_since(t0);
    out.pass = ok && out.seconds < 60.0;
    out.detail = fmt("worst per-seed fraction within eps %.2f, %.1f s", worst_frac, out.seconds);
    return out;
}

// ---------------------------------------------------------------- Ladder suite

Outcome ladder_suite()
{
    const auto t0 = Clock::now();
    Outcome out;
    bool ok = true;
    std::size_t checked = 0;
    double worst = 0.0;
    double worst_lower = 0.0;
    for (std::uint64_t f = 0; f < 20; ++f) {
        const double eps = f % 2 == 0 ? 0.2 : 0.05;
        testkit::InstanceSpec spec;
        spec.n = 60 + 10 * f;
        spec.noise = 0.05;
        spec.outlier_frac = 0.1;
        spec.seed = 4000 + f;
        const int kind = static_cast<int>(f % 4);
        spec.kind = kind == 0 ? testkit::InstanceKind::Circle
                  : kind == 1 ? testkit::InstanceKind::Sphere
                  : kind == 2 ? testkit::InstanceKind::Cylinder
                              : testkit::InstanceKind::Flats;
        const testkit::Instance inst = testkit::gen_instance(spec);
        const SurfaceFamily fam = kind == 0   ? SurfaceFamily::circle_cones(inst.points)
                                  : kind == 1 ? SurfaceFamily::sphere_cones(inst.points)
                                  : kind == 2 ? SurfaceFamily::cylinders(inst.points, static_cast<int>(f % 3))
                                              : SurfaceFamily::flats(inst.flats, spec.flat_dim);
        const ladder::SearchRegion region =
            kind == 3 ? search_region(inst.flats, spec.flat_dim) : search_region(fam, inst.points);
        const std::optional<double> fixed = kind == 3 ? std::optional<double>(0.0) : std::nullopt;
        const ladder::StabInfo stab = ladder::find_stab(fam, region, 8, fixed);
        const ladder::Ladder lad = ladder::build_ladder(stab.length, fam.total_weight(), eps);

        std::mt19937_64 rng(f + 77);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::size_t got = 0;
        std::size_t tries = 0;
        while (got < 500 && tries < 100000) {
            ++tries;
            ParamPoint p;
            for (std::size_t d = 0; d < region.lo.size(); ++d) {
                p.base.push_back(region.lo[d] + u(rng) * (region.hi[d] - region.lo[d]));
            }
            p.height = fixed ? *fixed : region.height_lo + u(rng) * (region.height_hi - region.height_lo);
            std::vector<WeightedValue> hv;
            fam.heights_at(p.base, hv);
            long double nu = 0.0L;
            for (const auto& h : hv) nu += static_cast<long double>(h.weight) * std::fabs(h.value - p.height);
            const double exact = static_cast<double>(nu);
            if (exact < stab.length) continue;
            ++got;
            const double q = ladder::quantized_cost(fam, lad, p).value;
            out.costs.push_back(q);
            worst_lower = std::max(worst_lower, (exact - q) / exact);
            worst = std::max(worst, q / exact - 1.0);
            if (q < exact * (1.0 - 1e-12) || q > (1.0 + eps / 5.0) * exact) ok = false;
        }
        checked += got;
        if (got < 500) ok = false;
    }
    out.pass = ok;
    out.seconds = seconds_since(t0);
    out.detail = fmt("%.0f points; max overshoot %.3g, max undershoot %.3g", static_cast<double>(checked), worst,
                     worst_lower);
    return out;
}

// ---------------------------------------------------------------- End-to-end suite

double independent_cost(const Shape& shape, const testkit::Instance& inst, Objective obj)
{
    auto term = [obj](double d) { return obj == Objective::L1 ? std::fabs(d) : d * d; };
    long double s = 0.0L;
    if (const auto* m = std::get_if<MedianPoint>(&shape)) {
        for (const auto& f : inst.flats) {
            Eigen::Vector3d w = m->coords - f.anchor;
            for (const auto& b : f.basis) w -= w.dot(b) * b;
            s += term(w.norm());
        }
        return static_cast<double>(s);
    }
    for (const auto& p : inst.points.points()) {
        double d = 0.0;
        if (const auto* c = std::get_if<Circle>(&shape)) {
            d = (p.head<2>() - c->center).norm() - c->radius;
        } else if (const auto* sp = std::get_if<Sphere>(&shape)) {
            d = (p - sp->center).norm() - sp->radius;
        } else if (const auto* cy = std::get_if<Cylinder>(&shape)) {
            d = (p - cy->axis_point).cross(cy->axis_dir.normalized()).norm() - cy->radius;
        } else if (const auto* pl = std::get_if<ParallelLines>(&shape)) {
            const Eigen::Vector2d u = pl->direction.normalized();
            const Eigen::Vector2d w = p.head<2>() - pl->point;
            d = std::fabs(w.x() * u.y() - w.y() * u.x()) - pl->half_separation;
        }
        s += term(d);
    }
    return static_cast<double>(s);
}

Outcome end_to_end_suite(std::string& per_shape)
{
    const auto t0 = Clock::now();
    Outcome out;
    bool ok = true;
    per_shape.clear();
    const std::pair<ShapeKind, testkit::InstanceKind> cases[] = {
        {ShapeKind::Circle, testkit::InstanceKind::Circle},     {ShapeKind::Sphere, testkit::InstanceKind::Sphere},
        {ShapeKind::Cylinder, testkit::InstanceKind::Cylinder}, {ShapeKind::FlatMedian, testkit::InstanceKind::Flats},
        {ShapeKind::TwoLines, testkit::InstanceKind::Lines}};
    for (std::size_t ci = 0; ci < std::size(cases); ++ci) {
        const auto [shape, ikind] = cases[ci];
        std::size_t wins = 0;
        std::size_t unstable = 0;
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            testkit::InstanceSpec spec;
            spec.kind = ikind;
            spec.n = shape == ShapeKind::FlatMedian ? 50 : 200;
            spec.noise = 0.05;
            spec.outlier_frac = 0.1;
            spec.seed = 10000 * (ci + 1) + seed;
            const testkit::Instance inst = testkit::gen_instance(spec);
            FitConfig cfg;
            cfg.eps = 0.2;
            cfg.seed = seed;
            FitResult fit;
            FitResult ref;
            testkit::OracleSettings os;
            os.seed = seed;
            if (shape == ShapeKind::FlatMedian) {
                fit = fit_flat_median(inst.flats, spec.flat_dim, cfg);
                ref = testkit::oracle_fit_flats(inst.flats, spec.flat_dim, cfg.objective, os);
            } else {
                fit = fit_points(shape, inst.points, cfg);
                ref = testkit::oracle_fit(inst.points, shape, cfg.objective, os);
            }
            out.costs.push_back(fit.cost);
            out.costs.push_back(ref.cost);
            if (ref.flags.oracle_unstable) ++unstable;
            const double recomputed = independent_cost(fit.shape, inst, cfg.objective);
            if (std::fabs(recomputed - fit.cost) > 1e-9 * std::max(1.0, recomputed)) ok = false;
            if (fit.cost <= (1.0 + cfg.eps) * ref.cost) ++wins;
            worst = std::max(worst, fit.cost / ref.cost);
        }
        if (wins < 48) ok = false;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s%s %zu/50 (worst ratio %.3f, oracle unstable %zu)",
                      per_shape.empty() ? "" : "; ", std::string(to_string(shape)).c_str(), wins, worst, unstable);
        per_shape += buf;
    }
    out.seconds = seconds_since(t0);
    out.pass = ok && out.seconds < 300.0;
    out.detail = per_shape + fmt(", %.1f s", out.seconds);
    return out;
}

// ---------------------------------------------------------------- Scaling

double reduction_ms(const SurfaceFamily& fam, double eps, std::uint64_t seed)
{
    const auto t0 = Clock::now();
    const levels::Gradation grad = levels::build_gradation(fam, seed);
    const levels::LevelPlan plan = levels::plan_levels(fam.size(), eps, grad);
    const levels::ReducedModel red(fam, grad, plan);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (red.surface_count() == 0) return -1.0;
    return ms;
}

Outcome scaling_suite()
{
    const auto t0 = Clock::now();
    Outcome out;
    double med[2] = {0.0, 0.0};
    const std::size_t sizes[2] = {100000, 200000};
    for (int s = 0; s < 2; ++s) {
        testkit::InstanceSpec spec;
        spec.kind = testkit::InstanceKind::Circle;
        spec.n = sizes[s];
        spec.noise = 0.05;
        spec.seed = 99;
        const testkit::Instance inst = testkit::gen_instance(spec);
        const SurfaceFamily fam = SurfaceFamily::circle_cones(inst.points);
        reduction_ms(fam, 0.25, 0);
        std::vector<double> t;
        for (int r = 0; r < 5; ++r) t.push_back(reduction_ms(fam, 0.25, static_cast<std::uint64_t>(r)));
        std::sort(t.begin(), t.end());
        med[s] = t[2];
    }
    const double ratio = med[1] / med[0];
    out.pass = ratio <= 2.5;
    out.seconds = seconds_since(t0);
    out.detail = fmt("median %.2f ms at 1e5, %.2f ms at 2e5, ratio %.2f", med[0], med[1], ratio);
    return out;
}

struct Report {
    int failures = 0;
    void line(int id, const Outcome& o)
    {
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
};

std::vector<Outcome> run_deterministic(bool report, Report& rep)
{
    std::vector<Outcome> outs;
    auto run = [&](int id, Outcome o) {
        if (report) rep.line(id, o);
        outs.push_back(std::move(o));
    };
    {
        Outcome o = coreset_suite(Variant::Plain);
        o.pass = o.pass && o.seconds < 30.0;
        o.detail += fmt(", %.1f s", o.seconds);
        run(1, std::move(o));
    }
    run(2, coreset_suite(Variant::Perturbed));
    run(3, coreset_suite(Variant::PerturbedSquared));
    run(4, coreset_suite(Variant::Monotone));
    run(5, sandwich_suite());
    run(6, reduction_suite());
    run(7, ladder_suite());
    std::string per_shape;
    run(8, end_to_end_suite(per_shape));
    return outs;
}

} // namespace

int main()
{
    Report rep;
    const std::vector<Outcome> first = run_deterministic(true, rep);
    rep.line(9, scaling_suite());

    Report silent;
    const std::vector<Outcome> second = run_deterministic(false, silent);
    Outcome det;
    det.pass = true;
    std::size_t values = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        values += first[i].costs.size();
        if (first[i].costs.size() != second[i].costs.size() || digest(first[i].costs) != digest(second[i].costs)) {
            det.pass = false;
            det.detail += "criterion " + std::to_string(i + 1) + " differs; ";
        }
    }
    if (det.pass) det.detail = fmt("%.0f cost values bit-identical across two runs", static_cast<double>(values));
    rep.line(10, det);
    return rep.failures == 0 ? 0 : 1;
}
