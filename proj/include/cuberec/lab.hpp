#pragma once

// Experiment orchestration: the mean-value check, parameter sweeps and the
// invariant verification suite.

#include "cuberec/adversary.hpp"
#include "cuberec/battery.hpp"
#include "cuberec/core.hpp"
#include "cuberec/designs.hpp"
#include "cuberec/envelopes.hpp"
#include "cuberec/io.hpp"
#include "cuberec/recover.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace cuberec {

// ---------------------------------------------------------------------------
// Mean-value fact

template <class F>
concept WithGradient = Evaluable<F> && requires(const F& f, std::span<const double> x) {
    { f.gradient(x) } -> std::convertible_to<std::vector<double>>;
};

enum class MeanValueStatus { Pass, Fail, PreconditionViolation };

inline const char* to_string(MeanValueStatus s) noexcept
{
    switch (s) {
    case MeanValueStatus::Pass: return "Pass";
    case MeanValueStatus::Fail: return "Fail";
    case MeanValueStatus::PreconditionViolation: return "PreconditionViolation";
    }
    return "?";
}

struct MeanValueReport {
    MeanValueStatus status = MeanValueStatus::Pass;
    double max_abs_value = 0.0;   ///< max |f| over M[h]
    double max_abs_partial = 0.0; ///< max |d_j f| over M
    std::vector<double> witness;  ///< where the gate or the conclusion broke

    [[nodiscard]] bool passed() const noexcept { return status == MeanValueStatus::Pass; }
};

/// If |f| <= h^2 on M[h] then |d_j f| <= 3h on M, for f in C^2_d. Checks the
/// hypothesis first and reports its failure separately. `axis` is 0-based.
template <WithGradient F>
MeanValueReport verify_mean_value_fact(const F& f, const PointSet& M, double h, int axis)
{
    if (axis < 0 || axis >= M.dim())
        throw invalid_argument_error("verify_mean_value_fact: axis out of range");
    MeanValueReport report;
    for (const auto& p : expand_cloud(M, h)) {
        const double v = std::abs(static_cast<double>(f(p.coords())));
        report.max_abs_value = std::max(report.max_abs_value, v);
        if (v > h * h && report.status == MeanValueStatus::Pass) {
            report.status = MeanValueStatus::PreconditionViolation;
            report.witness = p.vec();
        }
    }
    if (report.status != MeanValueStatus::Pass)
        return report;
    for (const auto& p : M) {
        const double g = std::abs(f.gradient(p.coords())[static_cast<std::size_t>(axis)]);
        report.max_abs_partial = std::max(report.max_abs_partial, g);
        if (g > 3.0 * h && report.status == MeanValueStatus::Pass) {
            report.status = MeanValueStatus::Fail;
            report.witness = p.vec();
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
    std::vector<int> d_list{1, 2};
    std::vector<int> r_list{1, 2, 3};
    std::vector<int> m_list{2, 4, 8};
    ClassKind kind = ClassKind::Standard;
    int probe_m = 32;
    std::uint64_t seed = 0;
    std::string output_path = "sweep.csv";
    std::vector<std::string> functions{battery_ids.begin(), battery_ids.end()};
};

inline void validate(const SweepConfig& c)
{
    if (c.d_list.empty() || c.r_list.empty() || c.m_list.empty() || c.functions.empty())
        throw invalid_argument_error("sweep config: d_list, r_list, m_list and functions must be nonempty");
    for (int d : c.d_list)
        if (d < 1 || d > 6)
            throw invalid_argument_error("sweep config: d must lie in [1, 6], got " + std::to_string(d));
    for (int r : c.r_list)
        if (r < 1 || r > 8)
            throw invalid_argument_error("sweep config: r must lie in [1, 8], got " + std::to_string(r));
    for (int m : c.m_list)
        if (m < 1)
            throw invalid_argument_error("sweep config: m must be >= 1, got " + std::to_string(m));
    if (c.probe_m < 1)
        throw invalid_argument_error("sweep config: probe_m must be >= 1");
    for (const auto& id : c.functions)
        if (std::find(battery_ids.begin(), battery_ids.end(), id) == battery_ids.end())
            throw unknown_function_error("sweep config: unknown battery function '" + id + "'");
    const int max_m = *std::max_element(c.m_list.begin(), c.m_list.end());
    const int max_d = *std::max_element(c.d_list.begin(), c.d_list.end());
    checked_grid_size(max_m, max_d);
}

inline SweepConfig sweep_config_from_json(const json& j)
{
    SweepConfig c;
    try {
        if (j.contains("d_list")) c.d_list = j.at("d_list").get<std::vector<int>>();
        if (j.contains("r_list")) c.r_list = j.at("r_list").get<std::vector<int>>();
        if (j.contains("m_list")) c.m_list = j.at("m_list").get<std::vector<int>>();
        if (j.contains("kind")) c.kind = parse_class_kind(j.at("kind").get<std::string>());
        if (j.contains("probe_m")) c.probe_m = j.at("probe_m").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
        if (j.contains("functions")) c.functions = j.at("functions").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw invalid_argument_error(std::string("sweep config: ") + e.what());
    }
    validate(c);
    return c;
}

inline json to_json(const SweepConfig& c)
{
    return json{{"d_list", c.d_list}, {"r_list", c.r_list},   {"m_list", c.m_list},
                {"kind", to_string(c.kind)}, {"probe_m", c.probe_m}, {"seed", c.seed},
                {"output_path", c.output_path}, {"functions", c.functions}};
}

inline constexpr const char* sweep_csv_header =
    "d,r,m,kind,function,n_points,h,sup_estimate,envelope_closed,envelope_recursive,lower_cert,K_hat,seed";

/// One row per (d, r, m, function) in sorted (d, r, m) order and the
/// configured function order. lower_cert is left empty when the sampled
/// feasibility check rejects the fooling instance.
inline std::string run_sweep(const SweepConfig& config)
{
    validate(config);
    auto sorted = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    std::string out = std::string(sweep_csv_header) + "\n";
    for (int d : sorted(config.d_list)) {
        for (int r : sorted(config.r_list)) {
            for (int m : sorted(config.m_list)) {
                const std::string tuple =
                    "(d=" + std::to_string(d) + ", r=" + std::to_string(r) + ", m=" + std::to_string(m) + ")";
                try {
                    const double h = default_step(m, r);
                    const auto design = build_recovery_design(GridSpec(m, d), r, h);
                    const int probe = std::max(config.probe_m, 2 * m);
                    const double k_hat = default_K_hat(r, config.seed);
                    const double env_closed = envelope_closed(d, r, m, config.kind);
                    const double env_rec = envelope_recursive(d, r, m, config.kind);
                    const auto cert = certify_lower_bound(design.all_points(), SmoothnessClass{r, d, config.kind},
                                                          k_hat, probe, config.seed);
                    const std::string lower = cert.feasibility.feasible ? format_double(cert.bound) : "";
                    for (const auto& id : config.functions) {
                        const auto f = battery(id, r, d);
                        const auto model = fit_taylor_models(design, sample_points(design.all_points(), f, id));
                        const auto err = sup_error(model, f, probe);
                        out += std::to_string(d) + "," + std::to_string(r) + "," + std::to_string(m) + "," +
                               to_string(config.kind) + "," + id + "," +
                               std::to_string(design.all_points().size()) + "," + format_double(h) + "," +
                               format_double(err.sup_estimate) + "," + format_double(env_closed) + "," +
                               format_double(env_rec) + "," + lower + "," + format_double(k_hat) + "," +
                               std::to_string(config.seed) + "\n";
                    }
                } catch (const resource_error& e) {
                    throw resource_error(std::string(e.what()) + " at " + tuple);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shared experiment helpers

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw invalid_argument_error("loglog_slope: needs two or more matching samples");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// sup_error of the sinsum reconstruction for each m, probing at 4m.
inline std::vector<double> sinsum_errors(int d, int r, const std::vector<int>& ms)
{
    std::vector<double> errs;
    const auto f = battery("sinsum", r, d);
    for (int m : ms) {
        const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
        const auto model = fit_taylor_models(design, sample_points(design.all_points(), f));
        errs.push_back(sup_error(model, f, 4 * m).sup_estimate);
    }
    return errs;
}

inline PointSet random_pointset(Rng& rng, int d, std::size_t n)
{
    PointSet p(d);
    while (p.size() < n)
        p.insert(Point(rng.cube_point(d)));
    return p;
}

// ---------------------------------------------------------------------------
// Verification suite

struct CheckResult {
    std::string name;
    bool passed = true;
    std::uint64_t cases = 0;
    json counterexample; ///< null when passed
};

namespace detail {

class Check {
public:
    explicit Check(std::string name) { result_.name = std::move(name); }

    /// Records one case; the first failing case becomes the counterexample.
    template <class Describe>
    void expect(bool ok, Describe&& describe)
    {
        ++result_.cases;
        if (!ok && result_.passed) {
            result_.passed = false;
            result_.counterexample = describe();
        }
    }

    CheckResult& result() noexcept { return result_; }

private:
    CheckResult result_;
};

inline json point_json(std::span<const double> x) { return json(std::vector<double>(x.begin(), x.end())); }

inline bool within_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

// core ----------------------------------------------------------------------

inline void check_multiindex_count(Check& c, std::uint64_t)
{
    for (int d = 1; d <= 8; ++d)
        for (int k = 0; k <= 6; ++k) {
            const auto all = enumerate_multiindices(d, k);
            bool graded = true;
            for (std::size_t i = 1; i < all.size(); ++i)
                graded = graded && all[i - 1].order() <= all[i].order();
            const auto expected = binomial(static_cast<std::uint64_t>(d + k), static_cast<std::uint64_t>(d));
            c.expect(all.size() == expected && graded, [&] {
                return json{{"d", d}, {"k", k}, {"count", all.size()}, {"expected", expected}, {"graded", graded}};
            });
        }
}

inline void check_nearest_grid_point(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int i = 0; i < 2000; ++i) {
        const int d = rng.uniform_int(1, 4);
        const int m = rng.uniform_int(1, 16);
        const GridSpec grid(m, d);
        const Point x(rng.cube_point(d));
        const Point y = nearest_grid_point(x, grid);
        const Point yy = nearest_grid_point(y, grid);
        const double moved = sup_distance(x.coords(), y.coords());
        const bool ok = yy.vec() == y.vec() && moved <= 0.5 / m + 1e-15;
        c.expect(ok, [&] {
            return json{{"x", to_json(x)}, {"m", m}, {"y", to_json(y)}, {"again", to_json(yy)}, {"moved", moved}};
        });
    }
}

inline void check_sample_table_roundtrip(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    SampleTable table("roundtrip");
    std::vector<std::pair<std::vector<double>, double>> inserted;
    for (int i = 0; i < 500; ++i) {
        auto x = rng.cube_point(3);
        const double v = rng.normal() * std::pow(10.0, rng.uniform_int(-8, 8));
        if (table.find(x))
            continue;
        table.insert(Point(x), v);
        inserted.emplace_back(std::move(x), v);
    }
    for (const auto& [x, v] : inserted) {
        const auto got = table.find(x);
        c.expect(got && *got == v, [&] { return json{{"x", point_json(x)}, {"inserted", v}}; });
    }
}

// designs -------------------------------------------------------------------

inline void check_recovery_design_budget(Check& c, std::uint64_t)
{
    for (int d = 1; d <= 4; ++d)
        for (int r = 1; r <= 4; ++r)
            for (int m = 1; m <= 4; ++m) {
                const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
                const auto n = design.all_points().size();
                c.expect(static_cast<double>(n) <= design.cost_budget(), [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"n_points", n}, {"budget", design.cost_budget()}};
                });
            }
}

inline void check_cloud_expansion(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int t = 0; t < 200; ++t) {
        const int d = rng.uniform_int(1, 4);
        const double h = rng.uniform(1e-3, 0.5);
        const auto M = random_pointset(rng, d, static_cast<std::size_t>(rng.uniform_int(1, 20)));
        const auto E = expand_cloud(M, h);
        bool contains_input = true;
        for (const auto& p : M)
            contains_input = contains_input && E.contains(p);
        c.expect(contains_input && E.size() <= static_cast<std::size_t>(d + 1) * M.size(),
                 [&] { return json{{"d", d}, {"h", h}, {"input", to_json(M)}, {"expanded_size", E.size()}}; });
        for (const auto& q : E) {
            if (M.contains(q))
                continue;
            bool has_parent = false;
            for (const auto& p : M) {
                int differing = 0;
                bool exact_step = true;
                for (int j = 0; j < d; ++j)
                    if (q[j] != p[j]) {
                        ++differing;
                        exact_step = exact_step && (q[j] == p[j] + h || q[j] == p[j] - h);
                    }
                has_parent = has_parent || (differing == 1 && exact_step);
            }
            c.expect(has_parent, [&] { return json{{"h", h}, {"orphan", to_json(q)}}; });
        }
    }
}

inline void check_proof_schedule(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int t = 0; t < 200; ++t) {
        const double delta = rng.uniform(1e-3, 1.0);
        const int r = rng.uniform_int(1, 6);
        const auto sched = proof_schedule(delta, r);
        for (std::size_t i = 1; i < sched.steps.size(); ++i) {
            const double prev = sched.steps[i - 1];
            const double cur = sched.steps[i];
            c.expect(std::abs(3.0 * cur - prev * prev) <= 1e-12 * prev * prev, [&] {
                return json{{"delta", delta}, {"r", r}, {"i", i + 1}, {"h_prev", prev}, {"h_i", cur}};
            });
        }
    }
}

inline void check_points_in_cube(Check& c, std::uint64_t seed)
{
    auto in_cube = [&](const PointSet& P, const json& where) {
        for (const auto& p : P) {
            bool ok = true;
            for (double v : p.coords())
                ok = ok && v >= 0.0 && v <= 1.0;
            c.expect(ok, [&] { return json{{"where", where}, {"point", to_json(p)}}; });
        }
    };
    for (int d = 1; d <= 4; ++d)
        for (int r = 1; r <= 4; ++r)
            for (int m = 1; m <= 4; ++m)
                in_cube(build_recovery_design(GridSpec(m, d), r, default_step(m, r)).all_points(),
                        json{{"design", {{"d", d}, {"r", r}, {"m", m}}}});
    Rng rng(seed);
    for (int t = 0; t < 20; ++t) {
        const int d = rng.uniform_int(1, 3);
        const int r = rng.uniform_int(1, 3);
        const double delta = rng.uniform(0.05, 1.0);
        in_cube(build_proof_pointset(build_grid(GridSpec(rng.uniform_int(1, 3), d)), delta, r),
                json{{"proof_pointset", {{"d", d}, {"r", r}, {"delta", delta}}}});
    }
}

// recover -------------------------------------------------------------------

struct AffineFunction {
    double c0 = 0.0;
    std::vector<double> a;
    double operator()(std::span<const double> x) const
    {
        double s = c0;
        for (std::size_t j = 0; j < x.size(); ++j)
            s += a[j] * x[j];
        return s;
    }
};

inline void check_affine_exactness(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int d = 1; d <= 4; ++d)
        for (int r = 2; r <= 4; ++r)
            for (int m = 1; m <= 2; ++m) {
                AffineFunction f{rng.uniform(-0.5, 0.5), {}};
                for (int j = 0; j < d; ++j)
                    f.a.push_back(rng.uniform(-0.5, 0.5));
                const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
                const auto model = fit_taylor_models(design, sample_points(design.all_points(), f));
                const auto err = sup_error(model, f, 4 * m);
                c.expect(err.sup_estimate <= 1e-10, [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"sup_estimate", err.sup_estimate},
                                {"witness", to_json(err.witness)}};
                });
            }
}

inline void check_grid_interpolation(Check& c, std::uint64_t)
{
    for (const auto id : battery_ids)
        for (int d = 1; d <= 3; ++d)
            for (int r = 1; r <= 3; ++r) {
                const int m = 3;
                const auto f = battery(id, r, d);
                const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
                const auto model = fit_taylor_models(design, sample_points(design.all_points(), f));
                const auto& grid = design.grid();
                for (std::uint64_t i = 0; i < grid.size(); ++i) {
                    const auto y = grid.point(i);
                    const double fv = f(y.coords());
                    const double mv = model(y.coords());
                    c.expect(fv == mv, [&] {
                        return json{{"function", id}, {"d", d}, {"r", r}, {"y", to_json(y)}, {"f", fv}, {"model", mv}};
                    });
                }
            }
}

inline void check_convergence_rate(Check& c, std::uint64_t)
{
    for (int d = 1; d <= 2; ++d)
        for (int r = 1; r <= 3; ++r) {
            const std::vector<int> ms = d == 1 ? std::vector<int>{2, 4, 8, 16} : std::vector<int>{2, 4, 8};
            const auto errs = sinsum_errors(d, r, ms);
            const double slope = loglog_slope(std::vector<double>(ms.begin(), ms.end()), errs);
            c.expect(slope >= -r - 0.5 && slope <= -r + 0.5,
                     [&] { return json{{"d", d}, {"r", r}, {"m", ms}, {"errors", errs}, {"slope", slope}}; });
        }
}

inline void check_optimization_sandwich(Check& c, std::uint64_t)
{
    for (const auto id : battery_ids)
        for (int d = 1; d <= 3; ++d)
            for (int r = 1; r <= 3; ++r)
                for (int m = 1; m <= 4; ++m) {
                    const auto f = battery(id, r, d);
                    const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
                    const auto model = fit_taylor_models(design, sample_points(design.all_points(), f));
                    const auto s = optimization_sandwich(model, f, 2 * m);
                    c.expect(s.holds(), [&] {
                        return json{{"function", id}, {"d", d}, {"r", r}, {"m", m}, {"max_f", s.max_f},
                                    {"max_model", s.max_model}, {"sup_error", s.sup_error}};
                    });
                }
}

inline void check_derivative_bias(Check& c, std::uint64_t)
{
    auto f = [](std::span<const double> x) { return 0.5 * x[0] * x[0]; };
    const MultiIndex first({1});
    for (int r = 2; r <= 4; ++r)
        for (int m = 1; m <= 8; ++m)
            for (double h : {default_step(m, r), 0.5 * default_step(m, r), 1e-3}) {
                const auto design = build_recovery_design(GridSpec(m, 1), r, h);
                const auto samples = sample_points(design.all_points(), f);
                for (std::uint64_t i = 0; i < design.grid_size(); ++i) {
                    const auto y = design.grid().point(i);
                    const double est = estimate_derivative(samples, y, first, h, design.orientation(i));
                    const double bias = std::abs(est - y[0]);
                    c.expect(bias <= h / 2 + 1e-12, [&] {
                        return json{{"m", m}, {"r", r}, {"h", h}, {"y", y[0]}, {"estimate", est}, {"bias", bias}};
                    });
                }
            }
}

// adversary -----------------------------------------------------------------

inline void check_bump_support(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int t = 0; t < 2000; ++t) {
        const int d = rng.uniform_int(1, 6);
        auto u = rng.unit_vector(d);
        const double scale = 1.0 + (t % 4 == 0 ? 0.0 : rng.uniform(0.0, 2.0));
        for (double& v : u)
            v *= scale;
        double norm2 = 0.0;
        for (double v : u)
            norm2 += v * v;
        if (norm2 < 1.0)
            continue;
        const double g = radial_bump(u);
        c.expect(g == 0.0, [&] { return json{{"x", point_json(u)}, {"value", g}}; });
    }
    for (double t : {1.0, 1.5, 2.0, 1e6})
        c.expect(bump_profile(t) == 0.0, [&] { return json{{"t", t}, {"h", bump_profile(t)}}; });
    for (double t : {0.0, -0.5, -1e6})
        c.expect(bump_profile(t) == 1.0, [&] { return json{{"t", t}, {"h", bump_profile(t)}}; });
    c.expect(bump_profile(0.5) == 0.5, [&] { return json{{"t", 0.5}, {"h", bump_profile(0.5)}}; });
}

/// Central differences of order 1..4 of h at the seams t = 0 and t = 1 must
/// shrink as the step shrinks.
inline void check_seam_smoothness(Check& c, std::uint64_t)
{
    auto central = [](int order, double t, double s) {
        double sum = 0.0;
        double binom = 1.0;
        for (int i = 0; i <= order; ++i) {
            sum += ((order - i) % 2 == 0 ? 1.0 : -1.0) * binom * bump_profile(t + (0.5 * order - i) * s);
            binom = binom * (order - i) / (i + 1);
        }
        return sum / std::pow(s, order);
    };
    for (double t : {0.0, 1.0})
        for (int order = 1; order <= 4; ++order) {
            std::vector<double> values;
            for (double s : {0.1, 0.05, 0.025, 0.0125})
                values.push_back(std::abs(central(order, t, s)));
            bool decreasing = true;
            for (std::size_t i = 1; i < values.size(); ++i)
                decreasing = decreasing && values[i] <= values[i - 1];
            c.expect(decreasing && values.back() < 1e-6,
                     [&] { return json{{"t", t}, {"order", order}, {"abs_differences", values}}; });
        }
}

/// Random targets for the adversary: grid-plus-cloud designs and uniform
/// random sets, alternately.
inline PointSet adversary_target(Rng& rng, int index, json& where)
{
    if (index % 2 == 0) {
        const int d = rng.uniform_int(1, 3);
        const int r = rng.uniform_int(1, 3);
        const int m = rng.uniform_int(1, 4);
        where = json{{"design", {{"d", d}, {"r", r}, {"m", m}}}};
        return build_recovery_design(GridSpec(m, d), r, default_step(m, r)).all_points();
    }
    const int d = rng.uniform_int(1, 4);
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 64));
    where = json{{"random", {{"d", d}, {"n", n}}}};
    return random_pointset(rng, d, n);
}

struct FoolingValidity {
    bool zero_on_design = true;
    bool peak_matches = true;
    bool feasible = true;
    double peak_error = 0.0;
    double max_derivative = 0.0;
    json bad_point;
};

inline FoolingValidity fooling_validity(const PointSet& P, int r, ClassKind kind, int probe_m, std::uint64_t seed)
{
    const double k_hat = default_K_hat(r, 0);
    const auto cert = certify_lower_bound(P, SmoothnessClass{r, P.dim(), kind}, k_hat, probe_m, seed);
    FoolingValidity v;
    for (const auto& p : P)
        if (cert.instance(p.coords()) != 0.0 && v.zero_on_design) {
            v.zero_on_design = false;
            v.bad_point = to_json(p);
        }
    const double at_center = cert.instance(cert.instance.center().coords());
    const double expected = std::pow(cert.instance.radius(), r) / k_hat;
    v.peak_error = std::abs(at_center - expected);
    v.peak_matches = v.peak_error <= 1e-12;
    v.feasible = cert.feasibility.feasible;
    v.max_derivative = cert.feasibility.max_derivative;
    return v;
}

inline void check_class_feasibility(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int t = 0; t < 24; ++t) {
        json where;
        const auto P = adversary_target(rng, t, where);
        const int r = rng.uniform_int(1, 4);
        const auto kind = t % 3 == 0 ? ClassKind::Directional : ClassKind::Standard;
        const auto v = fooling_validity(P, r, kind, std::max(4, 16 / P.dim()), rng.next());
        c.expect(v.zero_on_design && v.peak_matches && v.feasible, [&] {
            return json{{"target", where},         {"r", r},
                        {"zero_on_design", v.zero_on_design}, {"nonzero_at", v.bad_point},
                        {"peak_error", v.peak_error}, {"max_derivative", v.max_derivative}};
        });
    }
}

inline void check_volume_bound(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int t = 0; t < 100; ++t) {
        const int d = rng.uniform_int(1, 4);
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 128));
        const auto P = random_pointset(rng, d, n);
        const auto fp = farthest_point(P, 64 / d);
        const double radius = analytic_radius(n, d);
        c.expect(fp.distance >= radius, [&] {
            return json{{"d", d}, {"n", n}, {"distance", fp.distance}, {"radius", radius}, {"z", to_json(fp.z)}};
        });
    }
}

inline void check_bakhvalov_consistency(Check& c, std::uint64_t seed)
{
    for (int d = 1; d <= 3; ++d)
        for (int r = 1; r <= 3; ++r)
            for (int m = 1; m <= 4; ++m) {
                const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
                const auto cert = certify_lower_bound(design.all_points(), SmoothnessClass{r, d, ClassKind::Standard},
                                                      default_K_hat(r, 0), 4 * m, seed, 1000);
                const double upper = envelope_closed(d, r, m, ClassKind::Standard);
                c.expect(cert.bound <= upper, [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"lower", cert.bound}, {"upper", upper}};
                });
            }
}

// envelopes -----------------------------------------------------------------

inline void check_recursive_below_closed(Check& c, std::uint64_t)
{
    for (int d = 1; d <= 6; ++d)
        for (int r : {2, 4})
            for (int m = 1; m <= 8; ++m) {
                const double rec = envelope_recursive(d, r, m);
                const double closed = envelope_closed(d, r, m, ClassKind::Standard);
                c.expect(rec <= closed * (1 + 1e-12), [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"recursive", rec}, {"closed", closed}};
                });
            }
}

inline void check_directional_below_standard(Check& c, std::uint64_t)
{
    for (int d = 1; d <= 6; ++d)
        for (int r = 1; r <= 8; ++r)
            for (int m = 1; m <= 16; ++m) {
                const double dir = envelope_closed(d, r, m, ClassKind::Directional);
                const double scaled = std::numbers::e * std::pow(d, 0.5 * r) / std::pow(2.0 * m, r);
                c.expect(dir <= scaled, [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"directional", dir}, {"e_scaled", scaled}};
                });
            }
}

inline void check_odd_consistency(Check& c, std::uint64_t)
{
    for (int d = 1; d <= 6; ++d)
        for (int r : {3, 5, 7})
            for (int m = 1; m <= 8; ++m) {
                const double odd = envelope_closed(d, r, m, ClassKind::Standard);
                const double composed = (d / (2.0 * m)) * envelope_closed(d, r - 1, m, ClassKind::Standard);
                c.expect(within_rel(odd, composed, 1e-12), [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"closed", odd}, {"composed", composed}};
                });
            }
}

inline void check_dimension_shape(Check& c, std::uint64_t)
{
    for (int r : {2, 4, 6})
        for (int m = 1; m <= 8; ++m)
            for (int d = 1; d <= 6; ++d) {
                const double ratio =
                    envelope_closed(d, r, m, ClassKind::Standard) / envelope_closed(1, r, m, ClassKind::Standard);
                const double expected = std::pow(d, r / 2);
                c.expect(within_rel(ratio, expected, 1e-12), [&] {
                    return json{{"d", d}, {"r", r}, {"m", m}, {"ratio", ratio}, {"expected", expected}};
                });
            }
}

inline void check_monotonicity(Check& c, std::uint64_t)
{
    using Envelope = std::function<double(int, int, int)>;
    const std::vector<std::pair<std::string, Envelope>> envelopes = {
        {"closed-standard", [](int d, int r, int m) { return envelope_closed(d, r, m, ClassKind::Standard); }},
        {"closed-directional", [](int d, int r, int m) { return envelope_closed(d, r, m, ClassKind::Directional); }},
        {"recursive-standard", [](int d, int r, int m) { return envelope_recursive(d, r, m); }},
        {"recursive-directional",
         [](int d, int r, int m) { return envelope_recursive(d, r, m, ClassKind::Directional); }},
    };
    for (const auto& [name, env] : envelopes)
        for (int r = 1; r <= 6; ++r)
            for (int d = 1; d <= 6; ++d)
                for (int m = 1; m <= 8; ++m) {
                    const double here = env(d, r, m);
                    const double next_m = env(d, r, m + 1);
                    const double next_d = env(d + 1, r, m);
                    c.expect(next_m < here && next_d >= here, [&] {
                        return json{{"envelope", name}, {"d", d}, {"r", r}, {"m", m}, {"value", here},
                                    {"at_m_plus_1", next_m}, {"at_d_plus_1", next_d}};
                    });
                }
}

// lab -----------------------------------------------------------------------

inline void check_battery_membership(Check& c, std::uint64_t seed)
{
    for (const auto id : battery_ids)
        for (int r = 1; r <= 4; ++r)
            for (int d = 1; d <= 4; ++d) {
                const auto f = battery(id, r, d);
                const double worst = *std::max_element(f.certificate().begin(), f.certificate().end());
                const auto spot = spot_check_membership(f, r, d, seed + static_cast<std::uint64_t>(100 * r + d));
                c.expect(worst <= 1.0 && spot.passed, [&] {
                    return json{{"function", id}, {"r", r}, {"d", d}, {"certificate", f.certificate()},
                                {"sampled_max", spot.max_derivative}};
                });
            }
}

/// h^2 cos(x_1 - a): satisfies the hypothesis everywhere.
struct ShiftedCosine {
    double amplitude;
    double a;
    double operator()(std::span<const double> x) const { return amplitude * std::cos(x[0] - a); }
    std::vector<double> gradient(std::span<const double> x) const
    {
        std::vector<double> g(x.size(), 0.0);
        g[0] = -amplitude * std::sin(x[0] - a);
        return g;
    }
};

inline void check_mean_value_fact(Check& c, std::uint64_t seed)
{
    Rng rng(seed);
    for (int t = 0; t < 50; ++t) {
        const int d = rng.uniform_int(1, 3);
        const double h = rng.uniform(1e-3, 0.5);
        const auto M = random_pointset(rng, d, static_cast<std::size_t>(rng.uniform_int(1, 10)));
        const int axis = rng.uniform_int(0, d - 1);

        const auto zero = verify_mean_value_fact(ShiftedCosine{0.0, 0.0}, M, h, axis);
        c.expect(zero.status == MeanValueStatus::Pass,
                 [&] { return json{{"instance", "zero"}, {"h", h}, {"status", to_string(zero.status)}}; });

        const auto half = verify_mean_value_fact(battery("const", 2, d), M, h, axis);
        c.expect(half.status == MeanValueStatus::PreconditionViolation,
                 [&] { return json{{"instance", "const 1/2"}, {"h", h}, {"status", to_string(half.status)}}; });

        const ShiftedCosine small{h * h, rng.uniform(0.0, 1.0)};
        const auto ok = verify_mean_value_fact(small, M, h, 0);
        c.expect(ok.status == MeanValueStatus::Pass, [&] {
            return json{{"instance", "h^2 cos"}, {"h", h}, {"status", to_string(ok.status)},
                        {"max_partial", ok.max_abs_partial}};
        });

        const ShiftedCosine big{2.0 * h * h, 0.5};
        const auto gated = verify_mean_value_fact(big, M, h, 0);
        const bool violates = gated.max_abs_value > h * h;
        c.expect(!violates || gated.status == MeanValueStatus::PreconditionViolation, [&] {
            return json{{"instance", "2 h^2 cos"}, {"h", h}, {"status", to_string(gated.status)}};
        });
    }
}

inline SweepConfig small_sweep(std::uint64_t seed)
{
    SweepConfig cfg;
    cfg.d_list = {1, 2};
    cfg.r_list = {1, 2};
    cfg.m_list = {2, 3};
    cfg.probe_m = 8;
    cfg.seed = seed;
    return cfg;
}

inline void check_sweep_determinism(Check& c, std::uint64_t seed)
{
    const auto cfg = small_sweep(seed);
    const auto first = run_sweep(cfg);
    const auto second = run_sweep(cfg);
    c.expect(first == second, [&] { return json{{"first_bytes", first.size()}, {"second_bytes", second.size()}}; });
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out(1);
    for (char ch : s) {
        if (ch == sep)
            out.emplace_back();
        else
            out.back() += ch;
    }
    return out;
}

inline void check_sweep_cost_accounting(Check& c, std::uint64_t seed)
{
    const auto csv = run_sweep(small_sweep(seed));
    const auto lines = split(csv, '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const auto f = split(lines[i], ',');
        const int d = std::stoi(f[0]);
        const int r = std::stoi(f[1]);
        const int m = std::stoi(f[2]);
        const double n = std::stod(f[5]);
        const double budget = std::pow(d + 1.0, r - 1) * std::pow(m + 1.0, d);
        const double closed = std::stod(f[8]);
        const bool lower_ok = f[10].empty() || std::stod(f[10]) <= closed;
        const bool const_ok = f[4] != "const" || std::stod(f[7]) <= 1e-12;
        c.expect(f.size() == 13 && n <= budget && lower_ok && const_ok,
                 [&] { return json{{"row", lines[i]}, {"budget", budget}}; });
    }
}

} // namespace detail

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const noexcept
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

inline json to_json(const VerifyReport& report)
{
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"cases", c.cases},
                              {"counterexample", c.counterexample}});
    return json{{"seed", report.seed}, {"passed", report.passed()}, {"checks", checks}};
}

using CheckFn = void (*)(detail::Check&, std::uint64_t);

/// Every named invariant, in report order.
inline const std::vector<std::pair<std::string, CheckFn>>& invariant_checks()
{
    static const std::vector<std::pair<std::string, CheckFn>> checks = {
        {"core.multiindex_count", detail::check_multiindex_count},
        {"core.nearest_grid_point", detail::check_nearest_grid_point},
        {"core.sample_table_roundtrip", detail::check_sample_table_roundtrip},
        {"designs.recovery_design_budget", detail::check_recovery_design_budget},
        {"designs.cloud_expansion", detail::check_cloud_expansion},
        {"designs.proof_schedule", detail::check_proof_schedule},
        {"designs.points_in_cube", detail::check_points_in_cube},
        {"recover.affine_exactness", detail::check_affine_exactness},
        {"recover.grid_interpolation", detail::check_grid_interpolation},
        {"recover.convergence_rate", detail::check_convergence_rate},
        {"recover.optimization_sandwich", detail::check_optimization_sandwich},
        {"recover.derivative_bias", detail::check_derivative_bias},
        {"adversary.bump_support", detail::check_bump_support},
        {"adversary.seam_smoothness", detail::check_seam_smoothness},
        {"adversary.class_feasibility", detail::check_class_feasibility},
        {"adversary.volume_bound", detail::check_volume_bound},
        {"adversary.bakhvalov_consistency", detail::check_bakhvalov_consistency},
        {"envelopes.recursive_below_closed", detail::check_recursive_below_closed},
        {"envelopes.directional_below_standard", detail::check_directional_below_standard},
        {"envelopes.odd_consistency", detail::check_odd_consistency},
        {"envelopes.dimension_shape", detail::check_dimension_shape},
        {"envelopes.monotonicity", detail::check_monotonicity},
        {"lab.battery_membership", detail::check_battery_membership},
        {"lab.mean_value_fact", detail::check_mean_value_fact},
        {"lab.sweep_determinism", detail::check_sweep_determinism},
        {"lab.sweep_cost_accounting", detail::check_sweep_cost_accounting},
    };
    return checks;
}

/// Runs every invariant check. Each check draws from its own seed derived
/// from `seed` and its position, so reports are reproducible check by check.
/// An exception inside a check is reported as that check's counterexample.
inline VerifyReport verify_suite(std::uint64_t seed)
{
    VerifyReport report;
    report.seed = seed;
    std::uint64_t position = 0;
    for (const auto& [name, fn] : invariant_checks()) {
        detail::Check check(name);
        try {
            fn(check, seed * 1000003ULL + ++position);
        } catch (const std::exception& e) {
            check.result().passed = false;
            check.result().counterexample = json{{"exception", e.what()}};
        }
        report.checks.push_back(std::move(check.result()));
    }
    return report;
}

} // namespace cuberec
