#include "cuberec/lab.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

using namespace cuberec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells(1);
        for (char c : line) {
            if (c == ',')
                cells.emplace_back();
            else
                cells.back() += c;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

struct Zero {
    double operator()(std::span<const double>) const { return 0.0; }
    std::vector<double> gradient(std::span<const double> x) const { return std::vector<double>(x.size(), 0.0); }
};

/// Satisfies the value gate but breaks the conclusion; only possible outside C^2.
struct SteepZigzag {
    double h;
    double operator()(std::span<const double>) const { return 0.0; }
    std::vector<double> gradient(std::span<const double> x) const
    {
        std::vector<double> g(x.size(), 0.0);
        g[0] = 10.0 * h;
        return g;
    }
};

PointSet sample_set(int d, int n, std::uint64_t seed)
{
    Rng rng(seed);
    return random_pointset(rng, d, static_cast<std::size_t>(n));
}

} // namespace

TEST_CASE("battery functions and their certificates", "[lab]")
{
    const std::vector<double> x{0.2, 0.7};
    CHECK(battery("const", 3, 2)(x) == 0.5);
    CHECK_THAT(battery("affine", 2, 2)(x), WithinAbs(0.9 / 4, 1e-15));
    CHECK(battery("affine", 2, 2).gradient(x) == std::vector<double>{0.25, 0.25});

    const auto s = battery("sinsum", 2, 2);
    CHECK(s.scale() == 0.25);
    CHECK_THAT(s(x), WithinAbs(0.25 * std::sin(0.9), 1e-15));
    // Every partial of order <= 2 of 0.25 sin(x1 + x2) is +-0.25 sin or cos: at most 1/4.
    for (double c : s.certificate())
        CHECK(c <= 0.5);

    for (const auto id : battery_ids)
        for (int r = 0; r <= 5; ++r)
            for (int d = 1; d <= 6; ++d) {
                const auto f = battery(id, r, d);
                CHECK(f.certificate().size() == static_cast<std::size_t>(r + 1));
                for (double c : f.certificate())
                    CHECK(c <= 0.5 + 1e-15);
                CHECK(f.scale() > 0.0);
            }
    CHECK_THROWS_AS(battery("nope", 2, 2), unknown_function_error);
    CHECK_THROWS_AS(battery("sinsum", -1, 2), invalid_argument_error);
}

TEST_CASE("battery gradients match finite differences", "[lab]")
{
    Rng rng(6);
    for (const auto id : battery_ids) {
        const auto f = battery(id, 3, 3);
        for (int t = 0; t < 20; ++t) {
            auto x = rng.cube_point(3);
            for (double& c : x)
                c = 0.01 + 0.98 * c;
            const auto g = f.gradient(x);
            for (std::size_t j = 0; j < 3; ++j) {
                auto up = x, down = x;
                up[j] += 1e-6;
                down[j] -= 1e-6;
                CHECK_THAT(g[j], WithinAbs((f(up) - f(down)) / 2e-6, 1e-8));
            }
        }
    }
}

TEST_CASE("battery membership spot checks", "[lab]")
{
    for (const auto id : battery_ids)
        for (int r = 1; r <= 4; ++r)
            for (int d = 1; d <= 4; ++d) {
                const auto f = battery(id, r, d);
                const auto check = spot_check_membership(f, r, d, static_cast<std::uint64_t>(10 * r + d));
                INFO(id << " r=" << r << " d=" << d << " max=" << check.max_derivative);
                CHECK(check.samples == 200);
                CHECK(check.passed);
            }
}

TEST_CASE("mean value fact on constructed instances", "[lab]")
{
    const auto M = sample_set(2, 8, 1);
    const double h = 0.1;

    const auto zero = verify_mean_value_fact(Zero{}, M, h, 0);
    CHECK(zero.status == MeanValueStatus::Pass);

    struct Cosine {
        double amp, a;
        double operator()(std::span<const double> x) const { return amp * std::cos(x[0] - a); }
        std::vector<double> gradient(std::span<const double> x) const
        {
            return {-amp * std::sin(x[0] - a), 0.0};
        }
    };
    const auto cos_ok = verify_mean_value_fact(Cosine{h * h, 0.4}, M, h, 0);
    CHECK(cos_ok.status == MeanValueStatus::Pass);
    CHECK(cos_ok.max_abs_partial <= h * h);

    const auto gated = verify_mean_value_fact(battery("const", 2, 2), M, h, 1);
    CHECK(gated.status == MeanValueStatus::PreconditionViolation);
    CHECK(gated.witness.size() == 2);

    const auto broken = verify_mean_value_fact(SteepZigzag{h}, M, h, 0);
    CHECK(broken.status == MeanValueStatus::Fail);

    CHECK_THROWS_AS(verify_mean_value_fact(Zero{}, M, h, 2), invalid_argument_error);
    CHECK_THROWS_AS(verify_mean_value_fact(Zero{}, M, 0.7, 0), invalid_argument_error);
}

TEST_CASE("mean value fact holds for small scaled battery functions", "[lab]")
{
    // s f with s chosen so |s f| <= h^2; any C^2 function with that gate must pass.
    for (const auto id : battery_ids)
        for (double h : {0.05, 0.2, 0.5}) {
            const auto f = battery(id, 2, 2);
            struct Scaled {
                const BatteryFunction& f;
                double s;
                double operator()(std::span<const double> x) const { return s * f(x); }
                std::vector<double> gradient(std::span<const double> x) const
                {
                    auto g = f.gradient(x);
                    for (double& v : g)
                        v *= s;
                    return g;
                }
            };
            const Scaled small{f, 2.0 * h * h};
            const auto M = sample_set(2, 10, 3);
            for (int axis = 0; axis < 2; ++axis) {
                const auto rep = verify_mean_value_fact(small, M, h, axis);
                CHECK(rep.status == MeanValueStatus::Pass);
            }
        }
}

TEST_CASE("sweep config parsing and validation", "[lab]")
{
    const auto c = sweep_config_from_json(json::parse(R"({"d_list":[2],"r_list":[1,3],"m_list":[4],
        "kind":"Directional","probe_m":12,"seed":9,"output_path":"x.csv","functions":["gauss"]})"));
    CHECK(c.d_list == std::vector<int>{2});
    CHECK(c.kind == ClassKind::Directional);
    CHECK(c.seed == 9);
    CHECK(c.functions == std::vector<std::string>{"gauss"});
    CHECK(to_json(c)["probe_m"] == 12);

    CHECK_THROWS_AS(sweep_config_from_json(json::parse(R"({"d_list":[]})")), invalid_argument_error);
    CHECK_THROWS_AS(sweep_config_from_json(json::parse(R"({"m_list":[0]})")), invalid_argument_error);
    CHECK_THROWS_AS(sweep_config_from_json(json::parse(R"({"d_list":"two"})")), invalid_argument_error);
    CHECK_THROWS_AS(sweep_config_from_json(json::parse(R"({"functions":["nope"]})")), unknown_function_error);
    CHECK_THROWS_AS(sweep_config_from_json(json::parse(R"({"d_list":[6],"m_list":[100]})")), resource_error);
}

TEST_CASE("sweep rows", "[lab]")
{
    SweepConfig cfg;
    cfg.d_list = {2, 1};
    cfg.r_list = {2};
    cfg.m_list = {4, 2};
    cfg.probe_m = 8;
    const auto csv = run_sweep(cfg);
    const auto rows = parse_csv(csv);
    REQUIRE(rows.size() == 1 + 2 * 2 * battery_ids.size());
    CHECK(csv.rfind(sweep_csv_header, 0) == 0);

    std::vector<std::tuple<int, int, int>> order;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i];
        REQUIRE(f.size() == 13);
        const int d = std::stoi(f[0]), r = std::stoi(f[1]), m = std::stoi(f[2]);
        order.emplace_back(d, r, m);
        CHECK(f[3] == "Standard");
        CHECK(std::stod(f[5]) <= std::pow(d + 1.0, r - 1) * std::pow(m + 1.0, d));
        CHECK(std::stod(f[6]) == default_step(m, r));
        CHECK(std::stod(f[8]) == envelope_closed(d, r, m, ClassKind::Standard));
        CHECK(std::stod(f[9]) == envelope_recursive(d, r, m));
        REQUIRE_FALSE(f[10].empty());
        CHECK(std::stod(f[10]) <= std::stod(f[8]));
        CHECK(std::stod(f[11]) == default_K_hat(r, 0));
        CHECK(f[12] == "0");
        if (f[4] == "const")
            CHECK(std::stod(f[7]) <= 1e-12);
    }
    CHECK(std::is_sorted(order.begin(), order.end()));
}

TEST_CASE("sweep rate for sinsum when doubling m", "[lab]")
{
    SweepConfig cfg;
    cfg.d_list = {1};
    cfg.r_list = {2};
    cfg.m_list = {4, 8, 16};
    cfg.probe_m = 4;
    cfg.functions = {"sinsum"};
    const auto rows = parse_csv(run_sweep(cfg));
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double ratio = std::stod(rows[i][7]) / std::stod(rows[i - 1][7]);
        CHECK(ratio >= std::pow(2.0, -2.5));
        CHECK(ratio <= std::pow(2.0, -1.5));
    }
}

TEST_CASE("sweeps are byte-for-byte deterministic", "[lab]")
{
    SweepConfig cfg;
    cfg.d_list = {1, 2};
    cfg.r_list = {1, 3};
    cfg.m_list = {2};
    cfg.probe_m = 6;
    cfg.seed = 5;
    CHECK(run_sweep(cfg) == run_sweep(cfg));
}

TEST_CASE("sweep resource errors name the offending tuple", "[lab]")
{
    SweepConfig cfg;
    cfg.d_list = {2};
    cfg.r_list = {4};
    cfg.m_list = {30};
    setenv(point_cap_env, "5000", 1);
    try {
        (void)run_sweep(cfg);
        FAIL("expected a resource error");
    } catch (const resource_error& e) {
        CHECK(std::string(e.what()).find("(d=2, r=4, m=30)") != std::string::npos);
    }
    unsetenv(point_cap_env);
}

TEST_CASE("verification report", "[lab]")
{
    const auto report = verify_suite(0);
    std::set<std::string> names;
    for (const auto& c : report.checks) {
        INFO(c.name << ": " << c.counterexample.dump());
        CHECK(c.passed);
        CHECK(c.cases > 0);
        CHECK(c.counterexample.is_null());
        names.insert(c.name);
    }
    CHECK(names.size() == invariant_checks().size());
    CHECK(report.passed());
    const auto j = to_json(report);
    CHECK(j["passed"] == true);
    CHECK(j["checks"].size() == invariant_checks().size());
    CHECK(j.dump() == to_json(verify_suite(0)).dump());
}

TEST_CASE("verification failures carry counterexamples", "[lab]")
{
    setenv(point_cap_env, "10", 1);
    const auto report = verify_suite(0);
    unsetenv(point_cap_env);
    CHECK_FALSE(report.passed());
    for (const auto& c : report.checks)
        if (!c.passed)
            CHECK_FALSE(c.counterexample.is_null());
}

TEST_CASE("io encodings", "[lab]")
{
    CHECK(to_json(MultiIndex({2, 0, 1})).dump() == "[2,0,1]");
    CHECK(to_json(Point({0.5, 1.0})).dump() == "[0.5,1.0]");
    CHECK(multiindex_from_json(json::parse("[1,2]")) == MultiIndex({1, 2}));

    const auto design = build_recovery_design(GridSpec(1, 2), 2, 0.25);
    const auto j = to_json(design);
    CHECK(j["grid"]["m"] == 1);
    CHECK(j["grid"]["d"] == 2);
    CHECK(j["r"] == 2);
    CHECK(j["h"] == 0.25);
    CHECK(j["points"].size() == design.all_points().size());
    const auto back = pointset_from_json(j);
    CHECK(back.size() == design.all_points().size());
    for (const auto& p : design.all_points())
        CHECK(back.contains(p));
    CHECK(pointset_from_json(json::parse(R"({"grid":{"m":1,"d":3},"points":[]})")).dim() == 3);
    CHECK_THROWS_AS(pointset_from_json(json::parse(R"({"grid":{"m":1,"d":3}})")), invalid_argument_error);

    const auto table = build_envelope_table(4, 2, 5, ClassKind::Standard);
    const auto csv = to_csv(table);
    CHECK(csv.rfind("d,r,m,kind,source,bound\n", 0) == 0);
    CHECK(csv.find("4,2,5,Standard,ClosedForm,0.10873127313836") != std::string::npos);
    CHECK(format_double(0.1) == "0.10000000000000001");
}
