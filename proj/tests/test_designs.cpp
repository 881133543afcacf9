#include "cuberec/designs.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace cuberec;
using Catch::Matchers::WithinRel;

namespace {

std::vector<std::vector<double>> coords_of(const PointSet& p)
{
    std::vector<std::vector<double>> out;
    for (const auto& x : p)
        out.push_back(x.vec());
    return out;
}

PointSet make_set(int d, std::vector<std::vector<double>> pts)
{
    PointSet s(d);
    for (auto& p : pts)
        s.insert(Point(std::move(p)));
    return s;
}

} // namespace

TEST_CASE("grids list every lattice point in lexicographic order", "[designs]")
{
    CHECK(coords_of(build_grid(GridSpec(2, 1))) == std::vector<std::vector<double>>{{0.0}, {0.5}, {1.0}});
    const auto cube = build_grid(GridSpec(1, 3));
    CHECK(cube.size() == 8);
    for (const auto& v : cube)
        for (double c : v.coords())
            CHECK((c == 0.0 || c == 1.0));
    const auto g = build_grid(GridSpec(2, 2));
    CHECK(g.size() == 9);
    CHECK(g[1].vec() == std::vector<double>{0.0, 0.5});
    CHECK(g[3].vec() == std::vector<double>{0.5, 0.0});
    CHECK(std::is_sorted(g.begin(), g.end(), [](const Point& a, const Point& b) { return a.vec() < b.vec(); }));
}

TEST_CASE("point sets deduplicate and keep insertion order", "[designs]")
{
    PointSet s(1);
    CHECK(s.insert(Point({0.5})));
    CHECK(s.insert(Point({0.25})));
    CHECK_FALSE(s.insert(Point({0.5})));
    CHECK(s.size() == 2);
    CHECK(s[1].vec() == std::vector<double>{0.25});
    CHECK_THROWS_AS(s.insert(Point({0.5, 0.5})), invalid_argument_error);
}

TEST_CASE("cloud expansion reflects at the boundary", "[designs]")
{
    const auto e = expand_cloud(make_set(2, {{0.0, 1.0}}), 0.25);
    CHECK(coords_of(e) == std::vector<std::vector<double>>{{0.0, 1.0}, {0.25, 1.0}, {0.0, 0.75}});
    CHECK(coords_of(expand_cloud(make_set(1, {{0.5}}), 0.25)) == std::vector<std::vector<double>>{{0.5}, {0.75}});
    CHECK(expand_cloud(build_grid(GridSpec(1, 2)), 0.1).size() <= 12);
    CHECK_THROWS_AS(expand_cloud(make_set(1, {{0.5}}), 0.0), invalid_argument_error);
    CHECK_THROWS_AS(expand_cloud(make_set(1, {{0.5}}), 0.6), invalid_argument_error);
}

TEST_CASE("cloud expansion adds only single-axis steps of exactly h", "[designs]")
{
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        const int d = rng.uniform_int(1, 4);
        const double h = rng.uniform(0.01, 0.5);
        PointSet M(d);
        const int n = rng.uniform_int(1, 12);
        for (int i = 0; i < n; ++i)
            M.insert(Point(rng.cube_point(d)));
        const auto E = expand_cloud(M, h);
        CHECK(E.size() <= static_cast<std::size_t>(d + 1) * M.size());
        for (const auto& p : M)
            CHECK(E.contains(p));
        for (const auto& q : E) {
            if (M.contains(q))
                continue;
            const bool has_parent = std::any_of(M.begin(), M.end(), [&](const Point& p) {
                int moved = 0;
                bool exact = true;
                for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j)
                    if (q[j] != p[j]) {
                        ++moved;
                        exact = exact && (q[j] == p[j] + h || q[j] == p[j] - h);
                    }
                return moved == 1 && exact;
            });
            CHECK(has_parent);
        }
    }
}

TEST_CASE("proof schedule values", "[designs]")
{
    const auto s3 = proof_schedule(0.9, 3);
    REQUIRE(s3.steps.size() == 2);
    CHECK_THAT(s3.steps[0], WithinRel(0.3, 1e-14));
    CHECK_THAT(s3.steps[1], WithinRel(0.03, 1e-14));
    const auto s2 = proof_schedule(0.9, 2);
    REQUIRE(s2.steps.size() == 1);
    CHECK_THAT(s2.steps[0], WithinRel(0.3, 1e-14));
    CHECK(proof_schedule(0.5, 1).steps.empty());
    CHECK_THROWS_AS(proof_schedule(0.0, 2), invalid_argument_error);
    CHECK_THROWS_AS(proof_schedule(1.0, 2), invalid_argument_error);
    CHECK_THROWS_AS(proof_schedule(0.5, 12), underflow_error);
}

TEST_CASE("proof schedule squares step to step", "[designs]")
{
    for (double delta : {0.01, 0.1, 0.5, 0.9, 0.999})
        for (int r = 2; r <= 7; ++r) {
            const auto s = proof_schedule(delta, r);
            for (std::size_t i = 1; i < s.steps.size(); ++i)
                CHECK_THAT(3.0 * s.steps[i], WithinRel(s.steps[i - 1] * s.steps[i - 1], 1e-12));
        }
}

TEST_CASE("proof point sets", "[designs]")
{
    const auto q = build_grid(GridSpec(2, 2));
    CHECK(build_proof_pointset(q, 0.9, 1).size() == q.size());
    CHECK(build_proof_pointset(q, 0.9, 3).size() <= 81);
    const auto p = build_proof_pointset(make_set(1, {{0.5}}), 0.9, 2);
    REQUIRE(p.size() == 2);
    CHECK(p[0].vec() == std::vector<double>{0.5});
    CHECK_THAT(p[1][0], WithinRel(0.8, 1e-15));
}

TEST_CASE("recovery design stencils follow the orientation rule", "[designs]")
{
    const auto d1 = build_recovery_design(GridSpec(1, 1), 2, 0.1);
    REQUIRE(d1.grid_size() == 2);
    CHECK(d1.orientation(0)[0] == 1);
    CHECK(d1.orientation(1)[0] == -1);
    CHECK(d1.stencil_coords(0, 1) == std::vector<double>{0.1});
    CHECK_THAT(d1.stencil_coords(1, 1)[0], WithinRel(0.9, 1e-15));
    CHECK(d1.all_points().size() == 4);

    const auto bare = build_recovery_design(GridSpec(2, 2), 1, 0.25);
    CHECK(bare.all_points().size() == 9);
    CHECK(bare.offsets().size() == 1);

    const auto d3 = build_recovery_design(GridSpec(1, 2), 3, 0.05);
    CHECK(d3.offsets().size() == 6);
    CHECK(d3.offsets().size() <= 9);
}

TEST_CASE("recovery design rejects oversized steps", "[designs]")
{
    CHECK_THROWS_AS(build_recovery_design(GridSpec(2, 1), 3, 0.6), invalid_step_error);
    CHECK_THROWS_AS(build_recovery_design(GridSpec(2, 1), 2, 0.0), invalid_step_error);
    CHECK_THROWS_AS(build_recovery_design(GridSpec(2, 1), 2, -0.1), invalid_step_error);
    CHECK_NOTHROW(build_recovery_design(GridSpec(1, 1), 3, 0.5));
    // h(r-1) = 1 from the midpoint 1/2 reaches outside whichever way it faces.
    CHECK_THROWS_AS(build_recovery_design(GridSpec(2, 1), 3, 0.5), invalid_step_error);
}

TEST_CASE("recovery design cost stays within the budget and inside the cube", "[designs]")
{
    for (int d = 1; d <= 4; ++d)
        for (int r = 1; r <= 4; ++r)
            for (int m = 1; m <= 4; ++m) {
                const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
                INFO("d=" << d << " r=" << r << " m=" << m);
                CHECK(static_cast<double>(design.all_points().size()) <= design.cost_budget());
                CHECK(design.cost_budget() == std::pow(d + 1.0, r - 1) * std::pow(m + 1.0, d));
                for (const auto& p : design.all_points())
                    for (double c : p.coords())
                        CHECK((c >= 0.0 && c <= 1.0));
                CHECK(design.offsets().size() ==
                      binomial(static_cast<std::uint64_t>(d + r - 1), static_cast<std::uint64_t>(d)));
            }
}

TEST_CASE("default step keeps the stencil within half a cell", "[designs]")
{
    CHECK(default_step(4, 1) == 0.125);
    CHECK(default_step(4, 2) == 0.125);
    CHECK(default_step(4, 3) == 0.0625);
}
