#include "cuberec/core.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

using namespace cuberec;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::vector<int>> entries_of(const std::vector<MultiIndex>& list)
{
    std::vector<std::vector<int>> out;
    for (const auto& b : list)
        out.push_back(b.entries());
    return out;
}

// Brute force: every vector in {0..k}^d with sum <= k.
std::uint64_t count_by_brute_force(int d, int k)
{
    std::uint64_t count = 0;
    std::vector<int> v(static_cast<std::size_t>(d), 0);
    while (true) {
        int s = 0;
        for (int e : v)
            s += e;
        if (s <= k)
            ++count;
        std::size_t j = 0;
        while (j < v.size() && ++v[j] > k)
            v[j++] = 0;
        if (j == v.size())
            break;
    }
    return count;
}

} // namespace

TEST_CASE("multi-indices are enumerated in graded order", "[core]")
{
    CHECK(entries_of(enumerate_multiindices(2, 1)) == std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}});
    CHECK(entries_of(enumerate_multiindices(1, 3)) == std::vector<std::vector<int>>{{0}, {1}, {2}, {3}});
    CHECK(enumerate_multiindices(3, 2).size() == 10);
    CHECK(entries_of(enumerate_multiindices(2, 2)) ==
          std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});
}

TEST_CASE("multi-index count matches a brute-force census", "[core]")
{
    for (int d = 1; d <= 8; ++d)
        for (int k = 0; k <= 6; ++k) {
            if (d >= 7 && k == 6)
                continue; // brute force gets slow; the binomial check below still covers it
            INFO("d=" << d << " k=" << k);
            CHECK(enumerate_multiindices(d, k).size() == count_by_brute_force(d, k));
        }
    for (int d = 1; d <= 8; ++d)
        for (int k = 0; k <= 6; ++k) {
            const auto all = enumerate_multiindices(d, k);
            CHECK(all.size() == binomial(static_cast<std::uint64_t>(d + k), static_cast<std::uint64_t>(d)));
            std::set<std::vector<int>> unique;
            for (const auto& b : all) {
                CHECK(b.order() <= k);
                unique.insert(b.entries());
            }
            CHECK(unique.size() == all.size());
        }
}

TEST_CASE("multi-index order and dominance", "[core]")
{
    const MultiIndex b({2, 1, 0});
    CHECK(b.order() == 3);
    CHECK(b.dim() == 3);
    CHECK(b.dominates(MultiIndex({1, 1, 0})));
    CHECK_FALSE(b.dominates(MultiIndex({0, 0, 1})));
    CHECK_THROWS_AS(MultiIndex({}), invalid_argument_error);
    CHECK_THROWS_AS(MultiIndex({1, -1}), invalid_argument_error);
}

TEST_CASE("factorial weights", "[core]")
{
    CHECK(factorial_weight(MultiIndex({0, 0})) == 1.0);
    CHECK(factorial_weight(MultiIndex({2, 1})) == 0.5);
    CHECK_THAT(factorial_weight(MultiIndex({3})), WithinAbs(1.0 / 6.0, 1e-17));
    CHECK(factorial_weight(MultiIndex({20})) == 1.0 / 2432902008176640000.0);
    CHECK_THROWS_AS(factorial_weight(MultiIndex({200})), overflow_error);
}

TEST_CASE("nearest grid point rounds half up", "[core]")
{
    const GridSpec g2(2, 2);
    CHECK(nearest_grid_point(Point({0.26, 0.74}), g2).vec() == std::vector<double>{0.5, 0.5});
    CHECK(nearest_grid_point(Point({0.25}), GridSpec(2, 1)).vec() == std::vector<double>{0.5});
    CHECK(nearest_grid_point(Point({0.5, 1.0}), g2).vec() == std::vector<double>{0.5, 1.0});
    CHECK(nearest_grid_point(Point({0.75}), GridSpec(2, 1)).vec() == std::vector<double>{1.0});
}

TEST_CASE("nearest grid point is idempotent and moves at most half a cell", "[core]")
{
    Rng rng(11);
    for (int t = 0; t < 5000; ++t) {
        const int d = rng.uniform_int(1, 4);
        const int m = rng.uniform_int(1, 20);
        const GridSpec grid(m, d);
        const Point x(rng.cube_point(d));
        const Point y = nearest_grid_point(x, grid);
        CHECK(nearest_grid_point(y, grid) == y);
        CHECK(sup_distance(x.coords(), y.coords()) <= 0.5 / m + 1e-15);
    }
}

TEST_CASE("grid indexing round-trips", "[core]")
{
    const GridSpec g(3, 3);
    CHECK(g.size() == 64);
    for (std::uint64_t i = 0; i < g.size(); ++i) {
        const auto ks = g.lattice_of(i);
        CHECK(g.index_of(ks) == i);
    }
    CHECK(g.point(1).vec() == std::vector<double>{0.0, 0.0, 1.0 / 3.0});
}

TEST_CASE("points validate the unit cube", "[core]")
{
    CHECK_NOTHROW(Point({0.0, 1.0}));
    CHECK_THROWS_AS(Point({1.1}), invalid_argument_error);
    CHECK_THROWS_AS(Point({-0.01}), invalid_argument_error);
    CHECK_THROWS_AS(Point(std::vector<double>{}), invalid_argument_error);
}

TEST_CASE("sample table returns inserted values exactly", "[core]")
{
    SampleTable t("probe");
    Rng rng(5);
    std::vector<std::pair<std::vector<double>, double>> kept;
    for (int i = 0; i < 300; ++i) {
        auto x = rng.cube_point(2);
        const double v = rng.normal() * 1e6;
        t.insert(Point(x), v);
        kept.emplace_back(x, v);
    }
    CHECK(t.size() == kept.size());
    CHECK(t.provenance() == "probe");
    for (const auto& [x, v] : kept)
        CHECK(t.find(x) == v);
    CHECK_FALSE(t.find(std::vector<double>{2.0, 2.0}).has_value());
}

TEST_CASE("sample table rejects bad entries", "[core]")
{
    SampleTable t;
    t.insert(Point({0.5}), 1.0);
    CHECK_NOTHROW(t.insert(Point({0.5}), 1.0));
    CHECK_THROWS_AS(t.insert(Point({0.5}), 2.0), invalid_argument_error);
    CHECK_THROWS_AS(t.insert(Point({0.25}), std::nan("")), invalid_argument_error);
    CHECK_THROWS_AS(t.insert(Point({0.25}), INFINITY), invalid_argument_error);
}

TEST_CASE("grid size respects the point cap", "[core]")
{
    CHECK(checked_grid_size(2, 3) == 27);
    CHECK_THROWS_AS(checked_grid_size(100, 5), resource_error);
}

TEST_CASE("class kinds parse and print", "[core]")
{
    CHECK(parse_class_kind("Standard") == ClassKind::Standard);
    CHECK(parse_class_kind("directional") == ClassKind::Directional);
    CHECK(std::string(to_string(ClassKind::Directional)) == "Directional");
    CHECK_THROWS_AS(parse_class_kind("Other"), invalid_argument_error);
    CHECK_THROWS_AS(SmoothnessClass(-1, 2, ClassKind::Standard), invalid_argument_error);
}

TEST_CASE("random streams are reproducible and well formed", "[core]")
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next() == b.next());
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto u = rng.unit_vector(5);
        double n = 0.0;
        for (double c : u)
            n += c * c;
        CHECK_THAT(std::sqrt(n), WithinAbs(1.0, 1e-12));
        const auto p = rng.ball_point(3);
        CHECK(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 + 1e-12);
        const double x = rng.uniform();
        CHECK((x >= 0.0 && x < 1.0));
    }
}
