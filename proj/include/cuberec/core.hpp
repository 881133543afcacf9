#pragma once

// Foundational types shared by every part of the library: multi-indices,
// points of the unit cube, regular grids, smoothness classes and sample
// tables. Everything here is immutable after construction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cuberec {

// ---------------------------------------------------------------------------
// Errors

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input outside an operation's precondition.
struct invalid_argument_error : error {
    using error::error;
};

struct invalid_step_error : invalid_argument_error {
    using invalid_argument_error::invalid_argument_error;
};

struct domain_error : invalid_argument_error {
    using invalid_argument_error::invalid_argument_error;
};

struct unknown_function_error : invalid_argument_error {
    using invalid_argument_error::invalid_argument_error;
};

/// A requested grid or point set exceeds the configured point cap.
struct resource_error : error {
    using error::error;
};

struct overflow_error : error {
    using error::error;
};

struct underflow_error : error {
    using error::error;
};

// ---------------------------------------------------------------------------
// Resource cap

inline constexpr std::uint64_t default_point_cap = 100'000'000;
inline constexpr const char* point_cap_env = "CUBEREC_POINT_CAP";

inline std::uint64_t point_cap()
{
    if (const char* env = std::getenv(point_cap_env)) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return default_point_cap;
}

/// (m+1)^d, throwing resource_error once it passes the cap.
inline std::uint64_t checked_grid_size(int m, int d)
{
    const std::uint64_t cap = point_cap();
    const std::uint64_t base = static_cast<std::uint64_t>(m) + 1;
    std::uint64_t n = 1;
    for (int j = 0; j < d; ++j) {
        if (n > cap / base)
            throw resource_error("grid with m=" + std::to_string(m) + ", d=" + std::to_string(d) +
                                 " exceeds the point cap of " + std::to_string(cap));
        n *= base;
    }
    if (n > cap)
        throw resource_error("grid with m=" + std::to_string(m) + ", d=" + std::to_string(d) +
                             " exceeds the point cap of " + std::to_string(cap));
    return n;
}

// ---------------------------------------------------------------------------
// Small integer helpers

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
        result = result * (n - k + i) / i;
    return result;
}

/// Saturating integer power; `saturated` is set when the result would overflow.
inline std::uint64_t ipow_saturating(std::uint64_t base, int exponent, bool& saturated)
{
    std::uint64_t result = 1;
    for (int i = 0; i < exponent; ++i) {
        if (base != 0 && result > std::numeric_limits<std::uint64_t>::max() / base) {
            saturated = true;
            return std::numeric_limits<std::uint64_t>::max();
        }
        result *= base;
    }
    return result;
}

// ---------------------------------------------------------------------------
// MultiIndex

/// A derivative order beta in N_0^d together with its total order |beta|.
class MultiIndex {
public:
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries))
    {
        if (entries_.empty())
            throw invalid_argument_error("multi-index needs dimension d >= 1");
        for (int e : entries_) {
            if (e < 0)
                throw invalid_argument_error("multi-index entries must be nonnegative");
            order_ += e;
        }
    }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(entries_.size()); }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] int operator[](std::size_t j) const noexcept { return entries_[j]; }
    [[nodiscard]] const std::vector<int>& entries() const noexcept { return entries_; }

    /// Componentwise k <= *this.
    [[nodiscard]] bool dominates(const MultiIndex& k) const noexcept
    {
        for (std::size_t j = 0; j < entries_.size(); ++j)
            if (k.entries_[j] > entries_[j])
                return false;
        return true;
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> entries_;
    int order_ = 0;
};

namespace detail {

inline void append_with_order(int d, int j, int remaining, std::vector<int>& prefix,
                              std::vector<MultiIndex>& out)
{
    if (j == d - 1) {
        prefix[j] = remaining;
        out.emplace_back(prefix);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        prefix[j] = e;
        append_with_order(d, j + 1, remaining - e, prefix, out);
    }
}

} // namespace detail

/// All beta with |beta| <= k_max in graded lexicographic order: by total
/// order, and within one order with the leading entry descending.
inline std::vector<MultiIndex> enumerate_multiindices(int d, int k_max)
{
    if (d < 1)
        throw invalid_argument_error("enumerate_multiindices: d must be >= 1");
    if (k_max < 0)
        throw invalid_argument_error("enumerate_multiindices: k_max must be >= 0");
    std::vector<MultiIndex> out;
    out.reserve(binomial(static_cast<std::uint64_t>(d + k_max), static_cast<std::uint64_t>(d)));
    std::vector<int> prefix(static_cast<std::size_t>(d), 0);
    for (int k = 0; k <= k_max; ++k)
        detail::append_with_order(d, 0, k, prefix, out);
    return out;
}

/// 1 / beta! = 1 / prod_j beta_j!.
inline double factorial_weight(const MultiIndex& beta)
{
    double denom = 1.0;
    for (int e : beta.entries())
        for (int i = 2; i <= e; ++i)
            denom *= i;
    if (!std::isfinite(denom))
        throw overflow_error("factorial_weight: beta! exceeds the double range");
    return 1.0 / denom;
}

// ---------------------------------------------------------------------------
// Points

inline constexpr double cube_tolerance = 1e-12;

/// A point of [0,1]^d.
class Point {
public:
    Point() = default;

    explicit Point(std::vector<double> coords) : coords_(std::move(coords))
    {
        if (coords_.empty())
            throw invalid_argument_error("point needs dimension d >= 1");
        for (double c : coords_)
            if (!(c >= -cube_tolerance && c <= 1.0 + cube_tolerance))
                throw invalid_argument_error("point coordinate " + std::to_string(c) +
                                             " lies outside [0,1]");
    }

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(coords_.size()); }
    [[nodiscard]] double operator[](std::size_t j) const noexcept { return coords_[j]; }
    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
    [[nodiscard]] const std::vector<double>& vec() const noexcept { return coords_; }

    friend bool operator==(const Point&, const Point&) = default;

private:
    std::vector<double> coords_;
};

/// Coordinates rounded to 1e-14, used as the identity of a point.
using PointKey = std::vector<std::int64_t>;

inline PointKey point_key(std::span<const double> coords)
{
    PointKey key(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j)
        key[j] = std::llround(coords[j] * 1e14);
    return key;
}

inline PointKey point_key(const Point& p) { return point_key(p.coords()); }

inline double sup_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        s = std::max(s, std::abs(a[j] - b[j]));
    return s;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Grids

/// The regular grid Q_m^d = {0, 1/m, ..., 1}^d.
struct GridSpec {
    int m = 1;
    int d = 1;

    GridSpec() = default;
    GridSpec(int m_, int d_) : m(m_), d(d_)
    {
        if (m < 1 || d < 1)
            throw invalid_argument_error("grid needs m >= 1 and d >= 1");
    }

    /// Number of points, (m+1)^d, checked against the point cap.
    [[nodiscard]] std::uint64_t size() const { return checked_grid_size(m, d); }

    /// Coordinate k/m. Every grid coordinate in the library goes through here
    /// so equal grid points are bit-identical.
    [[nodiscard]] double coordinate(int k) const noexcept
    {
        return static_cast<double>(k) / static_cast<double>(m);
    }

    /// Lexicographic linear index (last axis fastest).
    [[nodiscard]] std::uint64_t index_of(std::span<const int> ks) const noexcept
    {
        std::uint64_t idx = 0;
        for (int k : ks)
            idx = idx * static_cast<std::uint64_t>(m + 1) + static_cast<std::uint64_t>(k);
        return idx;
    }

    [[nodiscard]] std::vector<int> lattice_of(std::uint64_t idx) const
    {
        std::vector<int> ks(static_cast<std::size_t>(d));
        for (int j = d - 1; j >= 0; --j) {
            ks[static_cast<std::size_t>(j)] = static_cast<int>(idx % static_cast<std::uint64_t>(m + 1));
            idx /= static_cast<std::uint64_t>(m + 1);
        }
        return ks;
    }

    [[nodiscard]] Point point(std::uint64_t idx) const
    {
        const auto ks = lattice_of(idx);
        std::vector<double> c(ks.size());
        for (std::size_t j = 0; j < ks.size(); ++j)
            c[j] = coordinate(ks[j]);
        return Point(std::move(c));
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Lattice coordinates of the nearest grid point; halves round up.
inline std::vector<int> nearest_lattice(std::span<const double> x, const GridSpec& grid)
{
    std::vector<int> ks(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double k = std::floor(x[j] * grid.m + 0.5);
        ks[j] = std::clamp(static_cast<int>(k), 0, grid.m);
    }
    return ks;
}

/// y_j = round(x_j m)/m with ties rounding up; ||y - x||_inf <= 1/(2m).
inline Point nearest_grid_point(const Point& x, const GridSpec& grid)
{
    if (x.dim() != grid.d)
        throw invalid_argument_error("nearest_grid_point: dimension mismatch");
    const auto ks = nearest_lattice(x.coords(), grid);
    std::vector<double> c(ks.size());
    for (std::size_t j = 0; j < ks.size(); ++j)
        c[j] = grid.coordinate(ks[j]);
    return Point(std::move(c));
}

// ---------------------------------------------------------------------------
// Smoothness classes

enum class ClassKind { Standard, Directional };

inline const char* to_string(ClassKind k) noexcept
{
    return k == ClassKind::Standard ? "Standard" : "Directional";
}

inline ClassKind parse_class_kind(const std::string& s)
{
    if (s == "Standard" || s == "standard")
        return ClassKind::Standard;
    if (s == "Directional" || s == "directional")
        return ClassKind::Directional;
    throw invalid_argument_error("unknown class kind '" + s + "' (expected Standard or Directional)");
}

/// C^r_d (partial derivatives up to order r bounded by one) or its
/// directional counterpart.
struct SmoothnessClass {
    int r = 0;
    int d = 1;
    ClassKind kind = ClassKind::Standard;

    SmoothnessClass() = default;
    SmoothnessClass(int r_, int d_, ClassKind kind_) : r(r_), d(d_), kind(kind_)
    {
        if (r < 0 || d < 1)
            throw invalid_argument_error("smoothness class needs r >= 0 and d >= 1");
    }
};

// ---------------------------------------------------------------------------
// Sample tables

/// Function values keyed by point identity.
class SampleTable {
public:
    explicit SampleTable(std::string provenance = {}) : provenance_(std::move(provenance)) {}

    /// Inserting the same point twice is allowed only with the same value.
    void insert(const Point& p, double value)
    {
        if (!std::isfinite(value))
            throw invalid_argument_error("sample table: non-finite value");
        auto [it, fresh] = entries_.try_emplace(point_key(p), p, value);
        if (!fresh && it->second.second != value)
            throw invalid_argument_error("sample table: conflicting value for a duplicate point");
    }

    [[nodiscard]] std::optional<double> find(std::span<const double> coords) const
    {
        auto it = entries_.find(point_key(coords));
        if (it == entries_.end())
            return std::nullopt;
        return it->second.second;
    }

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

private:
    std::map<PointKey, std::pair<Point, double>> entries_;
    std::string provenance_;
};

// ---------------------------------------------------------------------------
// Deterministic random numbers

/// splitmix64-seeded xoshiro256**; uniform and normal variates are computed
/// here rather than through <random> distributions so that outputs are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = s;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            w = z ^ (z >> 31);
        }
    }

    std::uint64_t next() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0,1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Integer uniform on [lo, hi].
    int uniform_int(int lo, int hi) noexcept
    {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(next() % span);
    }

    /// Standard normal via Box-Muller.
    double normal() noexcept
    {
        if (cached_) {
            cached_ = false;
            return cache_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        cache_ = rad * std::sin(two_pi * u2);
        cached_ = true;
        return rad * std::cos(two_pi * u2);
    }

    /// Uniform unit vector in R^d.
    std::vector<double> unit_vector(int d)
    {
        std::vector<double> v(static_cast<std::size_t>(d));
        double norm = 0.0;
        do {
            norm = 0.0;
            for (auto& c : v) {
                c = normal();
                norm += c * c;
            }
        } while (norm < 1e-300);
        norm = std::sqrt(norm);
        for (auto& c : v)
            c /= norm;
        return v;
    }

    /// Uniform point of the closed unit cube.
    std::vector<double> cube_point(int d)
    {
        std::vector<double> v(static_cast<std::size_t>(d));
        for (auto& c : v)
            c = uniform();
        return v;
    }

    /// Uniform point of the unit ball in R^d.
    std::vector<double> ball_point(int d)
    {
        auto v = unit_vector(d);
        const double radius = std::pow(uniform(), 1.0 / d);
        for (auto& c : v)
            c *= radius;
        return v;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    double cache_ = 0.0;
    bool cached_ = false;
};

} // namespace cuberec
