#pragma once

// Lower-bound certificates. A smooth radial bump is shrunk into the largest
// empty ball of a design and scaled so that all its directional derivatives
// up to order r stay below one; its peak then bounds the worst-case error of
// every algorithm using that design from below.

#include "cuberec/core.hpp"
#include "cuberec/designs.hpp"
#include "cuberec/recover.hpp"

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

namespace cuberec {

/// Smooth step: 1 on (-inf, 0], 0 on [1, inf), psi(1-t) / (psi(1-t) + psi(t))
/// in between with psi(s) = exp(-1/s).
inline double bump_profile(double t) noexcept
{
    if (t <= 0.0)
        return 1.0;
    if (t >= 1.0)
        return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
}

/// g_d(x) = h(|x|^2): 1 at the origin, 0 outside the open unit ball.
inline double radial_bump(std::span<const double> x) noexcept
{
    double t = 0.0;
    for (double c : x)
        t += c * c;
    return bump_profile(t);
}

/// Seeded unit vectors on S_{d-1}.
struct DirectionSample {
    int d = 1;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> directions;
};

inline DirectionSample make_direction_sample(int d, std::size_t count, std::uint64_t seed)
{
    if (d < 1 || count == 0)
        throw invalid_argument_error("direction sample needs d >= 1 and a positive count");
    DirectionSample s{d, seed, {}};
    Rng rng(seed);
    s.directions.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        s.directions.push_back(rng.unit_vector(d));
    return s;
}

/// Central-difference estimate of d_theta_1 ... d_theta_l f(x):
/// (2s)^-l sum_{eps in {+-1}^l} prod(eps) f(x + s sum eps_i theta_i).
template <class F>
double directional_derivative_fd(const F& f, std::span<const double> x,
                                 const std::vector<std::span<const double>>& thetas, double step)
{
    const std::size_t l = thetas.size();
    if (l == 0)
        return f(x);
    std::vector<double> pt(x.size());
    double sum = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << l); ++mask) {
        double sign = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            pt[j] = x[j];
        for (std::size_t i = 0; i < l; ++i) {
            const double eps = (mask >> i) & 1U ? -1.0 : 1.0;
            sign *= eps;
            for (std::size_t j = 0; j < x.size(); ++j)
                pt[j] += step * eps * thetas[i][j];
        }
        sum += sign * f(std::span<const double>(pt));
    }
    return sum / std::pow(2.0 * step, static_cast<double>(l));
}

inline constexpr double norm_inflation = 1.05;
inline constexpr double default_fd_step = 1e-3;
inline constexpr int radial_resolution = 1000;
inline constexpr int fan_resolution = 90;
inline constexpr std::size_t random_tuples_per_order = 64;

/// Estimate of K_r = sup_d sup_{l <= r, theta_i} ||d_theta_1...d_theta_l g_d||_inf.
///
/// Scans x = rho e1 over a dense radial set and two families of direction
/// tuples in R^d_probe: a deterministic fan of repeated directions
/// theta(phi) = cos(phi) e1 + sin(phi) e2, phi in [0, pi/2], and seeded
/// random tuples drawn from `sample`. The l = 0 term is exactly 1; the
/// derivative terms are inflated by 5%.
inline double estimate_K(int r, int d_probe, const DirectionSample& sample, double fd_step = default_fd_step)
{
    if (!(fd_step > 1e-8 && fd_step < 1e-2))
        throw invalid_step_error("estimate_K: fd_step must lie in (1e-8, 1e-2)");
    if (r < 0)
        throw invalid_argument_error("estimate_K: r must be >= 0");
    if (d_probe < std::max(1, std::min(r, 2)))
        throw invalid_argument_error("estimate_K: d_probe must be >= min(r, 2)");
    if (sample.d != d_probe || sample.directions.empty())
        throw invalid_argument_error("estimate_K: direction sample must live in R^d_probe");
    if (r == 0)
        return 1.0;

    const auto g = [](std::span<const double> x) { return radial_bump(x); };
    const auto dp = static_cast<std::size_t>(d_probe);

    std::vector<std::vector<double>> fan;
    const int fan_count = d_probe >= 2 ? fan_resolution : 0;
    for (int a = 0; a <= fan_count; ++a) {
        const double phi = fan_count == 0 ? 0.0 : (std::numbers::pi / 2) * a / fan_count;
        std::vector<double> theta(dp, 0.0);
        theta[0] = std::cos(phi);
        if (dp >= 2)
            theta[1] = std::sin(phi);
        fan.push_back(std::move(theta));
    }

    double sup = 0.0;
    std::vector<double> x(dp, 0.0);
    const std::size_t n_dir = sample.directions.size();
    for (int l = 1; l <= r; ++l) {
        const auto ll = static_cast<std::size_t>(l);
        std::vector<std::vector<std::span<const double>>> tuples;
        for (const auto& theta : fan)
            tuples.emplace_back(ll, std::span<const double>(theta));
        for (std::size_t t = 0; t < random_tuples_per_order; ++t) {
            std::vector<std::span<const double>> tuple;
            for (std::size_t i = 0; i < ll; ++i)
                tuple.emplace_back(sample.directions[(t * ll + i) % n_dir]);
            tuples.push_back(std::move(tuple));
        }
        for (int i = 0; i <= radial_resolution; ++i) {
            x[0] = static_cast<double>(i) / radial_resolution;
            for (const auto& tuple : tuples)
                sup = std::max(sup, std::abs(directional_derivative_fd(g, x, tuple, fd_step)));
        }
    }
    return std::max(1.0, norm_inflation * sup);
}

/// Probe dimension large enough for every angle constellation up to order 4.
inline int default_probe_dimension(int r) { return std::min(std::max(r, 2), 4); }

inline constexpr std::size_t default_direction_count = 256;

/// estimate_K at the default probe dimension and step, memoized on (r, seed).
inline double default_K_hat(int r, std::uint64_t seed)
{
    static std::mutex mutex;
    static std::map<std::pair<int, std::uint64_t>, double> memo;
    {
        std::lock_guard lock(mutex);
        if (auto it = memo.find({r, seed}); it != memo.end())
            return it->second;
    }
    const int dp = default_probe_dimension(r);
    const double k = estimate_K(r, dp, make_direction_sample(dp, default_direction_count, seed));
    std::lock_guard lock(mutex);
    memo.emplace(std::pair{r, seed}, k);
    return k;
}

/// min{1, sqrt(d) / (5 n^(1/d))}: a radius every n-point set leaves empty somewhere.
inline double analytic_radius(std::uint64_t n, int d)
{
    if (n < 1 || d < 1)
        throw invalid_argument_error("analytic_radius: needs n >= 1 and d >= 1");
    return std::min(1.0, std::sqrt(static_cast<double>(d)) / (5.0 * std::pow(static_cast<double>(n), 1.0 / d)));
}

struct FarthestPoint {
    Point z;
    double distance = 0.0; ///< +inf for an empty set
};

inline double distance_to_set(std::span<const double> x, const PointSet& points)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double t = x[j] - p[j];
            s += t * t;
        }
        best = std::min(best, s);
    }
    return std::sqrt(best);
}

/// Point of the cube (approximately) farthest from P in the euclidean norm:
/// probe grid scan plus coordinate-descent refinement.
inline FarthestPoint farthest_point(const PointSet& points, int probe_m)
{
    if (probe_m < 1)
        throw invalid_argument_error("farthest_point: probe_m must be >= 1");
    const int d = points.dim();
    checked_grid_size(probe_m, d);
    if (points.empty())
        return {Point(std::vector<double>(static_cast<std::size_t>(d), 0.5)),
                std::numeric_limits<double>::infinity()};
    auto best = probe_and_refine(d, probe_m, [&](std::span<const double> x) { return distance_to_set(x, points); });
    return {Point(std::move(best.point)), best.value};
}

/// f*(x) = (R^r / K) g_d((x - z) / R).
class FoolingInstance {
public:
    FoolingInstance(Point z, double radius, int r, double k_hat, ClassKind kind)
        : z_(std::move(z)), radius_(radius), r_(r), k_hat_(k_hat), kind_(kind),
          peak_(std::pow(radius, r) / k_hat)
    {
        if (!(radius > 0.0 && radius <= 1.0))
            throw invalid_argument_error("fooling instance: radius must lie in (0, 1]");
        if (!(k_hat >= 1.0))
            throw invalid_argument_error("fooling instance: K_hat must be >= 1");
    }

    [[nodiscard]] double operator()(std::span<const double> x) const
    {
        std::vector<double> u(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            u[j] = (x[j] - z_[j]) / radius_;
        return peak_ * radial_bump(u);
    }

    [[nodiscard]] const Point& center() const noexcept { return z_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] int r() const noexcept { return r_; }
    [[nodiscard]] double k_hat() const noexcept { return k_hat_; }
    [[nodiscard]] ClassKind kind() const noexcept { return kind_; }
    /// R^r / K_hat, the value at the center.
    [[nodiscard]] double peak() const noexcept { return peak_; }

private:
    Point z_;
    double radius_;
    int r_;
    double k_hat_;
    ClassKind kind_;
    double peak_;
};

inline FoolingInstance build_fooling(const PointSet& points, const SmoothnessClass& cls, double k_hat, int probe_m)
{
    if (points.dim() != cls.d)
        throw invalid_argument_error("build_fooling: design dimension does not match the class");
    if (!(k_hat >= 1.0))
        throw invalid_argument_error("build_fooling: K_hat must be >= 1");
    auto fp = farthest_point(points, probe_m);
    return FoolingInstance(std::move(fp.z), std::min(1.0, fp.distance), cls.r, k_hat, cls.kind);
}

inline constexpr double feasibility_tolerance = 1e-3;
inline constexpr std::size_t default_feasibility_samples = 10'000;

struct FeasibilityReport {
    double max_derivative = 0.0; ///< largest sampled |d_theta_1...d_theta_l f*|, l <= r
    std::size_t samples = 0;
    bool feasible = true;
};

/// Samples directional-derivative tuples of order l <= r at points of the
/// support ball and checks them against 1 + 1e-3. Central differences use
/// step 1e-3 R.
inline FeasibilityReport check_feasibility(const FoolingInstance& f, std::uint64_t seed,
                                           std::size_t samples = default_feasibility_samples)
{
    const int d = f.center().dim();
    const double step = 1e-3 * f.radius();
    Rng rng(seed);
    FeasibilityReport report;
    report.max_derivative = f.peak();
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t s = 0; s < samples && f.r() > 0; ++s) {
        const int l = rng.uniform_int(1, f.r());
        const auto u = rng.ball_point(d);
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] = f.center()[j] + f.radius() * u[j];
        std::vector<std::vector<double>> dirs;
        for (int i = 0; i < l; ++i)
            dirs.push_back(rng.unit_vector(d));
        std::vector<std::span<const double>> tuple(dirs.begin(), dirs.end());
        report.max_derivative = std::max(report.max_derivative, std::abs(directional_derivative_fd(f, x, tuple, step)));
    }
    report.samples = f.r() > 0 ? samples : 0;
    report.feasible = report.max_derivative <= 1.0 + feasibility_tolerance;
    return report;
}

struct LowerBoundCertificate {
    double bound = 0.0; ///< R^r / K_hat
    FoolingInstance instance;
    FeasibilityReport feasibility;
};

/// Lower bound on sup{||f||_inf : f in class, f|_P = 0}, and hence on the
/// worst-case error of any algorithm sampling exactly at P. Valid when
/// `feasibility.feasible` holds.
inline LowerBoundCertificate certify_lower_bound(const PointSet& points, const SmoothnessClass& cls, double k_hat,
                                                 int probe_m, std::uint64_t seed = 0,
                                                 std::size_t samples = default_feasibility_samples)
{
    auto instance = build_fooling(points, cls, k_hat, probe_m);
    auto feas = check_feasibility(instance, seed, samples);
    const double bound = instance.peak();
    return {bound, std::move(instance), feas};
}

} // namespace cuberec
