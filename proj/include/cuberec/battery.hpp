#pragma once

// Test functions scaled into the smoothness classes. Each carries an analytic
// certificate: an upper bound, per derivative order l <= r, on every
// directional derivative of order l of the scaled function over [0,1]^d.
// Directional bounds cover partial derivatives, so membership holds for both
// the standard and the directional class.

#include "cuberec/adversary.hpp"
#include "cuberec/core.hpp"

#include <array>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace cuberec {

inline constexpr std::array<std::string_view, 6> battery_ids = {
    "const", "affine", "sinsum", "gauss", "bump-offcenter", "poly-deg-r"};

/// Cramer's bound on Hermite functions: |He_l(t)| exp(-t^2/2) <= 1.086435 sqrt(l!).
inline constexpr double cramer_constant = 1.086435;

inline constexpr double gauss_center = 0.6;
inline constexpr double gauss_width = 0.5;
inline constexpr double bump_center = 0.37;
inline constexpr double bump_radius = 0.45;
inline constexpr std::uint64_t bump_k_seed = 0;

/// h'(t) of the bump profile.
inline double bump_profile_derivative(double t) noexcept
{
    if (t <= 0.0 || t >= 1.0)
        return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    const double s = a + b;
    return -(a * b / (s * s)) * (1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t));
}

class BatteryFunction {
public:
    enum class Kind { Const, Affine, SinSum, Gauss, BumpOffcenter, Poly };

    BatteryFunction(Kind kind, std::string id, int r, int d, double scale, std::vector<double> certificate)
        : kind_(kind), id_(std::move(id)), r_(r), d_(d), scale_(scale), certificate_(std::move(certificate))
    {
    }

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] int r() const noexcept { return r_; }
    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    /// certificate()[l] bounds every directional derivative of order l.
    [[nodiscard]] const std::vector<double>& certificate() const noexcept { return certificate_; }

    [[nodiscard]] double operator()(std::span<const double> x) const
    {
        switch (kind_) {
        case Kind::Const:
            return scale_;
        case Kind::Affine:
            return scale_ * sum(x);
        case Kind::SinSum:
            return scale_ * std::sin(sum(x));
        case Kind::Gauss:
            return scale_ * std::exp(-dist2(x, gauss_center) / (2.0 * gauss_width * gauss_width));
        case Kind::BumpOffcenter:
            return scale_ * bump_profile(dist2(x, bump_center) / (bump_radius * bump_radius));
        case Kind::Poly:
            return scale_ * std::pow(sum(x) / d_, r_);
        }
        return 0.0;
    }

    [[nodiscard]] std::vector<double> gradient(std::span<const double> x) const
    {
        std::vector<double> g(x.size(), 0.0);
        switch (kind_) {
        case Kind::Const:
            break;
        case Kind::Affine:
            std::fill(g.begin(), g.end(), scale_);
            break;
        case Kind::SinSum:
            std::fill(g.begin(), g.end(), scale_ * std::cos(sum(x)));
            break;
        case Kind::Gauss: {
            const double w2 = gauss_width * gauss_width;
            const double e = std::exp(-dist2(x, gauss_center) / (2.0 * w2));
            for (std::size_t j = 0; j < x.size(); ++j)
                g[j] = -scale_ * (x[j] - gauss_center) / w2 * e;
            break;
        }
        case Kind::BumpOffcenter: {
            const double rho2 = bump_radius * bump_radius;
            const double hp = bump_profile_derivative(dist2(x, bump_center) / rho2);
            for (std::size_t j = 0; j < x.size(); ++j)
                g[j] = scale_ * hp * 2.0 * (x[j] - bump_center) / rho2;
            break;
        }
        case Kind::Poly:
            if (r_ >= 1) {
                const double v = sum(x) / d_;
                std::fill(g.begin(), g.end(), scale_ * r_ * std::pow(v, r_ - 1) / d_);
            }
            break;
        }
        return g;
    }

private:
    static double sum(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

    static double dist2(std::span<const double> x, double center)
    {
        double s = 0.0;
        for (double c : x)
            s += (c - center) * (c - center);
        return s;
    }

    Kind kind_;
    std::string id_;
    int r_;
    int d_;
    double scale_;
    std::vector<double> certificate_;
};

/// The battery function `id`, scaled so its order-r certificate is <= 1/2
/// (const: <= 1/2 trivially; affine: first derivatives <= 1/(2 sqrt(d))).
inline BatteryFunction battery(std::string_view id, int r, int d)
{
    if (r < 0 || d < 1)
        throw invalid_argument_error("battery: needs r >= 0 and d >= 1");
    const auto n = static_cast<std::size_t>(r) + 1;
    const double dd = d;
    std::vector<double> cert(n, 0.0);
    using K = BatteryFunction::Kind;

    if (id == "const") {
        cert[0] = 0.5;
        return {K::Const, std::string(id), r, d, 0.5, cert};
    }
    if (id == "affine") {
        // sum_j x_j / (2d): value <= 1/2, |grad . theta| <= sqrt(d)/(2d).
        const double s = 1.0 / (2.0 * dd);
        cert[0] = 0.5;
        if (r >= 1)
            cert[1] = s * std::sqrt(dd);
        return {K::Affine, std::string(id), r, d, s, cert};
    }
    if (id == "sinsum") {
        // d_theta_1..d_theta_l sin(sum x) = prod <theta_i, 1> sin^(l)(sum x), |<theta, 1>| <= sqrt(d).
        const double s = 0.5 * std::pow(dd, -0.5 * r);
        for (std::size_t l = 0; l < n; ++l)
            cert[l] = s * std::pow(dd, 0.5 * static_cast<double>(l));
        return {K::SinSum, std::string(id), r, d, s, cert};
    }
    if (id == "gauss") {
        // On any line the gaussian is a 1-d gaussian of width w times a factor <= 1.
        std::vector<double> raw(n);
        double worst = 0.0;
        double fact = 1.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (l > 0)
                fact *= static_cast<double>(l);
            raw[l] = (l == 0 ? 1.0 : cramer_constant * std::sqrt(fact)) / std::pow(gauss_width, static_cast<double>(l));
            worst = std::max(worst, raw[l]);
        }
        const double s = 0.5 / worst;
        for (std::size_t l = 0; l < n; ++l)
            cert[l] = s * raw[l];
        return {K::Gauss, std::string(id), r, d, s, cert};
    }
    if (id == "bump-offcenter") {
        // s g((x-c)/rho): order-l derivatives <= s rho^-l K_hat_r.
        const double k_hat = default_K_hat(r, bump_k_seed);
        const double s = 0.5 * std::pow(bump_radius, r) / k_hat;
        for (std::size_t l = 0; l < n; ++l)
            cert[l] = l == 0 ? s : s * k_hat / std::pow(bump_radius, static_cast<double>(l));
        return {K::BumpOffcenter, std::string(id), r, d, s, cert};
    }
    if (id == "poly-deg-r") {
        // s v^r with v = mean(x) in [0,1]: order-l derivatives <= s r!/(r-l)! d^(-l/2).
        double r_fact = 1.0;
        for (int i = 2; i <= r; ++i)
            r_fact *= i;
        const double s = 0.5 / r_fact;
        double falling = 1.0;
        for (std::size_t l = 0; l < n; ++l) {
            cert[l] = s * falling * std::pow(dd, -0.5 * static_cast<double>(l));
            falling *= static_cast<double>(r) - static_cast<double>(l);
        }
        return {K::Poly, std::string(id), r, d, s, cert};
    }
    throw unknown_function_error("unknown battery function '" + std::string(id) + "'");
}

struct MembershipCheck {
    double max_derivative = 0.0;
    std::size_t samples = 0;
    bool passed = true;
};

/// Sampled second line of defence behind the analytic certificate: central
/// difference estimates of random partial (even samples) and directional
/// (odd samples) derivatives of order <= r at random points of the cube.
template <class F>
MembershipCheck spot_check_membership(const F& f, int r, int d, std::uint64_t seed, std::size_t samples = 200)
{
    Rng rng(seed);
    MembershipCheck out;
    out.samples = samples;
    const auto dd = static_cast<std::size_t>(d);
    for (std::size_t s = 0; s < samples; ++s) {
        const int l = rng.uniform_int(0, r);
        const auto x = rng.cube_point(d);
        std::vector<std::vector<double>> dirs;
        for (int i = 0; i < l; ++i) {
            if (s % 2 == 0) {
                std::vector<double> e(dd, 0.0);
                e[static_cast<std::size_t>(rng.uniform_int(0, d - 1))] = 1.0;
                dirs.push_back(std::move(e));
            } else {
                dirs.push_back(rng.unit_vector(d));
            }
        }
        std::vector<std::span<const double>> tuple(dirs.begin(), dirs.end());
        out.max_derivative = std::max(out.max_derivative, std::abs(directional_derivative_fd(f, x, tuple, 1e-3)));
    }
    out.passed = out.max_derivative <= 1.0 + 1e-3;
    return out;
}

} // namespace cuberec
