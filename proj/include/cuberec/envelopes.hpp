#pragma once

// Theoretical error envelopes E(Q_m^d, C^r_d) for grid-plus-cloud designs and
// the information complexity counts derived from them.

#include "cuberec/core.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace cuberec {

/// Closed forms: e d^(r/2) / (2m)^r (standard, r even), e d^((r+1)/2) / (2m)^r
/// (standard, r odd), (sqrt(d) / (2m))^r (directional); 1 for r = 0.
inline double envelope_closed(int d, int r, int m, ClassKind kind)
{
    if (d < 1 || m < 1 || r < 0)
        throw invalid_argument_error("envelope_closed: needs d, m >= 1 and r >= 0");
    if (r == 0)
        return 1.0;
    const double dd = d;
    const double scale = std::pow(2.0 * m, r);
    if (kind == ClassKind::Directional)
        return std::pow(std::sqrt(dd) / (2.0 * m), r);
    if (r % 2 == 0)
        return std::numbers::e * std::pow(dd, r / 2) / scale;
    return std::numbers::e * std::pow(dd, (r + 1) / 2) / scale;
}

namespace detail {

using EnvelopeMemo = std::map<std::tuple<int, int, int>, double>;

inline double envelope_recursive_standard(int d, int r, int m, EnvelopeMemo& memo)
{
    if (r == 0)
        return 1.0;
    const auto key = std::tuple{d, r, m};
    if (auto it = memo.find(key); it != memo.end())
        return it->second;
    double value;
    if (r % 2 != 0)
        value = (static_cast<double>(d) / (2.0 * m)) * envelope_recursive_standard(d, r - 1, m, memo);
    else if (d == 1)
        value = std::numbers::e / std::pow(2.0 * m, r);
    else
        value = envelope_recursive_standard(d - 1, r, m, memo) +
                envelope_recursive_standard(d, r - 2, m, memo) / (8.0 * m * m);
    memo.emplace(key, value);
    return value;
}

} // namespace detail

/// Two-step recursion in (d, r) for even r, one step (d/(2m)) E(r-1) for odd r.
/// Base cases E(., C^0) = 1 and E(Q_m^1, C^r_1) <= e / (2m)^r.
inline double envelope_recursive(int d, int r, int m)
{
    if (d < 1 || m < 1 || r < 0)
        throw invalid_argument_error("envelope_recursive: needs d, m >= 1 and r >= 0");
    detail::EnvelopeMemo memo;
    return detail::envelope_recursive_standard(d, r, m, memo);
}

/// Recursion for either class; the directional one iterates sqrt(d)/(2m).
inline double envelope_recursive(int d, int r, int m, ClassKind kind)
{
    if (kind == ClassKind::Standard)
        return envelope_recursive(d, r, m);
    if (d < 1 || m < 1 || r < 0)
        throw invalid_argument_error("envelope_recursive: needs d, m >= 1 and r >= 0");
    double value = 1.0;
    for (int i = 0; i < r; ++i)
        value *= std::sqrt(static_cast<double>(d)) / (2.0 * m);
    return value;
}

/// For odd r >= 3 the class C^r_d sits inside C^(r-1)_d, so the even
/// envelope one order down is also an upper bound.
inline double envelope_fallback(int d, int r, int m)
{
    if (r < 3 || r % 2 == 0)
        throw invalid_argument_error("envelope_fallback: only defined for odd r >= 3");
    return envelope_closed(d, r - 1, m, ClassKind::Standard);
}

enum class EnvelopeSource { ClosedForm, Recursive, Fallback };

inline const char* to_string(EnvelopeSource s) noexcept
{
    switch (s) {
    case EnvelopeSource::ClosedForm: return "ClosedForm";
    case EnvelopeSource::Recursive: return "Recursive";
    case EnvelopeSource::Fallback: return "Fallback";
    }
    return "?";
}

struct EnvelopeRow {
    int d = 1;
    int r = 0;
    int m = 1;
    ClassKind kind = ClassKind::Standard;
    EnvelopeSource source = EnvelopeSource::ClosedForm;
    double bound = 0.0;
};

using EnvelopeTable = std::vector<EnvelopeRow>;

/// Rows for m = 1..m_max: closed form, recursion, and for odd standard r >= 3
/// the even fallback.
inline EnvelopeTable build_envelope_table(int d, int r, int m_max, ClassKind kind)
{
    if (m_max < 1)
        throw invalid_argument_error("envelope table: m_max must be >= 1");
    EnvelopeTable rows;
    for (int m = 1; m <= m_max; ++m) {
        rows.push_back({d, r, m, kind, EnvelopeSource::ClosedForm, envelope_closed(d, r, m, kind)});
        rows.push_back({d, r, m, kind, EnvelopeSource::Recursive, envelope_recursive(d, r, m, kind)});
        if (kind == ClassKind::Standard && r >= 3 && r % 2 != 0)
            rows.push_back({d, r, m, kind, EnvelopeSource::Fallback, envelope_fallback(d, r, m)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Complexity counts

struct UpperCount {
    int m = 1;
    std::uint64_t n = 0;       ///< (d+1)^(r-1) (m+1)^d
    bool saturated = false;    ///< n did not fit in 64 bits; m = 0 if m itself overflowed
    double guarantee = 0.0;    ///< envelope_closed at m, <= epsilon
};

struct ComplexityCount {
    double epsilon = 0.0;
    int d = 1;
    int r = 1;
    ClassKind kind = ClassKind::Standard;
    int m_used = 1;
    std::uint64_t n_upper = 0;
    bool saturated = false;
    double guarantee = 0.0;
    /// Odd standard r >= 3: the same count through the even r-1 recipe.
    bool has_fallback = false;
    int fallback_m = 0;
    std::uint64_t fallback_n_upper = 0;
    bool fallback_better = false;
    /// Lower count, present when epsilon < 1/K_hat.
    bool has_lower = false;
    std::uint64_t n_lower = 0;
    double k_hat = 0.0;
};

namespace detail {

inline std::uint64_t design_cost(int d, int r, int m, bool& saturated)
{
    const std::uint64_t cloud = ipow_saturating(static_cast<std::uint64_t>(d) + 1, r - 1, saturated);
    const std::uint64_t grid = ipow_saturating(static_cast<std::uint64_t>(m) + 1, d, saturated);
    if (saturated || (grid != 0 && cloud > std::numeric_limits<std::uint64_t>::max() / grid)) {
        saturated = true;
        return std::numeric_limits<std::uint64_t>::max();
    }
    return cloud * grid;
}

inline UpperCount upper_count(double epsilon, int d, int r, ClassKind kind)
{
    const double dd = d;
    const double eps_root = std::pow(epsilon, -1.0 / r);
    double m_real;
    if (kind == ClassKind::Directional)
        m_real = 0.5 * std::sqrt(dd) * eps_root;
    else if (r % 2 == 0)
        m_real = std::exp(1.0 / r) / 2.0 * std::sqrt(dd) * eps_root;
    else
        m_real = std::exp(1.0 / r) / 2.0 * std::pow(dd, (r + 1.0) / (2.0 * r)) * eps_root;
    UpperCount c;
    if (!(m_real < 1e9)) {
        c.m = 0;
        c.n = std::numeric_limits<std::uint64_t>::max();
        c.saturated = true;
        c.guarantee = std::numeric_limits<double>::quiet_NaN();
        return c;
    }
    c.m = std::max(1, static_cast<int>(std::ceil(m_real)));
    // Guard against ceil landing one short through rounding.
    while (envelope_closed(d, r, c.m, kind) > epsilon)
        ++c.m;
    c.guarantee = envelope_closed(d, r, c.m, kind);
    c.n = design_cost(d, r, c.m, c.saturated);
    return c;
}

} // namespace detail

/// Grid resolution m and sample count n = (d+1)^(r-1) (m+1)^d guaranteeing
/// envelope_closed(d, r, m, kind) <= epsilon.
inline ComplexityCount n_app_upper(double epsilon, int d, int r, ClassKind kind)
{
    if (!(epsilon > 0.0) || d < 1 || r < 1)
        throw invalid_argument_error("n_app_upper: needs epsilon > 0, d >= 1, r >= 1");
    const auto up = detail::upper_count(epsilon, d, r, kind);
    ComplexityCount c;
    c.epsilon = epsilon;
    c.d = d;
    c.r = r;
    c.kind = kind;
    c.m_used = up.m;
    c.n_upper = up.n;
    c.saturated = up.saturated;
    c.guarantee = up.guarantee;
    if (kind == ClassKind::Standard && r >= 3 && r % 2 != 0) {
        const auto fb = detail::upper_count(epsilon, d, r - 1, ClassKind::Standard);
        c.has_fallback = true;
        c.fallback_m = fb.m;
        c.fallback_n_upper = fb.n;
        c.fallback_better = fb.n < up.n;
    }
    return c;
}

/// Largest n excluded by the bound n^app >= ((5^r K)^(-1/r) sqrt(d) eps^(-1/r))^d,
/// i.e. ceil(bound) - 1 clamped at 0.
inline std::uint64_t n_app_lower(double epsilon, int d, int r, double k_hat)
{
    if (d < 1 || r < 1 || !(k_hat >= 1.0))
        throw invalid_argument_error("n_app_lower: needs d, r >= 1 and K_hat >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0 / k_hat))
        throw domain_error("n_app_lower: epsilon must lie in (0, 1/K_hat)");
    const long double base = std::pow(std::pow(5.0L, r) * k_hat, -1.0L / r) * std::sqrt(static_cast<long double>(d)) *
                             std::pow(static_cast<long double>(epsilon), -1.0L / r);
    long double bound = std::pow(base, static_cast<long double>(d));
    if (!(bound < 9.2e18L))
        return std::numeric_limits<std::uint64_t>::max();
    const long double nearest = std::round(bound);
    if (std::abs(bound - nearest) <= 1e-12L * std::max(1.0L, nearest))
        bound = nearest;
    const long double excluded = std::ceil(bound) - 1.0L;
    return excluded <= 0.0L ? 0 : static_cast<std::uint64_t>(excluded);
}

/// Upper count plus, where epsilon < 1/K_hat, the lower count.
inline ComplexityCount complexity_count(double epsilon, int d, int r, ClassKind kind, double k_hat)
{
    auto c = n_app_upper(epsilon, d, r, kind);
    c.k_hat = k_hat;
    if (epsilon < 1.0 / k_hat) {
        c.has_lower = true;
        c.n_lower = n_app_lower(epsilon, d, r, k_hat);
    }
    return c;
}

} // namespace cuberec
