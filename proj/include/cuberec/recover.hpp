#pragma once

// Subcubewise Taylor reconstruction: derivatives at each grid point are
// estimated from one-sided divided differences on the design's simplex
// stencil, and the model at x is the Taylor polynomial around the nearest
// grid point. Also measures the uniform error by probe-and-refine search.

#include "cuberec/core.hpp"
#include "cuberec/designs.hpp"

#include <concepts>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace cuberec {

/// Anything callable on a coordinate span that returns a real value.
template <class F>
concept Evaluable = std::invocable<const F&, std::span<const double>> &&
                    std::convertible_to<std::invoke_result_t<const F&, std::span<const double>>, double>;

struct missing_sample_error : error {
    missing_sample_error(std::vector<double> p, const std::string& what)
        : error(what), point(std::move(p))
    {
    }
    std::vector<double> point;
};

namespace detail {

inline std::string format_coords(std::span<const double> c)
{
    std::string s = "(";
    for (std::size_t j = 0; j < c.size(); ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", c[j]);
        s += buf;
        if (j + 1 < c.size())
            s += ", ";
    }
    return s + ")";
}

inline double lookup(const SampleTable& samples, std::span<const double> c)
{
    if (auto v = samples.find(c))
        return *v;
    std::vector<double> p(c.begin(), c.end());
    throw missing_sample_error(p, "missing sample at " + format_coords(c));
}

/// y + h (sigma . k), computed the same way as RecoveryDesign::stencil_coords.
inline std::vector<double> shifted(std::span<const double> y, std::span<const int> k, double h,
                                   std::span<const signed char> sigma)
{
    std::vector<double> c(y.size());
    for (std::size_t j = 0; j < y.size(); ++j)
        c[j] = y[j] + sigma[j] * (k[j] * h);
    return c;
}

/// Unscaled forward difference Delta^k f(y) = sum_{i <= k} prod_j (-1)^(k_j-i_j) C(k_j,i_j) f(y + h sigma.i).
template <class ValueAt>
double forward_difference(const MultiIndex& k, ValueAt&& value_at)
{
    const int d = k.dim();
    std::vector<int> i(static_cast<std::size_t>(d), 0);
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            w *= static_cast<double>(binomial(static_cast<std::uint64_t>(k[jj]), static_cast<std::uint64_t>(i[jj])));
            if ((k[jj] - i[jj]) % 2 != 0)
                w = -w;
        }
        sum += w * value_at(std::span<const int>(i));
        int j = d - 1;
        while (j >= 0 && i[static_cast<std::size_t>(j)] == k[static_cast<std::size_t>(j)]) {
            i[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0)
            break;
        ++i[static_cast<std::size_t>(j)];
    }
    return sum;
}

/// Signed Stirling numbers of the first kind s(n, k) for n, k <= n_max.
inline std::vector<std::vector<double>> stirling_first(int n_max)
{
    std::vector<std::vector<double>> s(static_cast<std::size_t>(n_max + 1),
                                       std::vector<double>(static_cast<std::size_t>(n_max + 1), 0.0));
    s[0][0] = 1.0;
    for (int n = 0; n < n_max; ++n)
        for (int k = 1; k <= n + 1; ++k)
            s[static_cast<std::size_t>(n + 1)][static_cast<std::size_t>(k)] =
                s[static_cast<std::size_t>(n)][static_cast<std::size_t>(k - 1)] -
                n * s[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    return s;
}

/// b-th derivative at t = 0 of the Newton basis C(t, k): b! s(k, b) / k!.
inline double newton_basis_derivative(const std::vector<std::vector<double>>& s, int b, int k)
{
    if (b > k)
        return 0.0;
    double v = s[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
    for (int i = 2; i <= b; ++i)
        v *= i;
    for (int i = 2; i <= k; ++i)
        v /= i;
    return v;
}

inline double orientation_sign(const MultiIndex& beta, std::span<const signed char> sigma)
{
    double sign = 1.0;
    for (std::size_t j = 0; j < sigma.size(); ++j)
        if (sigma[j] < 0 && beta[j] % 2 != 0)
            sign = -sign;
    return sign;
}

} // namespace detail

/// Nested one-sided divided difference Delta_h^beta f(y) / h^|beta|, sign
/// corrected by prod_j sigma_j^beta_j so it estimates D^beta f(y).
inline double estimate_derivative(const SampleTable& samples, const Point& y, const MultiIndex& beta,
                                  double h, std::span<const signed char> sigma)
{
    if (beta.dim() != y.dim() || static_cast<int>(sigma.size()) != y.dim())
        throw invalid_argument_error("estimate_derivative: dimension mismatch");
    const double diff = detail::forward_difference(beta, [&](std::span<const int> i) {
        return detail::lookup(samples, detail::shifted(y.coords(), i, h, sigma));
    });
    return detail::orientation_sign(beta, sigma) * diff / std::pow(h, beta.order());
}

/// D^beta at y of the polynomial of total degree `degree` interpolating f on
/// the simplex stencil {y + h sigma.k : |k| <= degree} (multivariate
/// Newton-Gregory form). Accurate to O(h^(degree+1-|beta|)); equals
/// estimate_derivative when |beta| == degree.
inline double stencil_derivative(const SampleTable& samples, const Point& y, const MultiIndex& beta,
                                 double h, std::span<const signed char> sigma, int degree)
{
    if (beta.dim() != y.dim() || static_cast<int>(sigma.size()) != y.dim())
        throw invalid_argument_error("stencil_derivative: dimension mismatch");
    if (beta.order() > degree)
        throw invalid_argument_error("stencil_derivative: |beta| exceeds the stencil degree");
    const auto stirling = detail::stirling_first(degree);
    double sum = 0.0;
    for (const auto& k : enumerate_multiindices(y.dim(), degree)) {
        if (!k.dominates(beta))
            continue;
        double w = 1.0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(y.dim()); ++j)
            w *= detail::newton_basis_derivative(stirling, beta[j], k[j]);
        if (w == 0.0)
            continue;
        sum += w * detail::forward_difference(k, [&](std::span<const int> i) {
            return detail::lookup(samples, detail::shifted(y.coords(), i, h, sigma));
        });
    }
    return detail::orientation_sign(beta, sigma) * sum / std::pow(h, beta.order());
}

/// Evaluates f at every point of a set.
template <Evaluable F>
SampleTable sample_points(const PointSet& points, const F& f, std::string provenance = {})
{
    SampleTable table(std::move(provenance));
    for (const auto& p : points)
        table.insert(p, static_cast<double>(f(p.coords())));
    return table;
}

/// Per grid point y, estimates of D^beta f(y) for |beta| <= r-1, evaluated as
/// a Taylor polynomial around the nearest grid point.
class TaylorModel {
public:
    TaylorModel(RecoveryDesign design, std::vector<double> coefficients)
        : design_(std::move(design)), coefficients_(std::move(coefficients))
    {
        const auto& betas = design_.offsets();
        if (coefficients_.size() != betas.size() * design_.grid_size())
            throw invalid_argument_error("taylor model: coefficient count mismatch");
        weights_.reserve(betas.size());
        for (const auto& b : betas)
            weights_.push_back(factorial_weight(b));
    }

    [[nodiscard]] const RecoveryDesign& design() const noexcept { return design_; }
    [[nodiscard]] int dim() const noexcept { return design_.grid().d; }
    /// Multi-indices of the stored coefficients, graded-lex.
    [[nodiscard]] const std::vector<MultiIndex>& multiindices() const noexcept { return design_.offsets(); }
    [[nodiscard]] std::size_t coefficients_per_point() const noexcept { return design_.offsets().size(); }

    [[nodiscard]] double coefficient(std::uint64_t grid_index, std::size_t beta_index) const noexcept
    {
        return coefficients_[grid_index * coefficients_per_point() + beta_index];
    }

    /// Coefficient for an explicit multi-index at a grid point.
    [[nodiscard]] double coefficient(const Point& grid_point, const MultiIndex& beta) const
    {
        const auto& betas = multiindices();
        for (std::size_t b = 0; b < betas.size(); ++b) {
            if (betas[b] == beta) {
                const auto ks = nearest_lattice(grid_point.coords(), design_.grid());
                return coefficient(design_.grid().index_of(ks), b);
            }
        }
        throw invalid_argument_error("taylor model: no coefficient for this multi-index");
    }

    /// sum_{|beta| <= r-1} c_beta(y) / beta! * prod_j (x_j - y_j)^beta_j, y nearest grid point.
    [[nodiscard]] double operator()(std::span<const double> x) const
    {
        const auto& grid = design_.grid();
        const int r = design_.r();
        const auto ks = nearest_lattice(x, grid);
        const std::uint64_t idx = grid.index_of(ks);

        std::vector<double> powers(static_cast<std::size_t>(grid.d * r));
        for (int j = 0; j < grid.d; ++j) {
            const double t = x[static_cast<std::size_t>(j)] - grid.coordinate(ks[static_cast<std::size_t>(j)]);
            double p = 1.0;
            for (int e = 0; e < r; ++e) {
                powers[static_cast<std::size_t>(j * r + e)] = p;
                p *= t;
            }
        }
        const auto& betas = multiindices();
        const double* c = coefficients_.data() + idx * betas.size();
        double sum = 0.0;
        for (std::size_t b = 0; b < betas.size(); ++b) {
            double term = c[b] * weights_[b];
            for (int j = 0; j < grid.d; ++j)
                term *= powers[static_cast<std::size_t>(j * r + betas[b][static_cast<std::size_t>(j)])];
            sum += term;
        }
        return sum;
    }

    [[nodiscard]] double evaluate(const Point& x) const { return (*this)(x.coords()); }

private:
    RecoveryDesign design_;
    std::vector<double> coefficients_;
    std::vector<double> weights_;
};

/// Fills every coefficient from the stencil samples. The beta = 0 coefficient
/// is the sample f(y) itself; higher ones are D^beta of the stencil
/// interpolant (see stencil_derivative).
inline TaylorModel fit_taylor_models(const RecoveryDesign& design, const SampleTable& samples)
{
    const auto& grid = design.grid();
    const auto& offsets = design.offsets();
    const int degree = design.r() - 1;
    const std::uint64_t n = design.grid_size();
    const auto stirling = detail::stirling_first(degree);

    std::map<std::vector<int>, std::size_t> offset_index;
    for (std::size_t o = 0; o < offsets.size(); ++o)
        offset_index.emplace(offsets[o].entries(), o);

    // Newton-basis derivative weights, indexed [beta][k].
    std::vector<std::vector<double>> weight(offsets.size(), std::vector<double>(offsets.size(), 0.0));
    for (std::size_t b = 0; b < offsets.size(); ++b)
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            if (!offsets[k].dominates(offsets[b]))
                continue;
            double w = 1.0;
            for (std::size_t j = 0; j < static_cast<std::size_t>(grid.d); ++j)
                w *= detail::newton_basis_derivative(stirling, offsets[b][j], offsets[k][j]);
            weight[b][k] = w;
        }

    std::vector<double> coefficients(n * offsets.size());
    std::vector<double> values(offsets.size());
    std::vector<double> differences(offsets.size());
    for (std::uint64_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < offsets.size(); ++o)
            values[o] = detail::lookup(samples, design.stencil_coords(i, o));
        for (std::size_t o = 0; o < offsets.size(); ++o)
            differences[o] = detail::forward_difference(offsets[o], [&](std::span<const int> at) {
                return values[offset_index.at(std::vector<int>(at.begin(), at.end()))];
            });
        const auto sigma = design.orientation(i);
        for (std::size_t b = 0; b < offsets.size(); ++b) {
            double c;
            if (b == 0) {
                c = values[0];
            } else {
                double sum = 0.0;
                for (std::size_t k = 0; k < offsets.size(); ++k)
                    if (weight[b][k] != 0.0)
                        sum += weight[b][k] * differences[k];
                c = detail::orientation_sign(offsets[b], sigma) * sum / std::pow(design.h(), offsets[b].order());
            }
            coefficients[i * offsets.size() + b] = c;
        }
    }
    return TaylorModel(design, std::move(coefficients));
}

// ---------------------------------------------------------------------------
// Probe-and-refine search

struct SearchResult {
    double value = 0.0;
    std::vector<double> point;
    std::uint64_t eval_count = 0;
    bool refined = false; ///< the descent phase evaluated at least one candidate
};

inline constexpr int refine_max_iterations = 100;
inline constexpr double refine_tolerance = 1e-10;

/// Maximizes `objective` over the probe grid Q_probe_m^d (first maximum in
/// lexicographic order wins ties), then coordinate descent from the best
/// probe: steps +-s e_j, s starting at 1/probe_m and halving when no move
/// improves, at most 100 sweeps, stopping once s < 1e-10.
template <class Objective>
SearchResult probe_and_refine(int d, int probe_m, const Objective& objective)
{
    const GridSpec probe(probe_m, d);
    const std::uint64_t n = probe.size();
    SearchResult best;
    best.value = -std::numeric_limits<double>::infinity();
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto ks = probe.lattice_of(i);
        for (std::size_t j = 0; j < x.size(); ++j)
            x[j] = probe.coordinate(ks[j]);
        const double v = objective(std::span<const double>(x));
        ++best.eval_count;
        if (v > best.value) {
            best.value = v;
            best.point = x;
        }
    }

    double step = 1.0 / probe_m;
    for (int iter = 0; iter < refine_max_iterations && step >= refine_tolerance; ++iter) {
        bool improved = false;
        for (int j = 0; j < d; ++j) {
            for (double dir : {1.0, -1.0}) {
                std::vector<double> cand = best.point;
                auto& c = cand[static_cast<std::size_t>(j)];
                c = std::clamp(c + dir * step, 0.0, 1.0);
                if (c == best.point[static_cast<std::size_t>(j)])
                    continue;
                const double v = objective(std::span<const double>(cand));
                ++best.eval_count;
                best.refined = true;
                if (v > best.value) {
                    best.value = v;
                    best.point = std::move(cand);
                    improved = true;
                }
            }
        }
        if (!improved)
            step *= 0.5;
    }
    return best;
}

enum class SearchMethod { DenseGrid, DenseGridPlusRefine };

inline const char* to_string(SearchMethod m) noexcept
{
    return m == SearchMethod::DenseGrid ? "DenseGrid" : "DenseGridPlusRefine";
}

/// Largest |f - model| found; a lower bound on the true sup-norm error.
struct ErrorReport {
    double sup_estimate = 0.0;
    Point witness;
    std::uint64_t eval_count = 0;
    SearchMethod method = SearchMethod::DenseGrid;
};

inline void check_probe_resolution(const TaylorModel& model, int probe_m)
{
    if (probe_m < 2 * model.design().grid().m)
        throw invalid_argument_error("probe_m must be at least 2m (got " + std::to_string(probe_m) +
                                     " for m=" + std::to_string(model.design().grid().m) + ")");
}

template <Evaluable F>
ErrorReport sup_error(const TaylorModel& model, const F& oracle, int probe_m)
{
    check_probe_resolution(model, probe_m);
    auto result = probe_and_refine(model.dim(), probe_m, [&](std::span<const double> x) {
        return std::abs(static_cast<double>(oracle(x)) - model(x));
    });
    return {result.value, Point(std::move(result.point)), result.eval_count,
            result.refined ? SearchMethod::DenseGridPlusRefine : SearchMethod::DenseGrid};
}

struct MaximumEstimate {
    double value = 0.0;
    Point argmax;
};

/// Maximum of an arbitrary evaluable over the probe-and-refine search.
template <Evaluable F>
MaximumEstimate maximize(int d, int probe_m, const F& f)
{
    auto result = probe_and_refine(d, probe_m, [&](std::span<const double> x) { return static_cast<double>(f(x)); });
    return {result.value, Point(std::move(result.point))};
}

inline MaximumEstimate estimate_maximum(const TaylorModel& model, int probe_m)
{
    check_probe_resolution(model, probe_m);
    return maximize(model.dim(), probe_m, model);
}

/// Single-function form of the optimization reduction: the maxima of f and of
/// its reconstruction differ by at most the uniform error. All three numbers
/// are taken over one common candidate set (probe grid plus both refined
/// maximizers), on which the inequality is exact.
struct SandwichReport {
    double max_f = 0.0;
    double max_model = 0.0;
    double sup_error = 0.0;

    [[nodiscard]] double gap() const noexcept { return std::abs(max_f - max_model); }
    [[nodiscard]] bool holds(double slack = 2e-10) const noexcept { return gap() <= sup_error + slack; }
};

template <Evaluable F>
SandwichReport optimization_sandwich(const TaylorModel& model, const F& f, int probe_m)
{
    const auto mf = maximize(model.dim(), probe_m, f);
    const auto mm = estimate_maximum(model, probe_m);
    const auto err = sup_error(model, f, probe_m);
    SandwichReport s;
    s.max_f = std::max(mf.value, static_cast<double>(f(mm.argmax.coords())));
    s.max_model = std::max(mm.value, model(mf.argmax.coords()));
    s.sup_error = err.sup_estimate;
    for (const auto* p : {&mf.argmax, &mm.argmax})
        s.sup_error = std::max(s.sup_error, std::abs(static_cast<double>(f(p->coords())) - model(p->coords())));
    return s;
}

} // namespace cuberec
