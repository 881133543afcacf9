#pragma once

// Sampling designs: regular grids, the cloud expansion M[h] with boundary
// reflection and its doubly exponential step schedule, and the simplex
// stencil design consumed by the Taylor reconstruction.

#include "cuberec/core.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace cuberec {

/// A deduplicated, insertion-ordered set of points of [0,1]^d.
class PointSet {
public:
    explicit PointSet(int d) : d_(d)
    {
        if (d < 1)
            throw invalid_argument_error("point set needs dimension d >= 1");
    }

    PointSet(int d, const std::vector<Point>& points) : PointSet(d)
    {
        for (const auto& p : points)
            insert(p);
    }

    /// Returns false if the point was already present.
    bool insert(const Point& p)
    {
        if (p.dim() != d_)
            throw invalid_argument_error("point set: dimension mismatch");
        if (!keys_.insert(point_key(p)).second)
            return false;
        points_.push_back(p);
        return true;
    }

    [[nodiscard]] bool contains(const Point& p) const { return keys_.count(point_key(p)) != 0; }
    [[nodiscard]] int dim() const noexcept { return d_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }
    [[nodiscard]] const std::vector<Point>& points() const noexcept { return points_; }
    [[nodiscard]] const Point& operator[](std::size_t i) const noexcept { return points_[i]; }
    [[nodiscard]] auto begin() const noexcept { return points_.begin(); }
    [[nodiscard]] auto end() const noexcept { return points_.end(); }

private:
    int d_;
    std::vector<Point> points_;
    std::set<PointKey> keys_;
};

/// All (m+1)^d grid points in lexicographic order.
inline PointSet build_grid(const GridSpec& grid)
{
    const std::uint64_t n = grid.size();
    PointSet out(grid.d);
    for (std::uint64_t i = 0; i < n; ++i)
        out.insert(grid.point(i));
    return out;
}

/// M[h]: M plus, for every x in M and axis j, x + h e_j when that stays in
/// the cube and x - h e_j otherwise.
inline PointSet expand_cloud(const PointSet& cloud, double h)
{
    if (!(h > 0.0 && h <= 0.5))
        throw invalid_argument_error("expand_cloud: step must lie in (0, 1/2]");
    PointSet out = cloud;
    for (const auto& x : cloud) {
        for (int j = 0; j < cloud.dim(); ++j) {
            std::vector<double> c = x.vec();
            const double up = c[static_cast<std::size_t>(j)] + h;
            c[static_cast<std::size_t>(j)] = up <= 1.0 ? up : c[static_cast<std::size_t>(j)] - h;
            out.insert(Point(std::move(c)));
        }
    }
    return out;
}

/// Step sizes h_i = 3 (delta/9)^(2^(i-1)), i = 1..r-1, so that 3 h_i = h_{i-1}^2.
struct ProofSchedule {
    double delta = 0.0;
    std::vector<double> steps;
};

inline ProofSchedule proof_schedule(double delta, int r)
{
    if (!(delta > 0.0 && delta < 1.0))
        throw invalid_argument_error("proof_schedule: delta must lie in (0,1)");
    if (r < 1)
        throw invalid_argument_error("proof_schedule: r must be >= 1");
    ProofSchedule s{delta, {}};
    for (int i = 1; i <= r - 1; ++i) {
        const double h = 3.0 * std::pow(delta / 9.0, std::ldexp(1.0, i - 1));
        if (!(h >= 1e-300))
            throw underflow_error("proof_schedule: step h_" + std::to_string(i) + " underflows (< 1e-300)");
        s.steps.push_back(h);
    }
    return s;
}

/// P = Q[h_1, ..., h_{r-1}]; |P| <= (d+1)^(r-1) |Q|.
inline PointSet build_proof_pointset(const PointSet& base, double delta, int r)
{
    PointSet out = base;
    for (double h : proof_schedule(delta, r).steps)
        out = expand_cloud(out, h);
    return out;
}

/// Default step h = 1/(2m max(r-1, 1)): the whole stencil spans half a grid cell.
inline double default_step(int m, int r) { return 1.0 / (2.0 * m * std::max(r - 1, 1)); }

/// The grid plus, at every grid point y, the one-sided simplex stencil
/// y + h (sigma . k) for |k| <= r-1. Orientation sigma_j flips to -1 where
/// the stencil would leave the cube along axis j.
class RecoveryDesign {
public:
    RecoveryDesign(const GridSpec& grid, int r, double h)
        : grid_(grid), r_(r), h_(h), all_points_(grid.d)
    {
        if (r < 1)
            throw invalid_argument_error("recovery design needs r >= 1");
        if (!(h > 0.0) || !std::isfinite(h))
            throw invalid_step_error("recovery design: step h must be positive");
        if (h * (r - 1) > 1.0)
            throw invalid_step_error("recovery design: h*(r-1) = " + std::to_string(h * (r - 1)) +
                                     " exceeds 1");
        offsets_ = enumerate_multiindices(grid.d, r - 1);
        const std::uint64_t n = grid.size();
        const std::uint64_t budget_per_point = binomial(static_cast<std::uint64_t>(grid.d + r - 1),
                                                        static_cast<std::uint64_t>(grid.d));
        if (n > point_cap() / budget_per_point)
            throw resource_error("recovery design exceeds the point cap");

        const double reach = h * (r - 1);
        orientation_.resize(n * static_cast<std::uint64_t>(grid.d));
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto ks = grid.lattice_of(i);
            for (int j = 0; j < grid.d; ++j)
                orientation_[i * static_cast<std::uint64_t>(grid.d) + static_cast<std::uint64_t>(j)] =
                    grid.coordinate(ks[static_cast<std::size_t>(j)]) + reach <= 1.0 ? 1 : -1;
        }
        for (std::uint64_t i = 0; i < n; ++i) {
            for (std::size_t o = 0; o < offsets_.size(); ++o) {
                auto c = stencil_coords(i, o);
                for (double v : c)
                    if (v < 0.0 || v > 1.0)
                        throw invalid_step_error("recovery design: stencil leaves the cube; reduce h");
                all_points_.insert(Point(std::move(c)));
            }
        }
    }

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] int r() const noexcept { return r_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    /// Simplex offsets {k : |k| <= r-1}, shared by every grid point.
    [[nodiscard]] const std::vector<MultiIndex>& offsets() const noexcept { return offsets_; }
    [[nodiscard]] const PointSet& all_points() const noexcept { return all_points_; }
    [[nodiscard]] std::uint64_t grid_size() const noexcept
    {
        return orientation_.size() / static_cast<std::uint64_t>(grid_.d);
    }

    [[nodiscard]] std::span<const signed char> orientation(std::uint64_t grid_index) const noexcept
    {
        return {orientation_.data() + grid_index * static_cast<std::uint64_t>(grid_.d),
                static_cast<std::size_t>(grid_.d)};
    }

    /// Coordinates of y + h (sigma . k). Shared by design construction and
    /// derivative estimation so both see bit-identical points.
    [[nodiscard]] std::vector<double> stencil_coords(std::uint64_t grid_index, std::size_t offset) const
    {
        const auto ks = grid_.lattice_of(grid_index);
        const auto sigma = orientation(grid_index);
        const auto& k = offsets_[offset];
        std::vector<double> c(static_cast<std::size_t>(grid_.d));
        for (std::size_t j = 0; j < c.size(); ++j)
            c[j] = grid_.coordinate(ks[j]) + sigma[j] * (k[j] * h_);
        return c;
    }

    /// (d+1)^(r-1) (m+1)^d, the sample budget of the grid-plus-cloud method.
    [[nodiscard]] double cost_budget() const
    {
        return std::pow(grid_.d + 1.0, r_ - 1) * std::pow(grid_.m + 1.0, grid_.d);
    }

private:
    GridSpec grid_;
    int r_;
    double h_;
    std::vector<MultiIndex> offsets_;
    std::vector<signed char> orientation_;
    PointSet all_points_;
};

inline RecoveryDesign build_recovery_design(const GridSpec& grid, int r, double h)
{
    return RecoveryDesign(grid, r, h);
}

} // namespace cuberec
