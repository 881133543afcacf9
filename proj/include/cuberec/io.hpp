#pragma once

// JSON and CSV encodings of the library's domain types.

#include "cuberec/adversary.hpp"
#include "cuberec/core.hpp"
#include "cuberec/designs.hpp"
#include "cuberec/envelopes.hpp"
#include "cuberec/recover.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>

namespace cuberec {

using json = nlohmann::json;

/// Shortest-enough round-trip text for CSV cells.
inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline json to_json(const MultiIndex& beta) { return json(beta.entries()); }
inline json to_json(const Point& p) { return json(p.vec()); }

inline MultiIndex multiindex_from_json(const json& j) { return MultiIndex(j.get<std::vector<int>>()); }
inline Point point_from_json(const json& j) { return Point(j.get<std::vector<double>>()); }

inline json to_json(const PointSet& points)
{
    json arr = json::array();
    for (const auto& p : points)
        arr.push_back(to_json(p));
    return arr;
}

/// {grid: {m, d}, r, h, points: [[...], ...]}
inline json to_json(const RecoveryDesign& design)
{
    return json{{"grid", {{"m", design.grid().m}, {"d", design.grid().d}}},
                {"r", design.r()},
                {"h", design.h()},
                {"points", to_json(design.all_points())}};
}

/// Accepts a design document or a bare array of points. The dimension comes
/// from the points, or from grid.d when the list is empty.
inline PointSet pointset_from_json(const json& j)
{
    const json* pts = &j;
    int d = 0;
    if (j.is_object()) {
        if (!j.contains("points"))
            throw invalid_argument_error("design JSON has no 'points' field");
        pts = &j.at("points");
        if (j.contains("grid"))
            d = j.at("grid").at("d").get<int>();
    }
    if (!pts->is_array())
        throw invalid_argument_error("design points must be a JSON array");
    if (!pts->empty())
        d = static_cast<int>(pts->front().size());
    if (d < 1)
        throw invalid_argument_error("cannot infer the dimension of an empty point list");
    PointSet out(d);
    for (const auto& p : *pts)
        out.insert(point_from_json(p));
    return out;
}

inline json to_json(const ErrorReport& report)
{
    return json{{"sup_estimate", report.sup_estimate},
                {"witness", to_json(report.witness)},
                {"eval_count", report.eval_count},
                {"method", to_string(report.method)}};
}

/// {z, R, K_hat, bound, feasible} plus the sampled feasibility margin.
inline json to_json(const LowerBoundCertificate& cert)
{
    return json{{"z", to_json(cert.instance.center())},
                {"R", cert.instance.radius()},
                {"K_hat", cert.instance.k_hat()},
                {"bound", cert.bound},
                {"feasible", cert.feasibility.feasible},
                {"max_sampled_derivative", cert.feasibility.max_derivative},
                {"feasibility_samples", cert.feasibility.samples}};
}

inline json to_json(const ComplexityCount& c)
{
    json j{{"epsilon", c.epsilon}, {"d", c.d},           {"r", c.r},
           {"kind", to_string(c.kind)}, {"m_used", c.m_used}, {"n_upper", c.n_upper},
           {"saturated", c.saturated}, {"guarantee", c.guarantee}};
    if (c.has_fallback)
        j["fallback"] = {{"m", c.fallback_m}, {"n_upper", c.fallback_n_upper}, {"better", c.fallback_better}};
    if (c.has_lower) {
        j["n_lower"] = c.n_lower;
        j["K_hat"] = c.k_hat;
    }
    return j;
}

inline constexpr const char* envelope_csv_header = "d,r,m,kind,source,bound";

inline std::string to_csv(const EnvelopeTable& table)
{
    std::string out = std::string(envelope_csv_header) + "\n";
    for (const auto& row : table)
        out += std::to_string(row.d) + "," + std::to_string(row.r) + "," + std::to_string(row.m) + "," +
               to_string(row.kind) + "," + to_string(row.source) + "," + format_double(row.bound) + "\n";
    return out;
}

} // namespace cuberec
