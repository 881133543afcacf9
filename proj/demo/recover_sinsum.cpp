// Reconstructs s*sin(x1+...+xd) from grid-plus-cloud samples for growing m
// and prints the measured error next to the theoretical envelope and the
// adversary's lower bound for the same design.

#include "cuberec/cuberec.hpp"

#include <cstdio>

int main()
{
    using namespace cuberec;
    const int d = 2;
    const int r = 2;
    const auto f = battery("sinsum", r, d);
    const double k_hat = default_K_hat(r, 0);

    std::printf("%4s %8s %14s %14s %14s\n", "m", "points", "sup_error", "envelope", "lower_bound");
    for (int m : {2, 4, 8, 16}) {
        const auto design = build_recovery_design(GridSpec(m, d), r, default_step(m, r));
        const auto model = fit_taylor_models(design, sample_points(design.all_points(), f));
        const auto err = sup_error(model, f, 4 * m);
        const auto cert =
            certify_lower_bound(design.all_points(), SmoothnessClass{r, d, ClassKind::Standard}, k_hat, 4 * m);
        std::printf("%4d %8zu %14.6e %14.6e %14.6e\n", m, design.all_points().size(), err.sup_estimate,
                    envelope_closed(d, r, m, ClassKind::Standard), cert.bound);
    }
}
