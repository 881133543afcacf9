// cuberec: command line front end.
//
// Exit codes: 0 success, 1 verify failure, 2 resource or validation error.

#include "cuberec/cuberec.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace cuberec;

constexpr int exit_ok = 0;
constexpr int exit_verify_failed = 1;
constexpr int exit_invalid = 2;

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw resource_error("cannot open '" + path + "' for writing");
    out << text;
}

void append_csv_row(const std::string& path, const std::string& header, const std::string& row)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    const bool fresh = !fs::exists(path, ec) || fs::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out)
        throw resource_error("cannot open '" + path + "' for appending");
    if (fresh)
        out << header << "\n";
    out << row << "\n";
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw invalid_argument_error("cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw invalid_argument_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

struct GridOptions {
    int m = 4;
    int d = 2;
    int r = 2;
    std::optional<double> h;

    void attach(CLI::App* sub)
    {
        sub->set_help_flag("--help", "print this help message and exit");
        sub->add_option("--m", m, "grid resolution")->check(CLI::PositiveNumber);
        sub->add_option("--d", d, "dimension")->check(CLI::PositiveNumber);
        sub->add_option("--r", r, "smoothness order")->check(CLI::PositiveNumber);
        sub->add_option("--h", h, "cloud step (default 1/(2m max(r-1,1)))");
    }

    [[nodiscard]] RecoveryDesign design() const
    {
        return build_recovery_design(GridSpec(m, d), r, h.value_or(default_step(m, r)));
    }
};

ClassKind kind_from(const std::string& s) { return parse_class_kind(s); }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grid-plus-cloud recovery of smooth functions on the unit cube"};
    app.require_subcommand(1);

    // design
    GridOptions design_opts;
    std::string design_out;
    auto* design_cmd = app.add_subcommand("design", "emit a recovery design as JSON");
    design_opts.attach(design_cmd);
    design_cmd->add_option("--out", design_out, "output JSON path (default stdout)");

    // recover
    GridOptions recover_opts;
    std::string recover_function = "sinsum";
    std::optional<int> recover_probe;
    std::string recover_csv = "recover.csv";
    auto* recover_cmd = app.add_subcommand("recover", "reconstruct a battery function and measure the error");
    recover_opts.attach(recover_cmd);
    recover_cmd->add_option("--function", recover_function, "battery id");
    recover_cmd->add_option("--probe-m", recover_probe, "probe grid resolution (default 4m)");
    recover_cmd->add_option("--out", recover_csv, "CSV file the result row is appended to");

    // adversary
    std::string adversary_design;
    int adversary_r = 2;
    std::string adversary_kind = "Standard";
    int adversary_probe = 16;
    std::uint64_t adversary_seed = 0;
    std::optional<double> adversary_k;
    std::string adversary_out;
    auto* adversary_cmd = app.add_subcommand("adversary", "certify a lower bound for a design");
    adversary_cmd->add_option("--design", adversary_design, "design JSON file")->required();
    adversary_cmd->add_option("--r", adversary_r, "smoothness order")->check(CLI::PositiveNumber);
    adversary_cmd->add_option("--kind", adversary_kind, "Standard or Directional");
    adversary_cmd->add_option("--probe-m", adversary_probe, "probe grid resolution")->check(CLI::PositiveNumber);
    adversary_cmd->add_option("--seed", adversary_seed, "sampling seed");
    adversary_cmd->add_option("--k-hat", adversary_k, "override the estimated bump norm constant");
    adversary_cmd->add_option("--out", adversary_out, "output JSON path (default stdout)");

    // envelope
    int envelope_d = 2;
    int envelope_r = 2;
    int envelope_m_max = 8;
    std::string envelope_kind = "Standard";
    std::optional<double> envelope_eps;
    std::string envelope_out;
    auto* envelope_cmd = app.add_subcommand("envelope", "tabulate error envelopes or complexity counts");
    envelope_cmd->add_option("--d", envelope_d, "dimension")->check(CLI::PositiveNumber);
    envelope_cmd->add_option("--r", envelope_r, "smoothness order")->check(CLI::NonNegativeNumber);
    envelope_cmd->add_option("--m-max", envelope_m_max, "largest grid resolution")->check(CLI::PositiveNumber);
    envelope_cmd->add_option("--kind", envelope_kind, "Standard or Directional");
    envelope_cmd->add_option("--epsilon", envelope_eps, "emit the complexity counts at this accuracy as JSON");
    envelope_cmd->add_option("--out", envelope_out, "output path (default stdout)");

    // sweep
    std::string sweep_config;
    std::string sweep_out;
    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment sweep");
    sweep_cmd->add_option("--config", sweep_config, "SweepConfig JSON file (defaults apply without one)");
    sweep_cmd->add_option("--out", sweep_out, "output CSV path (overrides output_path; '-' for stdout)");

    // verify
    std::uint64_t verify_seed = 0;
    std::string verify_out;
    auto* verify_cmd = app.add_subcommand("verify", "run every invariant check");
    verify_cmd->add_option("--seed", verify_seed, "suite seed");
    verify_cmd->add_option("--out", verify_out, "output JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (*design_cmd) {
            emit(to_json(design_opts.design()).dump(2) + "\n", design_out);
        } else if (*recover_cmd) {
            const auto design = recover_opts.design();
            const auto f = battery(recover_function, recover_opts.r, recover_opts.d);
            const auto model = fit_taylor_models(design, sample_points(design.all_points(), f, recover_function));
            const auto report = sup_error(model, f, recover_probe.value_or(4 * recover_opts.m));
            std::cout << to_json(report).dump(2) << "\n";
            std::string witness;
            for (double c : report.witness.coords())
                witness += (witness.empty() ? "" : ";") + format_double(c);
            append_csv_row(recover_csv, "d,r,m,h,n_points,sup_estimate,witness",
                           std::to_string(recover_opts.d) + "," + std::to_string(recover_opts.r) + "," +
                               std::to_string(recover_opts.m) + "," + format_double(design.h()) + "," +
                               std::to_string(design.all_points().size()) + "," +
                               format_double(report.sup_estimate) + "," + witness);
        } else if (*adversary_cmd) {
            const auto points = pointset_from_json(read_json_file(adversary_design));
            const auto kind = kind_from(adversary_kind);
            const double k_hat = adversary_k.value_or(default_K_hat(adversary_r, adversary_seed));
            const auto cert = certify_lower_bound(points, SmoothnessClass{adversary_r, points.dim(), kind}, k_hat,
                                                  adversary_probe, adversary_seed);
            emit(to_json(cert).dump(2) + "\n", adversary_out);
        } else if (*envelope_cmd) {
            const auto kind = kind_from(envelope_kind);
            if (envelope_eps) {
                const double k_hat = default_K_hat(envelope_r, 0);
                emit(to_json(complexity_count(*envelope_eps, envelope_d, envelope_r, kind, k_hat)).dump(2) + "\n",
                     envelope_out);
            } else {
                emit(to_csv(build_envelope_table(envelope_d, envelope_r, envelope_m_max, kind)), envelope_out);
            }
        } else if (*sweep_cmd) {
            const auto config = sweep_config.empty() ? SweepConfig{} : sweep_config_from_json(read_json_file(sweep_config));
            emit(run_sweep(config), sweep_out.empty() ? config.output_path : sweep_out);
        } else if (*verify_cmd) {
            const auto report = verify_suite(verify_seed);
            emit(to_json(report).dump(2) + "\n", verify_out);
            for (const auto& c : report.checks)
                if (!c.passed)
                    std::cerr << "FAIL " << c.name << ": " << c.counterexample.dump() << "\n";
            return report.passed() ? exit_ok : exit_verify_failed;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid;
    }
    return exit_ok;
}
