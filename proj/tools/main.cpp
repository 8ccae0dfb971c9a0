// ndspectra — forward and inverse spectral computations for neutral type
// delay systems.
//
//   assign      problem.json -> realization.json
//   verify      realization.json + problem.json -> report (JSON + CSV)
//   forward     realization.json -> spectrum near the reference grid
//   roundtrip   assign then verify in one step
//   gram-report exponential-family Gram conditioning table
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.  Errors are
// mirrored as machine-readable JSON on stderr.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nds/io.hpp"

namespace {

using nds::io::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;

void emit_error(const std::string& kind, const std::string& message,
                const std::string& field = {}) {
    json j;
    j["error"]["kind"] = kind;
    j["error"]["message"] = message;
    if (!field.empty()) j["error"]["field"] = field;
    std::cerr << j.dump() << std::endl;
}

struct CommonFlags {
    long window = -1;
    long solve_window = -1;
    double tol_root = -1.0;
    double tol_vec = -1.0;
    double repair_epsilon = -1.0;
    bool no_repair = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void apply_flags(nds::PipelineOptions& options, const CommonFlags& flags) {
    if (flags.solve_window >= 0) options.solve_window = flags.solve_window;
    if (flags.window >= 0) options.verify_window = flags.window;
    if (flags.tol_root >= 0.0) options.tol_root = flags.tol_root;
    if (flags.tol_vec >= 0.0) options.tol_vec = flags.tol_vec;
    if (flags.repair_epsilon >= 0.0) options.repair_epsilon = flags.repair_epsilon;
    if (flags.no_repair) options.no_repair = true;
    if (flags.seed_set) options.seed = flags.seed;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--window", flags.window, "verification / spectrum window");
    cmd->add_option("--solve-window", flags.solve_window, "truncation window N_s");
    cmd->add_option("--tol-root", flags.tol_root, "root tolerance (sigma_min/sigma_max)");
    cmd->add_option("--tol-vec", flags.tol_vec, "left-vector residual tolerance");
    cmd->add_option("--seed", flags.seed, "seed for randomized repair")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--repair-epsilon", flags.repair_epsilon, "perturbation budget for repair");
    cmd->add_flag("--no-repair", flags.no_repair, "fail instead of adjusting a singular system");
}

int cmd_assign(const std::string& problem_path, const std::string& out_path,
               const CommonFlags& flags) {
    nds::io::Problem problem = nds::io::load_problem(problem_path);
    apply_flags(problem.options, flags);
    nds::PipelineResult result = nds::run_assignment(problem.ref, problem.frame, problem.target,
                                                     problem.options);
    json j = nds::io::realization_to_json(result.realization);
    j["diagnostics"] = nds::io::pipeline_diagnostics_json(result);
    nds::io::write_text_file(out_path, j.dump(2) + "\n");
    std::cout << "wrote " << out_path << " (spectral equation residual "
              << result.spectral_equation_residual << ")\n";
    return kExitOk;
}

int cmd_verify(const std::string& realization_path, const std::string& problem_path,
               const std::string& report_path, const std::string& csv_path,
               const CommonFlags& flags) {
    nds::SystemRealization sys = nds::io::load_realization(realization_path);
    nds::io::Problem problem = nds::io::load_problem(problem_path);
    apply_flags(problem.options, flags);
    const long window = problem.options.verify_window >= 0 ? problem.options.verify_window
                                                           : problem.target.window();
    nds::VerificationReport report =
        nds::verify_assignment(sys, problem.target, problem.ref, window,
                               problem.options.tol_root, problem.options.tol_vec);
    const json j = nds::io::verification_to_json(report);
    if (!report_path.empty()) nds::io::write_text_file(report_path, j.dump(2) + "\n");
    if (!csv_path.empty()) nds::io::write_text_file(csv_path, nds::io::verification_to_csv(report));
    std::cout << j.dump(2) << "\n";
    return report.pass ? kExitOk : kExitNumerical;
}

int cmd_forward(const std::string& realization_path, const std::string& problem_path,
                const std::string& csv_path, const std::string& report_path,
                const CommonFlags& flags) {
    nds::SystemRealization sys = nds::io::load_realization(realization_path);
    nds::io::Problem problem = nds::io::load_problem(problem_path);
    const long window = flags.window >= 0 ? flags.window : problem.target.window();
    nds::SpectrumResult spectrum = nds::spectrum_near_grid(sys, problem.ref, window);
    if (!csv_path.empty()) nds::io::write_text_file(csv_path, nds::io::spectrum_to_csv(spectrum));
    const json j = nds::io::spectrum_to_json(spectrum);
    if (!report_path.empty()) nds::io::write_text_file(report_path, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    for (const auto& e : spectrum.entries)
        if (!e.converged) return kExitNumerical;
    return kExitOk;
}

int cmd_roundtrip(const std::string& problem_path, const CommonFlags& flags) {
    nds::io::Problem problem = nds::io::load_problem(problem_path);
    apply_flags(problem.options, flags);
    nds::PipelineResult result = nds::run_assignment(problem.ref, problem.frame, problem.target,
                                                     problem.options);
    nds::VerificationReport report = nds::run_verification(result, problem.ref, problem.options);
    json j;
    j["verification"] = nds::io::verification_to_json(report);
    j["diagnostics"] = nds::io::pipeline_diagnostics_json(result);
    std::cout << j.dump(2) << "\n";
    return report.pass ? kExitOk : kExitNumerical;
}

int cmd_gram_report(const std::string& problem_path, int channel, std::vector<long> sizes) {
    nds::io::Problem problem = nds::io::load_problem(problem_path);
    if (channel < 0 || channel >= problem.ref.n())
        throw nds::input_error("gram-report: channel out of range", "channel");
    if (sizes.empty()) sizes = {8, 16, 32, 64};
    json rows = json::array();
    for (long N : sizes) {
        const nds::GramSystem gs = nds::gram_matrix(problem.ref, channel, N);
        json row;
        row["m"] = channel;
        row["window"] = N;
        row["condition"] = gs.condition;
        row["sigma_min"] = gs.sigma_min;
        row["sigma_max"] = gs.sigma_max;
        rows.push_back(std::move(row));
    }
    json j;
    j["gram"] = std::move(rows);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral assignment and verification for neutral type delay systems"};
    app.require_subcommand(1);

    std::string problem_path, realization_path, out_path, report_path, csv_path;
    int channel = 0;
    std::vector<long> sizes;
    CommonFlags flags;

    auto* assign = app.add_subcommand("assign", "solve the inverse problem");
    assign->add_option("problem", problem_path, "problem JSON file")->required();
    assign->add_option("-o,--out", out_path, "output realization file")->required();
    add_common_flags(assign, flags);

    auto* verify = app.add_subcommand("verify", "check a realization against targets");
    verify->add_option("realization", realization_path, "realization JSON file")->required();
    verify->add_option("problem", problem_path, "problem JSON file")->required();
    verify->add_option("-o,--report", report_path, "write the JSON report here");
    verify->add_option("--csv", csv_path, "write a plot-friendly CSV here");
    add_common_flags(verify, flags);

    auto* forward = app.add_subcommand("forward", "locate the spectrum near the reference grid");
    forward->add_option("realization", realization_path, "realization JSON file")->required();
    forward->add_option("problem", problem_path, "problem JSON file (reference data)")->required();
    forward->add_option("--csv", csv_path, "write the spectrum CSV here");
    forward->add_option("-o,--report", report_path, "write the JSON report here");
    add_common_flags(forward, flags);

    auto* roundtrip = app.add_subcommand("roundtrip", "assign then verify in one step");
    roundtrip->add_option("problem", problem_path, "problem JSON file")->required();
    add_common_flags(roundtrip, flags);

    auto* gram = app.add_subcommand("gram-report", "Gram conditioning of the exponential family");
    gram->add_option("problem", problem_path, "problem JSON file (reference data)")->required();
    gram->add_option("-m,--channel", channel, "channel index");
    gram->add_option("--sizes", sizes, "window sizes to tabulate");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*assign) return cmd_assign(problem_path, out_path, flags);
        if (*verify) return cmd_verify(realization_path, problem_path, report_path, csv_path, flags);
        if (*forward) return cmd_forward(realization_path, problem_path, csv_path, report_path, flags);
        if (*roundtrip) return cmd_roundtrip(problem_path, flags);
        if (*gram) return cmd_gram_report(problem_path, channel, sizes);
    } catch (const nds::input_error& e) {
        emit_error("input", e.what(), e.field());
        return kExitInput;
    } catch (const nds::solver_singular& e) {
        emit_error("numerical", e.what());
        return kExitNumerical;
    } catch (const nds::adjustment_failed& e) {
        emit_error("numerical", e.what());
        return kExitNumerical;
    } catch (const nds::conditioning_error& e) {
        emit_error("numerical", e.what());
        return kExitNumerical;
    } catch (const nds::internal_consistency_error& e) {
        emit_error("internal", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return kExitNumerical;
    }
    return kExitInput;
}
