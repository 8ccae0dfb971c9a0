#include "nds/pipeline.hpp"

namespace nds {

namespace {

long effective_solve_window(const SpectralTarget& target, const PipelineOptions& options) {
    if (options.solve_window >= 0) return options.solve_window;
    return std::max(4 * target.window(), 2L);
}

} // namespace

PipelineResult run_assignment(const ReferenceSpectrum& ref, const EigenFrame& frame,
                              const SpectralTarget& target, const PipelineOptions& options) {
    SpectralTarget::require_assignable(ref);
    target.validate(ref, frame);
    const long ns = effective_solve_window(target, options);

    // Finite part first: the base solve runs on the transformed d table.
    std::optional<Mat> C;
    SpectralTarget base = target.without_finite_part();
    if (target.finite_part()) {
        FinitePartTransform pre = finite_part_pretransform(target, frame, ref);
        C = pre.C;
        base = std::move(pre.transformed);
    }

    const ClosenessReport closeness = closeness_report(base, ref, frame);

    std::optional<RepairInfo> repair;
    AssignmentSolution sol;
    try {
        sol = solve_assignment(ref, frame, base, ns);
    } catch (const solver_singular&) {
        if (options.no_repair) throw;
        const AlphaTable alpha = alpha_decompose(base, frame);
        PerturbationOutcome outcome = lemma2_adjust(alpha, base, ref, options.repair_epsilon,
                                                    options.seed, base.window(), ns);
        repair = RepairInfo{outcome.delta_norm, outcome.retries, outcome.window};
        base = apply_alpha(base, outcome.alpha, frame);
        sol = solve_assignment(ref, frame, base, ns);
    }

    SystemRealization hat = p_to_realization(sol, frame, ref);
    SystemRealization realization = C ? finite_part_posttransform(hat, *C) : std::move(hat);

    // Rebuild the reporting target: base d's (possibly repaired), mapped back
    // through the finite-part factor when one is present.
    SpectralTarget assigned = target;
    if (repair) {
        std::vector<std::vector<Vec>> d_table(static_cast<std::size_t>(target.n()));
        for (int m = 0; m < target.n(); ++m)
            for (long k = -target.window(); k <= target.window(); ++k) {
                Vec f = base.d_raw(m, k);
                d_table[static_cast<std::size_t>(m)].push_back(
                    C ? finite_part_row_recover(*C, base.lambda_raw(m, k), f) : std::move(f));
            }
        assigned = target.with_d_table(std::move(d_table));
    }

    PipelineResult result{std::move(realization), std::move(sol), std::move(assigned),
                          repair,        C,              0.0,
                          closeness};
    result.spectral_equation_residual =
        spectral_equation_residual(result.solution, ref, frame, base);
    return result;
}

VerificationReport run_verification(const PipelineResult& result, const ReferenceSpectrum& ref,
                                    const PipelineOptions& options) {
    const long window =
        options.verify_window >= 0 ? options.verify_window : result.assigned_target.window();
    return verify_assignment(result.realization, result.assigned_target, ref, window,
                             options.tol_root, options.tol_vec);
}

} // namespace nds
