#pragma once

#include <cstdint>
#include <optional>

#include "nds/assignment.hpp"
#include "nds/forward.hpp"
#include "nds/reconstruct.hpp"

namespace nds {

struct PipelineOptions {
    long solve_window = -1;      // -1: default 4 * target window (floor 2 * window)
    std::uint64_t seed = 12345;
    double tol_root = 1e-6;
    double tol_vec = 1e-6;
    double repair_epsilon = 1e-2;
    bool no_repair = false;
    long verify_window = -1;     // -1: target window
};

struct RepairInfo {
    double delta_norm = 0.0;
    int retries = 0;
    long window = 0;
};

struct PipelineResult {
    SystemRealization realization;
    AssignmentSolution solution;
    // Targets actually assigned: equals the input unless repair adjusted the
    // d table (finite part, when present, is carried through unchanged).
    SpectralTarget assigned_target;
    std::optional<RepairInfo> repair;
    std::optional<Mat> finite_part_C;
    double spectral_equation_residual = 0.0;
    ClosenessReport closeness;
};

// assign → (repair) → reconstruct → (finite-part fold), per the target's
// contents.  Verification is a separate call so callers can choose windows.
PipelineResult run_assignment(const ReferenceSpectrum& ref, const EigenFrame& frame,
                              const SpectralTarget& target, const PipelineOptions& options = {});

VerificationReport run_verification(const PipelineResult& result, const ReferenceSpectrum& ref,
                                    const PipelineOptions& options);

} // namespace nds
