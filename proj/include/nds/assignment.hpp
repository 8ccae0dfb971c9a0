#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nds/charmatrix.hpp"
#include "nds/spectral_core.hpp"
#include "nds/types.hpp"

namespace nds {

// Kernel entry s_{k0 k}^{m m0} = 1 / (lambda_tilde(m,k) - lambda(m0,k0)).
// The only coincidence allowed is lambda(m,k) == lambda_tilde(m,k) itself,
// which callers must handle through the scaled limit row (assemble_D does).
cplx s_entry(const ReferenceSpectrum& ref, const SpectralTarget& target, int m, int m0, long k,
             long k0);

// One truncated block operator D_m.  Rows are labeled (m0, k0), columns
// (j, k), both over |index| <= ns, blocks in channel-major order.
struct TruncatedOperator {
    int m = 0;
    long ns = 0;
    Mat matrix;

    long width() const { return 2 * ns + 1; }
    long dim() const { return static_cast<long>(matrix.rows()); }
    long row(int m0, long k0) const { return m0 * width() + (k0 + ns); }
    long col(int j, long k) const { return j * width() + (k + ns); }
};

// Block (m0, j) is diag(alpha(j,m0,.)) * S_{m m0}; the row block m0 == m is
// additionally scaled by Lambda_m = diag(lambda_tilde - lambda), and rows of
// that block whose target coincides with the grid become unit rows.
TruncatedOperator assemble_D(int m, const ReferenceSpectrum& ref, const SpectralTarget& target,
                             const AlphaTable& alpha, long ns);

// Right-hand side (alpha_{m,1}, ..., Lambda_m alpha_{m,m}, ..., alpha_{m,n}).
Vec assemble_rhs(int m, const ReferenceSpectrum& ref, const SpectralTarget& target,
                 const AlphaTable& alpha, long ns);

struct AssignmentSolution {
    int n = 0;
    long ns = 0;
    // p(k, m, j): coefficient tensor, |k| <= ns.
    std::vector<cplx> p_data;
    std::vector<double> condition; // per channel m
    std::vector<double> residual;  // relative linear residual per channel

    cplx p(long k, int m, int j) const;
    cplx& p_ref(long k, int m, int j);
};

struct SolveOptions {
    double condition_gate = kSolveConditionGate;
};

// Solves the n stacked systems D_m x = rhs and recovers p(k,m,j) from the
// solved columns; throws solver_singular when a D_m fails the gate.
AssignmentSolution solve_assignment(const ReferenceSpectrum& ref, const EigenFrame& frame,
                                    const SpectralTarget& target, long ns,
                                    const SolveOptions& options = {});

// Componentwise spectral-equation residual of a solution: for every target row
// and channel, |alpha_m + sum_{j,k} alpha_j (p(k,m,j)/beta_tilde) /
// (lambda_tilde - lambda)| (the scaled limit form at coincidences).  This is
// the module's ground truth for sign and conjugation bookkeeping.
double spectral_equation_residual(const AssignmentSolution& sol, const ReferenceSpectrum& ref,
                                  const EigenFrame& frame, const SpectralTarget& target);

// Lemma-1-style conditioning diagnostics of the raw kernel blocks.
struct InvertibilityReport {
    int m = 0;
    long ns = 0;
    std::vector<double> sigma_min;          // per m0: truncated S_{m m0} (Lambda-scaled at m0 == m)
    std::vector<double> sigma_max;          //
    std::vector<std::vector<cplx>> eps;     // per m0 != m: mu_m e^{-lambda(m0,k0)} - 1 over k0
    std::vector<cplx> q;                    // m0 == m: (mu_m e^{-lambda} - 1)/(lambda_tilde - lambda)
    std::vector<std::pair<int, long>> small_eps; // |eps| < 1e-6 flags (m0, k0)
};

InvertibilityReport invertibility_diagnostics(int m, const ReferenceSpectrum& ref,
                                              const SpectralTarget& target, long ns);

struct PerturbationOutcome {
    AlphaTable alpha;
    double delta_norm = 0.0; // sum |Delta alpha|^2
    int retries = 0;
    long window = 0;
};

struct RepairOptions {
    int max_retries = 16;
    double accept_condition = kRepairConditionGate;
};

// Randomized repair of a target whose D_m fails the solvability gate: redraws
// seeded perturbations of alpha on |k0| <= window until every channel passes
// `accept_condition`.  Entries outside the window are never touched.
PerturbationOutcome lemma2_adjust(const AlphaTable& alpha, const SpectralTarget& target,
                                  const ReferenceSpectrum& ref, double epsilon,
                                  std::uint64_t seed, long window, long ns,
                                  const RepairOptions& options = {});

// Finite-part machinery: C absorbs the extra eigenvalues lambda_j^0 with
// prescribed left rows d_j^0, and the d targets are pre-transformed so that a
// base solve on the transformed problem realizes the original targets after
// the post-transform.
struct FinitePartTransform {
    Mat C;
    double M_bound = 0.0; // sup over used lambda of ||I - C/lambda|| and ||C||
    SpectralTarget transformed; // same lambdas, transformed d table, no finite part
};

FinitePartTransform finite_part_pretransform(const SpectralTarget& target, const EigenFrame& frame,
                                             const ReferenceSpectrum& ref);

// Folds the factor (I - C/lambda) into the system matrices:
// Delta(lambda) = (I - C/lambda) Delta_hat(lambda).  Requires a canonical
// input system; certifies the identity on seeded sample points.
SystemRealization finite_part_posttransform(const SystemRealization& hat_sys, const Mat& C);

// Recover the annihilating rows of the full system from rows of the base
// system: d^* = f^* (I - C/lambda)^{-1}.
Vec finite_part_row_recover(const Mat& C, cplx lambda, const Vec& f);

} // namespace nds
