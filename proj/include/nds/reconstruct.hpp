#pragma once

#include <utility>

#include "nds/assignment.hpp"
#include "nds/charmatrix.hpp"
#include "nds/spectral_core.hpp"

namespace nds {

// Bilinear Gram matrix of the exponential family {e^{lambda_tilde(m,k) θ}}:
// G_{k,k'} = ∫ e^{(lt_k + lt_k') θ} dθ.  The Riesz-basis property keeps its
// conditioning uniformly bounded as the window grows; reported here as a
// diagnostic.
struct GramSystem {
    int m = 0;
    long window = 0;
    Mat G;
    double condition = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

GramSystem gram_matrix(const ReferenceSpectrum& ref, int m, long window);

// Builds the canonical realization (A3 ≡ 0) whose coefficient functionals
// reproduce the solved table p.  Per channel pair (j, m) the scalar kernel is
//   g_{jm}(θ) = Σ_{|k|<=ns} (p(k,m,j)/lambda_tilde(m,k)) e^{-lambda_tilde(m,k) θ},
// which satisfies ∫ g_{jm} e^{lambda_tilde(m,k) θ} dθ = p(k,m,j)/lambda_tilde
// for every k (the plus and minus families are biorthogonal on [-1,0]), so
// the matching conditions outside the window are exactly zero.  The matrix is
// assembled in frame coordinates: A2(θ) = Y [g_{jm}(θ)] Z^*.
SystemRealization p_to_realization(const AssignmentSolution& sol, const EigenFrame& frame,
                                   const ReferenceSpectrum& ref);

// Absorbs a constant-row operator Q1 acting on y = φ(0) - A_{-1} φ(-1) into
// the kernels: A2 = A2h + (θ+1) Q1 - θ Q1 A_{-1}, A3 = A3h + Q1 - Q1 A_{-1}.
// The defining functional identity is certified on seeded test functions.
std::pair<MatrixFunctionRep, MatrixFunctionRep> absorb_q1(const MatrixFunctionRep& A2_hat,
                                                          const MatrixFunctionRep& A3_hat,
                                                          const Mat& Q1, const Mat& A_minus1);

} // namespace nds
