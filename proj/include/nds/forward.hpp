#pragma once

#include <optional>
#include <vector>

#include "nds/charmatrix.hpp"
#include "nds/spectral_core.hpp"

namespace nds {

struct NewtonResult {
    cplx root;
    int iterations = 0;
    bool converged = false;
};

// Newton iteration on the logarithmic derivative of det:
//   lambda <- lambda - 1 / trace(Delta^{-1} Delta'),
// which avoids determinant overflow and keeps local quadratic convergence.
NewtonResult newton_root(const SystemRealization& sys, cplx lambda_init, double tol = 1e-12,
                         int max_iter = 50);

// Winding number (1/2πi) ∮ trace(Delta^{-1} Delta') dλ over the rectangle
// |Re(λ - center)| <= half_widths.real(), |Im(λ - center)| <= half_widths.imag().
// Throws when the contour passes through a root or the winding refuses to be
// an integer after doubling the quadrature order.
long count_roots_box(const SystemRealization& sys, cplx center, cplx half_widths,
                     int quad_points = 64);

struct SpectrumEntry {
    int m = 0;
    long k = 0;
    cplx seed;
    bool converged = false;
    bool collided = false;
    int iterations = 0;
    DegeneracyReport report;
};

struct SpectrumResult {
    std::vector<SpectrumEntry> entries;
    // The structural root lambda = 0 of canonical systems (Delta(0) = -∫A3 = 0,
    // multiplicity n); reported separately, never matched against targets.
    bool structural_zero = false;
};

SpectrumResult spectrum_near_grid(const SystemRealization& sys, const ReferenceSpectrum& ref,
                                  long window, double newton_tol = 1e-12, int max_iter = 60);

struct VerificationEntry {
    int m = 0;       // -1 for finite-part rows
    long k = 0;      // finite-part index j when m == -1
    cplx lambda;
    double sigma_min_ratio = 0.0;
    double vec_residual = 0.0; // ||d^* Delta|| / (||d|| sigma_max)
};

struct VerificationReport {
    std::vector<VerificationEntry> entries;
    double max_sigma_min_ratio = 0.0;
    double max_vec_residual = 0.0;
    double tol_root = 0.0;
    double tol_vec = 0.0;
    bool pass = false;
};

// Evaluates every prescribed (lambda, d) pair on |k| <= window plus the
// finite part, measuring root quality and left-annihilation residuals.
VerificationReport verify_assignment(const SystemRealization& sys, const SpectralTarget& target,
                                     const ReferenceSpectrum& ref, long window, double tol_root,
                                     double tol_vec);

} // namespace nds
