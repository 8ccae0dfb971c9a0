#pragma once

#include <complex>

#include <Eigen/Dense>

namespace nds {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Conditioning gates shared by the solver paths.
inline constexpr double kFrameRankTol = 1e-12;      // sigma_min/sigma_max floor for frames
inline constexpr double kSolveConditionGate = 1e10; // D_m accepted for solving below this
inline constexpr double kRepairConditionGate = 1e8; // D_m accepted after repair below this
inline constexpr double kGramConditionGate = 1e10;

// Removable singularities of the exponential integrals switch to a series
// expansion below this radius; the closed form loses ~6 digits there.
inline constexpr double kSeriesRadius = 1e-6;

inline constexpr double kRootSigmaGate = 1e-8;   // sigma_min/sigma_max "is a root" default
inline constexpr double kCollisionTol = 1e-8;    // two Newton roots closer than this collide
inline constexpr double kVecClosenessWarn = 0.25; // solvability warning on sum_vec

} // namespace nds
