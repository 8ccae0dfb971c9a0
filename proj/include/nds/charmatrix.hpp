#pragma once

#include <utility>
#include <vector>

#include "nds/errors.hpp"
#include "nds/types.hpp"

namespace nds {

// Exponential integrals over theta in [-1, 0]:
//   exp_int0(s) = ∫ e^{s θ} dθ       = (1 - e^{-s}) / s
//   exp_int1(s) = ∫ θ e^{s θ} dθ     = (e^{-s}(1 + s) - 1) / s^2
//   exp_int2(s) = ∫ θ^2 e^{s θ} dθ   = (2 - e^{-s}(s^2 + 2s + 2)) / s^3
// Removable singularities at s = 0 are evaluated by a 6-term series inside
// |s| < kSeriesRadius.
cplx exp_int0(cplx s);
cplx exp_int1(cplx s);
cplx exp_int2(cplx s);

// A(θ) = P0 + θ P1 + Σ_e C_e e^{e θ} on θ ∈ [-1, 0].  Exponential terms are
// kept sorted by exponent with exact duplicates merged.
class MatrixFunctionRep {
public:
    explicit MatrixFunctionRep(int n);

    int n() const { return n_; }
    const Mat& constant() const { return constant_; }
    const Mat& linear() const { return linear_; }
    const std::vector<std::pair<cplx, Mat>>& exponentials() const { return exponentials_; }

    void add_constant(const Mat& c);
    void add_linear(const Mat& c);
    void add_exponential(cplx exponent, const Mat& coeff);

    bool is_zero() const;
    Mat evaluate(double theta) const;
    Mat integral() const; // ∫_{-1}^{0} A(θ) dθ in closed form

private:
    int n_;
    Mat constant_;
    Mat linear_;
    std::vector<std::pair<cplx, Mat>> exponentials_;
};

// ż(t) = A_{-1} ż(t-1) + ∫ A2(θ) ż(t+θ) dθ + ∫ A3(θ) z(t+θ) dθ.
// `canonical` records that ∫ A3 = 0 was certified at construction.
struct SystemRealization {
    Mat A_minus1;
    MatrixFunctionRep A2;
    MatrixFunctionRep A3;
    bool canonical = false;

    SystemRealization(Mat a_minus1, MatrixFunctionRep a2, MatrixFunctionRep a3);
    int n() const { return static_cast<int>(A_minus1.rows()); }

    static SystemRealization unperturbed(Mat a_minus1);
    double canonical_defect() const; // ||∫A3|| (Frobenius)
};

// ∫_{-1}^{0} e^{λθ} A(θ) dθ via the closed forms above.
Mat transform_coeff(const MatrixFunctionRep& rep, cplx lambda);
// d/dλ of transform_coeff.
Mat transform_coeff_derivative(const MatrixFunctionRep& rep, cplx lambda);

// Δ(λ) = λI - λ e^{-λ} A_{-1} - λ ∫ e^{λθ} A2 dθ - ∫ e^{λθ} A3 dθ.
Mat delta_eval(const SystemRealization& sys, cplx lambda);
Mat delta_derivative(const SystemRealization& sys, cplx lambda);

// SVD measurement of how close Δ(λ) is to singular, with the annihilating
// directions on both sides.
struct DegeneracyReport {
    cplx lambda;
    double sigma_min_ratio = 0.0; // sigma_min / sigma_max
    double sigma_max = 0.0;
    Vec left_null;   // w with w^* Δ ≈ 0
    Vec right_null;  // v with Δ v ≈ 0
    double left_residual = 0.0;  // ||w^* Δ||
    double right_residual = 0.0; // ||Δ v||
};

DegeneracyReport degeneracy_of(const Mat& delta, cplx lambda);
DegeneracyReport degeneracy(const SystemRealization& sys, cplx lambda);

// F(λ) = I - (∫e^{λθ}A2 dθ + (1/λ)∫e^{λθ}A3 dθ)(I - e^{-λ}A_{-1})^{-1},
// defined off the unperturbed spectrum.  identity_residual measures the
// agreement with Δ(λ)(I - e^{-λ}A_{-1})^{-1} / λ.
struct FMatrixResult {
    Mat F;
    double identity_residual = 0.0;
};

FMatrixResult f_matrix(const SystemRealization& sys, cplx lambda);

} // namespace nds
