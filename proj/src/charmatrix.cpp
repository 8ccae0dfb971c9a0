#include "nds/charmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nds/spectral_core.hpp"

namespace nds {

namespace {

// Series coefficients: ∫ θ^j e^{sθ} dθ expanded at s = 0 gives
// Σ_i (-1)^{i+j} s^i / (i! (i+j+1)).
cplx series_int(cplx s, int j) {
    cplx sum = 0.0;
    cplx power = 1.0;
    double fact = 1.0;
    for (int i = 0; i < 6; ++i) {
        const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        sum += sign * power / (fact * (i + j + 1));
        power *= s;
        fact *= (i + 1);
    }
    return sum;
}

bool lex_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

} // namespace

cplx exp_int0(cplx s) {
    if (std::abs(s) < kSeriesRadius) return series_int(s, 0);
    return (1.0 - std::exp(-s)) / s;
}

cplx exp_int1(cplx s) {
    if (std::abs(s) < kSeriesRadius) return series_int(s, 1);
    return (std::exp(-s) * (1.0 + s) - 1.0) / (s * s);
}

cplx exp_int2(cplx s) {
    if (std::abs(s) < kSeriesRadius) return series_int(s, 2);
    return (2.0 - std::exp(-s) * (s * s + 2.0 * s + 2.0)) / (s * s * s);
}

MatrixFunctionRep::MatrixFunctionRep(int n)
    : n_(n), constant_(Mat::Zero(n, n)), linear_(Mat::Zero(n, n)) {
    if (n < 1) throw input_error("MatrixFunctionRep: dimension must be positive");
}

void MatrixFunctionRep::add_constant(const Mat& c) {
    if (c.rows() != n_ || c.cols() != n_) throw input_error("MatrixFunctionRep: shape mismatch");
    constant_ += c;
}

void MatrixFunctionRep::add_linear(const Mat& c) {
    if (c.rows() != n_ || c.cols() != n_) throw input_error("MatrixFunctionRep: shape mismatch");
    linear_ += c;
}

void MatrixFunctionRep::add_exponential(cplx exponent, const Mat& coeff) {
    if (coeff.rows() != n_ || coeff.cols() != n_)
        throw input_error("MatrixFunctionRep: shape mismatch");
    if (exponent == cplx(0.0, 0.0)) { // e^{0θ} is a constant
        constant_ += coeff;
        return;
    }
    auto it = std::lower_bound(exponentials_.begin(), exponentials_.end(), exponent,
                               [](const auto& term, cplx e) { return lex_less(term.first, e); });
    if (it != exponentials_.end() && it->first == exponent) {
        it->second += coeff;
        if (it->second.norm() == 0.0) exponentials_.erase(it);
        return;
    }
    if (coeff.norm() == 0.0) return;
    exponentials_.insert(it, {exponent, coeff});
}

bool MatrixFunctionRep::is_zero() const {
    return constant_.norm() == 0.0 && linear_.norm() == 0.0 && exponentials_.empty();
}

Mat MatrixFunctionRep::evaluate(double theta) const {
    Mat out = constant_ + theta * linear_;
    for (const auto& [e, c] : exponentials_) out += c * std::exp(e * theta);
    return out;
}

Mat MatrixFunctionRep::integral() const {
    Mat out = constant_ - 0.5 * linear_; // ∫θ dθ = -1/2
    for (const auto& [e, c] : exponentials_) out += c * exp_int0(e);
    return out;
}

SystemRealization::SystemRealization(Mat a_minus1, MatrixFunctionRep a2, MatrixFunctionRep a3)
    : A_minus1(std::move(a_minus1)), A2(std::move(a2)), A3(std::move(a3)) {
    if (A_minus1.rows() != A_minus1.cols() || A_minus1.rows() != A2.n() || A2.n() != A3.n())
        throw input_error("SystemRealization: dimension mismatch");
    canonical = canonical_defect() <= 1e-12;
}

SystemRealization SystemRealization::unperturbed(Mat a_minus1) {
    const int n = static_cast<int>(a_minus1.rows());
    return SystemRealization(std::move(a_minus1), MatrixFunctionRep(n), MatrixFunctionRep(n));
}

double SystemRealization::canonical_defect() const { return A3.integral().norm(); }

Mat transform_coeff(const MatrixFunctionRep& rep, cplx lambda) {
    Mat out = rep.constant() * exp_int0(lambda) + rep.linear() * exp_int1(lambda);
    for (const auto& [e, c] : rep.exponentials()) out += c * exp_int0(lambda + e);
    return out;
}

Mat transform_coeff_derivative(const MatrixFunctionRep& rep, cplx lambda) {
    Mat out = rep.constant() * exp_int1(lambda) + rep.linear() * exp_int2(lambda);
    for (const auto& [e, c] : rep.exponentials()) out += c * exp_int1(lambda + e);
    return out;
}

Mat delta_eval(const SystemRealization& sys, cplx lambda) {
    const int n = sys.n();
    Mat out = lambda * Mat::Identity(n, n);
    out -= lambda * std::exp(-lambda) * sys.A_minus1;
    if (!sys.A2.is_zero()) out -= lambda * transform_coeff(sys.A2, lambda);
    if (!sys.A3.is_zero()) out -= transform_coeff(sys.A3, lambda);
    return out;
}

Mat delta_derivative(const SystemRealization& sys, cplx lambda) {
    const int n = sys.n();
    Mat out = Mat::Identity(n, n);
    out -= (1.0 - lambda) * std::exp(-lambda) * sys.A_minus1;
    if (!sys.A2.is_zero())
        out -= transform_coeff(sys.A2, lambda) + lambda * transform_coeff_derivative(sys.A2, lambda);
    if (!sys.A3.is_zero()) out -= transform_coeff_derivative(sys.A3, lambda);
    return out;
}

DegeneracyReport degeneracy_of(const Mat& delta, cplx lambda) {
    Eigen::JacobiSVD<Mat> svd(delta, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int last = static_cast<int>(sv.size()) - 1;
    DegeneracyReport rep;
    rep.lambda = lambda;
    rep.sigma_max = sv(0);
    rep.sigma_min_ratio = sv(0) > 0.0 ? sv(last) / sv(0) : 0.0;
    rep.left_null = svd.matrixU().col(last);
    rep.right_null = svd.matrixV().col(last);
    rep.left_residual = (rep.left_null.adjoint() * delta).norm();
    rep.right_residual = (delta * rep.right_null).norm();
    return rep;
}

DegeneracyReport degeneracy(const SystemRealization& sys, cplx lambda) {
    return degeneracy_of(delta_eval(sys, lambda), lambda);
}

FMatrixResult f_matrix(const SystemRealization& sys, cplx lambda) {
    const int n = sys.n();
    if (lambda == cplx(0.0, 0.0))
        throw input_error("f_matrix: lambda = 0 lies in the unperturbed spectrum");
    const Mat base = Mat::Identity(n, n) - std::exp(-lambda) * sys.A_minus1;
    Eigen::JacobiSVD<Mat> svd(base);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) / sv(0) < 1e-12) {
        // Name the grid point responsible: the nearest lambda_tilde of A_{-1}.
        Eigen::ComplexEigenSolver<Mat> es(sys.A_minus1, false);
        std::ostringstream os;
        os << "f_matrix: lambda = " << lambda.real() << (lambda.imag() < 0 ? "" : "+")
           << lambda.imag() << "i lies on the unperturbed spectrum";
        double best = std::numeric_limits<double>::infinity();
        cplx best_lt = 0.0;
        int best_m = -1;
        long best_k = 0;
        for (int m = 0; m < n; ++m) {
            const cplx mu = es.eigenvalues()(m);
            if (mu == cplx(0.0, 0.0)) continue;
            const double arg = arg_principal(mu);
            const long k = std::lround((lambda.imag() - arg) / kTwoPi);
            const cplx lt(std::log(std::abs(mu)), arg + kTwoPi * static_cast<double>(k));
            if (std::abs(lt - lambda) < best) {
                best = std::abs(lt - lambda);
                best_lt = lt;
                best_m = m;
                best_k = k;
            }
        }
        if (best_m >= 0)
            os << "; nearest lambda_tilde(m=" << best_m << ", k=" << best_k << ") = "
               << best_lt.real() << (best_lt.imag() < 0 ? "" : "+") << best_lt.imag() << "i";
        throw input_error(os.str(), "lambda");
    }
    const Mat inv = base.partialPivLu().solve(Mat::Identity(n, n));
    Mat kernel = Mat::Zero(n, n);
    if (!sys.A2.is_zero()) kernel += transform_coeff(sys.A2, lambda);
    if (!sys.A3.is_zero()) kernel += transform_coeff(sys.A3, lambda) / lambda;
    FMatrixResult result;
    result.F = Mat::Identity(n, n) - kernel * inv;
    const Mat alt = delta_eval(sys, lambda) * inv / lambda;
    result.identity_residual = (result.F - alt).norm() / result.F.norm();
    return result;
}

} // namespace nds
