#include "nds/assignment.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nds/rng.hpp"

namespace nds {

namespace {

std::string index_str(int m, long k) {
    return "(m=" + std::to_string(m) + ", k=" + std::to_string(k) + ")";
}

double condition_from(const Eigen::JacobiSVD<Mat>& svd) {
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

double condition_of(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return condition_from(svd);
}

} // namespace

cplx s_entry(const ReferenceSpectrum& ref, const SpectralTarget& target, int m, int m0, long k,
             long k0) {
    const cplx lt = ref.lambda_tilde(m, k);
    const cplx lam = target.lambda(ref, m0, k0);
    if (lt == lam) {
        std::ostringstream os;
        if (m == m0 && k == k0)
            os << "s_entry: coincident target " << index_str(m0, k0)
               << " requires the scaled limit row";
        else
            os << "s_entry: target lambda" << index_str(m0, k0) << " equals lambda_tilde"
               << index_str(m, k);
        throw input_error(os.str());
    }
    return 1.0 / (lt - lam);
}

TruncatedOperator assemble_D(int m, const ReferenceSpectrum& ref, const SpectralTarget& target,
                             const AlphaTable& alpha, long ns) {
    const int n = ref.n();
    TruncatedOperator op;
    op.m = m;
    op.ns = ns;
    const long width = op.width();
    op.matrix = Mat::Zero(n * width, n * width);
    for (int m0 = 0; m0 < n; ++m0) {
        for (long k0 = -ns; k0 <= ns; ++k0) {
            const long r = op.row(m0, k0);
            const cplx lam = target.lambda(ref, m0, k0);
            if (m0 == m) {
                const cplx lt = ref.lambda_tilde(m, k0);
                if (lam == lt) {
                    // limit of Lambda_m S_mm: unit diagonal, zero elsewhere
                    for (int j = 0; j < n; ++j)
                        op.matrix(r, op.col(j, k0)) = alpha.alpha(j, m, k0);
                    continue;
                }
                const cplx scale = lt - lam;
                for (int j = 0; j < n; ++j) {
                    const cplx a = alpha.alpha(j, m, k0) * scale;
                    for (long k = -ns; k <= ns; ++k)
                        op.matrix(r, op.col(j, k)) = a / (ref.lambda_tilde(m, k) - lam);
                }
            } else {
                for (int j = 0; j < n; ++j) {
                    const cplx a = alpha.alpha(j, m0, k0);
                    for (long k = -ns; k <= ns; ++k)
                        op.matrix(r, op.col(j, k)) = a * s_entry(ref, target, m, m0, k, k0);
                }
            }
        }
    }
    return op;
}

Vec assemble_rhs(int m, const ReferenceSpectrum& ref, const SpectralTarget& target,
                 const AlphaTable& alpha, long ns) {
    const int n = ref.n();
    const long width = 2 * ns + 1;
    Vec rhs = Vec::Zero(n * width);
    for (int m0 = 0; m0 < n; ++m0)
        for (long k0 = -ns; k0 <= ns; ++k0) {
            const long r = m0 * width + (k0 + ns);
            if (m0 == m) {
                const cplx lam = target.lambda(ref, m, k0);
                const cplx lt = ref.lambda_tilde(m, k0);
                rhs(r) = (lam == lt) ? cplx(0.0, 0.0) : (lt - lam) * alpha.alpha(m, m, k0);
            } else {
                rhs(r) = alpha.alpha(m, m0, k0);
            }
        }
    return rhs;
}

cplx AssignmentSolution::p(long k, int m, int j) const {
    const long width = 2 * ns + 1;
    return p_data[static_cast<std::size_t>((static_cast<long>(m) * n + j) * width + (k + ns))];
}

cplx& AssignmentSolution::p_ref(long k, int m, int j) {
    const long width = 2 * ns + 1;
    return p_data[static_cast<std::size_t>((static_cast<long>(m) * n + j) * width + (k + ns))];
}

AssignmentSolution solve_assignment(const ReferenceSpectrum& ref, const EigenFrame& frame,
                                    const SpectralTarget& target, long ns,
                                    const SolveOptions& options) {
    SpectralTarget::require_assignable(ref);
    target.validate(ref, frame);
    if (ns < 2 * target.window())
        throw input_error("solve_assignment: solve window must be at least twice the target window",
                          "solve_window");
    const int n = ref.n();
    const AlphaTable alpha = alpha_decompose(target, frame);
    AssignmentSolution sol;
    sol.n = n;
    sol.ns = ns;
    sol.p_data.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                          static_cast<std::size_t>(2 * ns + 1),
                      cplx(0.0, 0.0));
    sol.condition.resize(static_cast<std::size_t>(n));
    sol.residual.resize(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        const TruncatedOperator op = assemble_D(m, ref, target, alpha, ns);
        const Vec rhs = assemble_rhs(m, ref, target, alpha, ns);
        Eigen::JacobiSVD<Mat> svd(op.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double cond = condition_from(svd);
        sol.condition[static_cast<std::size_t>(m)] = cond;
        if (!(cond <= options.condition_gate))
            throw solver_singular("solve_assignment: D_" + std::to_string(m) +
                                      " condition estimate " + std::to_string(cond) +
                                      " exceeds the solvability gate",
                                  m, cond);
        const Vec x = svd.solve(rhs);
        const double rhs_norm = rhs.norm();
        const double res = (op.matrix * x - rhs).norm();
        sol.residual[static_cast<std::size_t>(m)] = rhs_norm > 0.0 ? res / rhs_norm : res;
        // x_(j,k) = -p(k,m,j) / beta_tilde(m,k)
        for (int j = 0; j < n; ++j)
            for (long k = -ns; k <= ns; ++k)
                sol.p_ref(k, m, j) = -x(op.col(j, k)) * ref.beta_tilde(m, k);
    }
    return sol;
}

double spectral_equation_residual(const AssignmentSolution& sol, const ReferenceSpectrum& ref,
                                  const EigenFrame& frame, const SpectralTarget& target) {
    const int n = sol.n;
    const AlphaTable alpha = alpha_decompose(target, frame);
    double worst = 0.0;
    for (int m0 = 0; m0 < n; ++m0)
        for (long k0 = -sol.ns; k0 <= sol.ns; ++k0) {
            const cplx lam = target.lambda(ref, m0, k0);
            for (int m = 0; m < n; ++m) {
                const bool coincident = (m == m0) && (lam == ref.lambda_tilde(m, k0));
                cplx acc;
                if (coincident) {
                    // limit form: sum_j alpha_j x_(j,k0) with x = -p/beta
                    acc = 0.0;
                    for (int j = 0; j < n; ++j)
                        acc += alpha.alpha(j, m0, k0) *
                               (-sol.p(k0, m, j) / ref.beta_tilde(m, k0));
                } else {
                    acc = alpha.alpha(m, m0, k0);
                    for (int j = 0; j < n; ++j) {
                        const cplx a = alpha.alpha(j, m0, k0);
                        for (long k = -sol.ns; k <= sol.ns; ++k)
                            acc += a * (sol.p(k, m, j) / ref.beta_tilde(m, k)) /
                                   (ref.lambda_tilde(m, k) - lam);
                    }
                }
                worst = std::max(worst, std::abs(acc));
            }
        }
    return worst;
}

InvertibilityReport invertibility_diagnostics(int m, const ReferenceSpectrum& ref,
                                              const SpectralTarget& target, long ns) {
    const int n = ref.n();
    InvertibilityReport rep;
    rep.m = m;
    rep.ns = ns;
    rep.sigma_min.resize(static_cast<std::size_t>(n));
    rep.sigma_max.resize(static_cast<std::size_t>(n));
    rep.eps.resize(static_cast<std::size_t>(n));
    const long width = 2 * ns + 1;
    for (int m0 = 0; m0 < n; ++m0) {
        Mat block(width, width);
        for (long k0 = -ns; k0 <= ns; ++k0) {
            const cplx lam = target.lambda(ref, m0, k0);
            if (m0 == m) {
                const cplx lt = ref.lambda_tilde(m, k0);
                if (lam == lt) {
                    block.row(k0 + ns).setZero();
                    block(k0 + ns, k0 + ns) = 1.0;
                    rep.q.push_back(cplx(1.0, 0.0));
                } else {
                    for (long k = -ns; k <= ns; ++k)
                        block(k0 + ns, k + ns) = (lt - lam) / (ref.lambda_tilde(m, k) - lam);
                    rep.q.push_back((ref.mu(m) * std::exp(-lam) - 1.0) / (lt - lam));
                }
            } else {
                for (long k = -ns; k <= ns; ++k)
                    block(k0 + ns, k + ns) = 1.0 / (ref.lambda_tilde(m, k) - lam);
                const cplx eps = ref.mu(m) * std::exp(-lam) - 1.0;
                rep.eps[static_cast<std::size_t>(m0)].push_back(eps);
                if (std::abs(eps) < 1e-6) rep.small_eps.push_back({m0, k0});
            }
        }
        Eigen::JacobiSVD<Mat> svd(block);
        const auto& sv = svd.singularValues();
        rep.sigma_min[static_cast<std::size_t>(m0)] = sv(sv.size() - 1);
        rep.sigma_max[static_cast<std::size_t>(m0)] = sv(0);
    }
    return rep;
}

PerturbationOutcome lemma2_adjust(const AlphaTable& alpha, const SpectralTarget& target,
                                  const ReferenceSpectrum& ref, double epsilon,
                                  std::uint64_t seed, long window, long ns,
                                  const RepairOptions& options) {
    const int n = ref.n();
    if (window > target.window())
        throw input_error("lemma2_adjust: repair window exceeds the target window", "window");
    if (window < 0) throw input_error("lemma2_adjust: negative window", "window");

    auto worst_condition = [&](const AlphaTable& a) {
        double worst = 0.0;
        for (int m = 0; m < n; ++m) {
            const TruncatedOperator op = assemble_D(m, ref, target, a, ns);
            worst = std::max(worst, condition_of(op.matrix));
        }
        return worst;
    };

    PerturbationOutcome out{alpha, 0.0, 0, window};
    double cond = worst_condition(alpha);
    if (cond <= options.accept_condition) return out;

    if (!(epsilon > 0.0))
        throw adjustment_failed("lemma2_adjust: no perturbation budget (epsilon <= 0)", cond, 0);

    ComplexGaussian rng(seed);
    const std::size_t entries =
        static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
        static_cast<std::size_t>(2 * window + 1);
    double best = cond;
    for (int attempt = 1; attempt <= options.max_retries; ++attempt) {
        std::vector<cplx> draw(entries);
        double norm2 = 0.0;
        for (auto& v : draw) {
            v = rng();
            norm2 += std::norm(v);
        }
        // scale the whole draw so sum |Delta alpha|^2 = 0.9 * epsilon
        const double scale = norm2 > 0.0 ? std::sqrt(0.9 * epsilon / norm2) : 0.0;
        AlphaTable candidate = alpha;
        std::size_t idx = 0;
        double delta_norm = 0.0;
        for (int m = 0; m < n; ++m)
            for (int m0 = 0; m0 < n; ++m0)
                for (long k0 = -window; k0 <= window; ++k0) {
                    const cplx dv = draw[idx++] * scale;
                    candidate.at(m, m0, k0) += dv;
                    delta_norm += std::norm(dv);
                }
        cond = worst_condition(candidate);
        best = std::min(best, cond);
        if (cond <= options.accept_condition) {
            out.alpha = std::move(candidate);
            out.delta_norm = delta_norm;
            out.retries = attempt;
            return out;
        }
    }
    throw adjustment_failed("lemma2_adjust: retry limit exhausted; best condition " +
                                std::to_string(best),
                            best, options.max_retries);
}

FinitePartTransform finite_part_pretransform(const SpectralTarget& target, const EigenFrame& frame,
                                             const ReferenceSpectrum& ref) {
    if (!target.finite_part())
        throw input_error("finite_part_pretransform: target has no finite part",
                          "target.finite_part");
    target.validate(ref, frame);
    const auto& fp = *target.finite_part();
    const int n = target.n();
    const int nf = static_cast<int>(fp.lambda0.size());

    if (nf != n)
        throw input_error("finite_part_pretransform: need exactly n finite-part rows",
                          "target.finite_part");
    Mat D0H(nf, n); // rows d_j^0*
    for (int j = 0; j < nf; ++j) D0H.row(j) = fp.d0[static_cast<std::size_t>(j)].adjoint();
    // d_j^0* C = lambda_j^0 d_j^0*  =>  C = (D0*)^{-1} diag(lambda0) D0*
    Vec lam0(nf);
    for (int j = 0; j < nf; ++j) lam0(j) = fp.lambda0[static_cast<std::size_t>(j)];
    Eigen::PartialPivLU<Mat> lu(D0H);
    const Mat C = lu.solve(lam0.asDiagonal() * D0H);

    FinitePartTransform out{C, C.operatorNorm(), target.without_finite_part()};

    // f^* = d^* (I - C/lambda); the lambda table is unchanged.  Tail targets
    // keep the z_m convention.
    std::vector<std::vector<Vec>> f_table(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m)
        for (long k = -target.window(); k <= target.window(); ++k) {
            const cplx lam = target.lambda_raw(m, k);
            const Vec& d = target.d_raw(m, k);
            Vec f;
            if (lam == cplx(0.0, 0.0)) {
                // limit direction of lambda*(I - C/lambda) = lambda I - C
                f = -(C.adjoint() * d);
            } else {
                const Mat M = Mat::Identity(n, n) - C / lam;
                Eigen::JacobiSVD<Mat> svd(M);
                const auto& sv = svd.singularValues();
                if (sv(sv.size() - 1) / sv(0) < kFrameRankTol) {
                    std::ostringstream os;
                    os << "finite_part_pretransform: I - C/lambda singular at lambda(m=" << m
                       << ", k=" << k << ")";
                    throw input_error(os.str(), "target.lambda");
                }
                f = M.adjoint() * d; // row form: f^* = d^* M
                out.M_bound = std::max(out.M_bound, M.operatorNorm());
            }
            if (f.norm() == 0.0)
                throw input_error("finite_part_pretransform: transformed vector vanished",
                                  "target.d");
            f_table[static_cast<std::size_t>(m)].push_back(std::move(f));
        }
    out.transformed = out.transformed.with_d_table(std::move(f_table));
    return out;
}

SystemRealization finite_part_posttransform(const SystemRealization& hat_sys, const Mat& C) {
    const int n = hat_sys.n();
    if (C.rows() != n || C.cols() != n)
        throw input_error("finite_part_posttransform: C dimension mismatch");
    if (hat_sys.canonical_defect() > 1e-10)
        throw input_error("finite_part_posttransform: input system must satisfy condition (C)");
    if (hat_sys.A3.linear().norm() != 0.0)
        throw input_error(
            "finite_part_posttransform: theta-linear A3 terms are outside the representable class");

    // Delta(lambda) = (I - C/lambda) Delta_hat(lambda) expands, under the
    // all-minus sign convention, into
    //   A2 = A2h + (theta+1) C - theta C A_{-1}
    //   A3 = A3h + C - C A_{-1} - C A2h(theta) + ∫_{-1}^{theta} C A3h
    MatrixFunctionRep A2 = hat_sys.A2;
    A2.add_constant(C);
    A2.add_linear(C - C * hat_sys.A_minus1);

    MatrixFunctionRep A3 = hat_sys.A3;
    A3.add_constant(C - C * hat_sys.A_minus1);
    A3.add_constant(-C * hat_sys.A2.constant());
    A3.add_linear(-C * hat_sys.A2.linear());
    for (const auto& [e, coeff] : hat_sys.A2.exponentials()) A3.add_exponential(e, -C * coeff);
    // ∫_{-1}^{theta} C A3h(tau) dtau for constant and exponential terms
    if (hat_sys.A3.constant().norm() != 0.0) {
        const Mat G = C * hat_sys.A3.constant();
        A3.add_linear(G);
        A3.add_constant(G);
    }
    for (const auto& [e, coeff] : hat_sys.A3.exponentials()) {
        const Mat G = C * coeff / e; // (e^{e theta} - e^{-e}) / e
        A3.add_exponential(e, G);
        A3.add_constant(-G * std::exp(-e));
    }

    SystemRealization out(hat_sys.A_minus1, std::move(A2), std::move(A3));

    // Certify the factorization at seeded sample points; a failure here means
    // a sign-convention regression.
    ComplexGaussian rng(0x5eedf01du);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const cplx lambda = cplx(1.0, 0.0) + 0.75 * rng();
        const Mat lhs = delta_eval(out, lambda);
        const Mat rhs = (Mat::Identity(n, n) - C / lambda) * delta_eval(hat_sys, lambda);
        worst = std::max(worst, (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300));
    }
    if (worst > 1e-10)
        throw internal_consistency_error(
            "finite_part_posttransform: factorization identity residual " + std::to_string(worst));
    return out;
}

Vec finite_part_row_recover(const Mat& C, cplx lambda, const Vec& f) {
    const int n = static_cast<int>(C.rows());
    if (lambda == cplx(0.0, 0.0))
        throw input_error("finite_part_row_recover: lambda = 0 has no inverse factor");
    const Mat M = Mat::Identity(n, n) - C / lambda;
    // d^* = f^* M^{-1}  =>  d = M^{-*} f
    return M.adjoint().partialPivLu().solve(f);
}

} // namespace nds
