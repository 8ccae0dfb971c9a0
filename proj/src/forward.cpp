#include "nds/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nds/quadrature.hpp"

namespace nds {

namespace {

// log-derivative of det at lambda; infinite at roots
cplx det_log_derivative(const SystemRealization& sys, cplx lambda, bool& finite) {
    const Mat delta = delta_eval(sys, lambda);
    Eigen::PartialPivLU<Mat> lu(delta);
    const Mat sol = lu.solve(delta_derivative(sys, lambda));
    const cplx t = sol.trace();
    finite = std::isfinite(t.real()) && std::isfinite(t.imag());
    return t;
}

} // namespace

NewtonResult newton_root(const SystemRealization& sys, cplx lambda_init, double tol,
                         int max_iter) {
    NewtonResult result;
    result.root = lambda_init;
    cplx lambda = lambda_init;
    for (int it = 0; it <= max_iter; ++it) {
        bool finite = true;
        cplx t = det_log_derivative(sys, lambda, finite);
        if (!finite || std::abs(t) == 0.0) {
            // Singular or flat iterate: either we are sitting on a root, or we
            // nudge along decreasing sigma_min for a few steps.
            if (degeneracy(sys, lambda).sigma_min_ratio <= 1e-12) {
                result.root = lambda;
                result.iterations = it;
                result.converged = true;
                return result;
            }
            cplx best = lambda;
            double best_sigma = degeneracy(sys, lambda).sigma_min_ratio;
            double h = 1e-3 * std::max(1.0, std::abs(lambda));
            bool improved = false;
            for (int probe = 0; probe < 3; ++probe) {
                for (cplx dir : {cplx(1, 0), cplx(-1, 0), cplx(0, 1), cplx(0, -1)}) {
                    const cplx cand = lambda + h * dir;
                    const double s = degeneracy(sys, cand).sigma_min_ratio;
                    if (s < best_sigma) {
                        best_sigma = s;
                        best = cand;
                        improved = true;
                    }
                }
                lambda = best;
                h *= 0.5;
            }
            if (!improved) break;
            continue;
        }
        cplx step = 1.0 / t;
        if (std::abs(step) <= tol) {
            result.root = lambda;
            result.iterations = it;
            result.converged = true;
            return result;
        }
        if (it == max_iter) break; // budget exhausted before this step
        if (std::abs(step) > 1.5) step *= 1.5 / std::abs(step); // keep inside the grid cell scale
        lambda -= step;
    }
    result.root = lambda;
    result.iterations = max_iter;
    result.converged = false;
    return result;
}

long count_roots_box(const SystemRealization& sys, cplx center, cplx half_widths,
                     int quad_points) {
    const double hx = half_widths.real();
    const double hy = half_widths.imag();
    if (!(hx > 0.0) || !(hy > 0.0))
        throw input_error("count_roots_box: half widths must be positive");

    const cplx corners[4] = {center + cplx(-hx, -hy), center + cplx(hx, -hy),
                             center + cplx(hx, hy), center + cplx(-hx, hy)};

    auto attempt = [&](int points) -> double {
        const auto& gl = gauss_legendre(points);
        cplx integral = 0.0;
        for (int edge = 0; edge < 4; ++edge) {
            const cplx a = corners[edge];
            const cplx b = corners[(edge + 1) % 4];
            const cplx mid = 0.5 * (a + b);
            const cplx half = 0.5 * (b - a);
            for (int i = 0; i < points; ++i) {
                const cplx lambda = mid + gl.nodes[i] * half;
                const Mat delta = delta_eval(sys, lambda);
                Eigen::JacobiSVD<Mat> svd(delta);
                const auto& sv = svd.singularValues();
                if (sv(0) <= 0.0 || sv(sv.size() - 1) / sv(0) <= 1e-10)
                    throw input_error("count_roots_box: contour passes through a root near lambda = " +
                                      std::to_string(lambda.real()) + (lambda.imag() < 0 ? "" : "+") +
                                      std::to_string(lambda.imag()) + "i");
                bool finite = true;
                integral += gl.weights[i] * half * det_log_derivative(sys, lambda, finite);
            }
        }
        return (integral / cplx(0.0, kTwoPi)).real();
    };

    double winding = attempt(quad_points);
    if (std::abs(winding - std::round(winding)) > 0.25) winding = attempt(2 * quad_points);
    if (std::abs(winding - std::round(winding)) > 0.25)
        throw input_error("count_roots_box: non-integer winding " + std::to_string(winding));
    return std::lround(winding);
}

SpectrumResult spectrum_near_grid(const SystemRealization& sys, const ReferenceSpectrum& ref,
                                  long window, double newton_tol, int max_iter) {
    SpectrumResult result;
    for (int m = 0; m < ref.n(); ++m) {
        for (long k = -window; k <= window; ++k) {
            SpectrumEntry entry;
            entry.m = m;
            entry.k = k;
            entry.seed = ref.lambda_tilde(m, k);
            const NewtonResult nr = newton_root(sys, entry.seed, newton_tol, max_iter);
            entry.converged = nr.converged;
            entry.iterations = nr.iterations;
            entry.report = degeneracy(sys, nr.root);
            result.entries.push_back(std::move(entry));
        }
    }
    // collision flags: two seeds landing on the same root
    for (std::size_t a = 0; a < result.entries.size(); ++a)
        for (std::size_t b = a + 1; b < result.entries.size(); ++b) {
            if (!result.entries[a].converged || !result.entries[b].converged) continue;
            if (std::abs(result.entries[a].report.lambda - result.entries[b].report.lambda) <
                kCollisionTol) {
                result.entries[a].collided = true;
                result.entries[b].collided = true;
            }
        }
    result.structural_zero = sys.canonical;
    return result;
}

VerificationReport verify_assignment(const SystemRealization& sys, const SpectralTarget& target,
                                     const ReferenceSpectrum& ref, long window, double tol_root,
                                     double tol_vec) {
    if (window > target.window())
        throw input_error("verify_assignment: verification window exceeds the target window",
                          "window");
    if (target.n() != ref.n() || target.n() != sys.n())
        throw input_error("verify_assignment: dimension mismatch");
    VerificationReport report;
    report.tol_root = tol_root;
    report.tol_vec = tol_vec;

    auto check = [&](int m, long k, cplx lambda, const Vec& d) {
        VerificationEntry entry;
        entry.m = m;
        entry.k = k;
        entry.lambda = lambda;
        const Mat delta = delta_eval(sys, lambda);
        const DegeneracyReport deg = degeneracy_of(delta, lambda);
        entry.sigma_min_ratio = deg.sigma_min_ratio;
        entry.vec_residual =
            (d.adjoint() * delta).norm() / (d.norm() * std::max(deg.sigma_max, 1e-300));
        report.max_sigma_min_ratio = std::max(report.max_sigma_min_ratio, entry.sigma_min_ratio);
        report.max_vec_residual = std::max(report.max_vec_residual, entry.vec_residual);
        report.entries.push_back(std::move(entry));
    };

    for (int m = 0; m < target.n(); ++m)
        for (long k = -window; k <= window; ++k)
            check(m, k, target.lambda_raw(m, k), target.d_raw(m, k));
    if (target.finite_part()) {
        const auto& fp = *target.finite_part();
        for (std::size_t j = 0; j < fp.lambda0.size(); ++j)
            check(-1, static_cast<long>(j), fp.lambda0[j], fp.d0[j]);
    }
    report.pass =
        report.max_sigma_min_ratio <= tol_root && report.max_vec_residual <= tol_vec;
    return report;
}

} // namespace nds
