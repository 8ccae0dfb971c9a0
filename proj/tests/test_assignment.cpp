#include <doctest.h>

#include <cmath>

#include "nds/assignment.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace nds;

namespace {

// single-channel reference and frame helpers
ReferenceSpectrum scalar_ref() { return ReferenceSpectrum({cplx(2.0, 0.0)}); }

SpectralTarget scalar_shifted_target(const ReferenceSpectrum& ref, const EigenFrame& frame,
                                     long window, cplx shift) {
    std::vector<std::vector<cplx>> lambda(1);
    std::vector<std::vector<Vec>> d(1);
    for (long k = -window; k <= window; ++k) {
        lambda[0].push_back(ref.lambda_tilde(0, k) + (k == 0 ? shift : cplx(0, 0)));
        d[0].push_back(frame.z(0));
    }
    return SpectralTarget(window, std::move(lambda), std::move(d));
}

} // namespace

TEST_CASE("s_entry") {
    ReferenceSpectrum ref = scalar_ref();
    EigenFrame frame = fixtures::identity_frame(1);
    SpectralTarget t = scalar_shifted_target(ref, frame, 1, cplx(0.1, 0.0));

    // diagonal shifted entry: 1/(lt - (lt + 0.1)) = -10
    CHECK(std::abs(s_entry(ref, t, 0, 0, 0, 0) - cplx(-10.0, 0.0)) <= 1e-12);
    // off-index entry: 1/(lt(1) - lt(0) - 0.1) = 1/(2 pi i - 0.1)
    CHECK(std::abs(s_entry(ref, t, 0, 0, 1, 0) - 1.0 / (cplx(0, kTwoPi) - 0.1)) <= 1e-14);

    // forbidden coincidence: target at k0=0 equal to the k=1 grid point
    std::vector<std::vector<cplx>> lambda = {{ref.lambda_tilde(0, -1), ref.lambda_tilde(0, 1),
                                              ref.lambda_tilde(0, 1) + 1.0}};
    std::vector<std::vector<Vec>> d = {{frame.z(0), frame.z(0), frame.z(0)}};
    SpectralTarget bad(1, std::move(lambda), std::move(d));
    CHECK_THROWS_AS(s_entry(ref, bad, 0, 0, 1, 0), input_error);
}

TEST_CASE("assemble_D structure") {
    SUBCASE("identity target, n = 1: D is the identity") {
        ReferenceSpectrum ref = scalar_ref();
        EigenFrame frame = fixtures::identity_frame(1);
        SpectralTarget t = SpectralTarget::reference(ref, frame, 1);
        AlphaTable alpha = alpha_decompose(t, frame);
        TruncatedOperator op = assemble_D(0, ref, t, alpha, 3);
        CHECK((op.matrix - Mat::Identity(7, 7)).norm() <= 1e-14);
    }

    SUBCASE("identity target, n = 2: block diagonal with kernel off-blocks") {
        // The m-th diagonal block is the identity (coincidence rows); the
        // other diagonal-in-(m0=j) blocks are the raw S kernels.
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        EigenFrame frame = fixtures::identity_frame();
        SpectralTarget t = SpectralTarget::reference(ref, frame, 1);
        AlphaTable alpha = alpha_decompose(t, frame);
        const long ns = 2;
        TruncatedOperator op = assemble_D(0, ref, t, alpha, ns);
        const long w = op.width();
        for (int m0 = 0; m0 < 2; ++m0)
            for (int j = 0; j < 2; ++j) {
                const Mat block = op.matrix.block(m0 * w, j * w, w, w);
                if (m0 != j) {
                    CHECK(block.norm() == 0.0); // alpha off-diagonals vanish
                } else if (m0 == 0) {
                    CHECK((block - Mat::Identity(w, w)).norm() <= 1e-14);
                } else {
                    for (long k0 = -ns; k0 <= ns; ++k0)
                        for (long k = -ns; k <= ns; ++k) {
                            const cplx want =
                                1.0 / (ref.lambda_tilde(0, k) - ref.lambda_tilde(1, k0));
                            CHECK(std::abs(block(k0 + ns, k + ns) - want) <= 1e-14);
                        }
                }
            }
    }

    SUBCASE("hand-assembled 3x3 for a single shift") {
        ReferenceSpectrum ref = scalar_ref();
        EigenFrame frame = fixtures::identity_frame(1);
        const cplx shift(0.1, 0.0);
        SpectralTarget t = scalar_shifted_target(ref, frame, 1, shift);
        AlphaTable alpha = alpha_decompose(t, frame);
        TruncatedOperator op = assemble_D(0, ref, t, alpha, 1);
        Mat want(3, 3);
        for (long k0 = -1; k0 <= 1; ++k0) {
            const cplx lam = ref.lambda_tilde(0, k0) + (k0 == 0 ? shift : cplx(0, 0));
            for (long k = -1; k <= 1; ++k) {
                if (k0 == 0) {
                    want(k0 + 1, k + 1) = -shift / (ref.lambda_tilde(0, k) - lam);
                } else {
                    want(k0 + 1, k + 1) = (k == k0) ? cplx(1, 0) : cplx(0, 0);
                }
            }
        }
        CHECK((op.matrix - want).norm() <= 1e-13);
        // invariant: the Lambda-scaled diagonal entries are exactly 1
        CHECK(std::abs(op.matrix(1, 1) - cplx(1, 0)) <= 1e-15);
    }

    SUBCASE("entrywise block reconstruction on a perturbed target") {
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        EigenFrame frame = biorthogonal_frame(oracle::random_invertible(2, 4242));
        SpectralTarget t = fixtures::perturbed_target(ref, frame, 2);
        AlphaTable alpha = alpha_decompose(t, frame);
        const long ns = 4;
        for (int m = 0; m < 2; ++m) {
            TruncatedOperator op = assemble_D(m, ref, t, alpha, ns);
            for (int m0 = 0; m0 < 2; ++m0)
                for (int j = 0; j < 2; ++j)
                    for (long k0 = -ns; k0 <= ns; ++k0)
                        for (long k = -ns; k <= ns; ++k) {
                            const cplx lam = t.lambda(ref, m0, k0);
                            cplx want = alpha.alpha(j, m0, k0);
                            if (m0 == m) {
                                const cplx lt = ref.lambda_tilde(m, k0);
                                if (lam == lt)
                                    want *= (k == k0) ? 1.0 : 0.0;
                                else
                                    want *= (lt - lam) / (ref.lambda_tilde(m, k) - lam);
                            } else {
                                want /= (ref.lambda_tilde(m, k) - lam);
                            }
                            CHECK(std::abs(op.matrix(op.row(m0, k0), op.col(j, k)) - want) <=
                                  1e-13);
                        }
        }
    }
}

TEST_CASE("solve_assignment") {
    SUBCASE("identity target gives exactly zero coefficients") {
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        EigenFrame frame = fixtures::identity_frame();
        SpectralTarget t = SpectralTarget::reference(ref, frame, 2);
        AssignmentSolution sol = solve_assignment(ref, frame, t, 6);
        for (int m = 0; m < 2; ++m)
            for (int j = 0; j < 2; ++j)
                for (long k = -6; k <= 6; ++k) CHECK(std::abs(sol.p(k, m, j)) == 0.0);
        CHECK(spectral_equation_residual(sol, ref, frame, t) <= 1e-12);
    }

    SUBCASE("scalar shifted target satisfies the spectral equation") {
        ReferenceSpectrum ref = scalar_ref();
        EigenFrame frame = fixtures::identity_frame(1);
        SpectralTarget t = scalar_shifted_target(ref, frame, 1, cplx(0.1, 0.0));
        AssignmentSolution sol = solve_assignment(ref, frame, t, 8);
        CHECK(sol.residual[0] <= 1e-10);
        CHECK(spectral_equation_residual(sol, ref, frame, t) <= 1e-10);

        // truncation stability: central coefficients barely move at ns = 16
        AssignmentSolution wide = solve_assignment(ref, frame, t, 16);
        for (long k = -4; k <= 4; ++k)
            CHECK(std::abs(sol.p(k, 0, 0) - wide.p(k, 0, 0)) <= 1e-6);
    }

    SUBCASE("perturbed two-channel fixture") {
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        EigenFrame frame = fixtures::identity_frame();
        SpectralTarget t = fixtures::perturbed_target(ref, frame, 3);
        AssignmentSolution sol = solve_assignment(ref, frame, t, 12);
        CHECK(sol.condition[0] < 1e3);
        CHECK(sol.condition[1] < 1e3);
        CHECK(sol.residual[0] <= 1e-10);
        CHECK(sol.residual[1] <= 1e-10);
        CHECK(spectral_equation_residual(sol, ref, frame, t) <= 1e-9);
    }

    SUBCASE("window padding rule enforced") {
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        EigenFrame frame = fixtures::identity_frame();
        SpectralTarget t = fixtures::perturbed_target(ref, frame, 3);
        CHECK_THROWS_AS(solve_assignment(ref, frame, t, 5), input_error);
    }
}

TEST_CASE("invertibility_diagnostics") {
    ReferenceSpectrum ref2({cplx(2, 0), cplx(3, 0)});
    EigenFrame frame = fixtures::identity_frame();

    SUBCASE("identity target: Lambda S block is the identity") {
        SpectralTarget t = SpectralTarget::reference(ref2, frame, 2);
        InvertibilityReport rep = invertibility_diagnostics(0, ref2, t, 4);
        CHECK(rep.sigma_min[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.sigma_max[0] == doctest::Approx(1.0).epsilon(1e-12));
        // eps for (m=0, m0=1): mu_0 e^{-lambda_tilde(1,k)} - 1 = 2/3 - 1 = -1/3
        for (const cplx& e : rep.eps[1])
            CHECK(std::abs(e - cplx(-1.0 / 3.0, 0.0)) <= 1e-13);
        CHECK(rep.small_eps.empty());
    }

    SUBCASE("single shift: q is the difference quotient of exp") {
        const cplx delta(0.1, 0.0);
        std::vector<std::vector<cplx>> lambda(2);
        std::vector<std::vector<Vec>> d(2);
        for (int m = 0; m < 2; ++m)
            for (long k = -2; k <= 2; ++k) {
                lambda[static_cast<std::size_t>(m)].push_back(
                    ref2.lambda_tilde(m, k) + ((m == 0 && k == 0) ? delta : cplx(0, 0)));
                d[static_cast<std::size_t>(m)].push_back(frame.z(m));
            }
        SpectralTarget t(2, std::move(lambda), std::move(d));
        InvertibilityReport rep = invertibility_diagnostics(0, ref2, t, 2);
        // q at the shifted index: (e^{delta} - 1)/delta
        const cplx want = (std::exp(delta) - 1.0) / delta;
        CHECK(std::abs(rep.q[2] - want) <= 1e-12);
        // coincident rows carry q = 1 exactly
        CHECK(rep.q[0] == cplx(1, 0));
        CHECK(rep.q[4] == cplx(1, 0));
    }

    SUBCASE("sigma_min stability between truncation sizes") {
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        SpectralTarget t = fixtures::perturbed_target(ref, frame, 4);
        for (int m = 0; m < 2; ++m) {
            InvertibilityReport lo = invertibility_diagnostics(m, ref, t, 16);
            InvertibilityReport hi = invertibility_diagnostics(m, ref, t, 64);
            for (int m0 = 0; m0 < 2; ++m0) {
                const double a = lo.sigma_min[static_cast<std::size_t>(m0)];
                const double b = hi.sigma_min[static_cast<std::size_t>(m0)];
                CHECK(std::max(a, b) / std::min(a, b) <= 2.0);
            }
        }
    }

    SUBCASE("continuity in the target sequence") {
        ReferenceSpectrum ref = fixtures::two_channel_ref();
        SpectralTarget base = fixtures::perturbed_target(ref, frame, 3);
        const long ns = 8;
        auto lambda_scaled_block = [&](const SpectralTarget& t) {
            Mat block(2 * ns + 1, 2 * ns + 1);
            for (long k0 = -ns; k0 <= ns; ++k0) {
                const cplx lam = t.lambda(ref, 0, k0);
                const cplx lt = ref.lambda_tilde(0, k0);
                for (long k = -ns; k <= ns; ++k)
                    block(k0 + ns, k + ns) =
                        (lam == lt) ? cplx(k == k0 ? 1 : 0, 0)
                                    : (lt - lam) / (ref.lambda_tilde(0, k) - lam);
            }
            return block;
        };
        const Mat m0 = lambda_scaled_block(base);
        for (double eta : {1e-3, 1e-4}) {
            SpectralTarget moved = base;
            std::vector<std::vector<cplx>> lam(2);
            std::vector<std::vector<Vec>> d(2);
            for (int m = 0; m < 2; ++m)
                for (long k = -3; k <= 3; ++k) {
                    lam[static_cast<std::size_t>(m)].push_back(
                        base.lambda_raw(m, k) + ((m == 0 && k == 1) ? cplx(eta, 0) : cplx(0, 0)));
                    d[static_cast<std::size_t>(m)].push_back(base.d_raw(m, k));
                }
            SpectralTarget shifted(3, std::move(lam), std::move(d));
            const Mat m1 = lambda_scaled_block(shifted);
            Eigen::JacobiSVD<Mat> svd(m1 - m0);
            CHECK(svd.singularValues()(0) <= 10.0 * eta);
        }
    }
}

TEST_CASE("lemma2_adjust") {
    ReferenceSpectrum ref = fixtures::two_channel_ref();
    EigenFrame frame = fixtures::identity_frame();

    SUBCASE("well-conditioned input is returned unchanged") {
        SpectralTarget t = fixtures::perturbed_target(ref, frame, 2);
        AlphaTable alpha = alpha_decompose(t, frame);
        PerturbationOutcome out = lemma2_adjust(alpha, t, ref, 1e-2, 7, 2, 8);
        CHECK(out.retries == 0);
        CHECK(out.delta_norm == 0.0);
    }

    SUBCASE("engineered singular alpha is repaired within budget") {
        SpectralTarget t = SpectralTarget::reference(ref, frame, 2);
        AlphaTable alpha = alpha_decompose(t, frame);
        // zero the whole k0 = 0 row of channel 0's coincidence block: the
        // unit row of every D_m vanishes
        for (int j = 0; j < 2; ++j) alpha.at(j, 0, 0) = cplx(0, 0);
        TruncatedOperator broken = assemble_D(0, ref, t, alpha, 6);
        Eigen::JacobiSVD<Mat> svd(broken.matrix);
        CHECK(svd.singularValues()(svd.singularValues().size() - 1) <= 1e-14);

        PerturbationOutcome out = lemma2_adjust(alpha, t, ref, 1e-2, 99, 2, 6);
        CHECK(out.delta_norm < 1e-2);
        CHECK(out.retries >= 1);
        // perturbation support stays inside |k0| <= 2
        for (int m = 0; m < 2; ++m)
            for (int m0 = 0; m0 < 2; ++m0) {
                CHECK(out.alpha.alpha(m, m0, 3) == alpha.alpha(m, m0, 3));
                CHECK(out.alpha.alpha(m, m0, -6) == alpha.alpha(m, m0, -6));
            }
        // all D_m now pass the acceptance gate
        for (int m = 0; m < 2; ++m) {
            TruncatedOperator fixed = assemble_D(m, ref, t, out.alpha, 6);
            Eigen::JacobiSVD<Mat> s2(fixed.matrix);
            const auto& sv = s2.singularValues();
            CHECK(sv(0) / sv(sv.size() - 1) <= kRepairConditionGate);
        }
    }

    SUBCASE("no budget means no repair") {
        SpectralTarget t = SpectralTarget::reference(ref, frame, 2);
        AlphaTable alpha = alpha_decompose(t, frame);
        for (int j = 0; j < 2; ++j) alpha.at(j, 0, 0) = cplx(0, 0);
        CHECK_THROWS_AS(lemma2_adjust(alpha, t, ref, 0.0, 99, 2, 6), adjustment_failed);
    }

    SUBCASE("repair window may not exceed the target window") {
        SpectralTarget t = SpectralTarget::reference(ref, frame, 2);
        AlphaTable alpha = alpha_decompose(t, frame);
        CHECK_THROWS_AS(lemma2_adjust(alpha, t, ref, 1e-2, 99, 3, 6), input_error);
    }
}

TEST_CASE("finite_part_pretransform") {
    ReferenceSpectrum ref = fixtures::two_channel_ref();
    EigenFrame frame = fixtures::identity_frame();

    SUBCASE("canonical rows give a diagonal C") {
        SpectralTarget t = SpectralTarget::reference(ref, frame, 2)
                               .with_finite_part(fixtures::canonical_finite_part());
        FinitePartTransform pre = finite_part_pretransform(t, frame, ref);
        Mat want(2, 2);
        want << cplx(-1, 0), cplx(0, 0), cplx(0, 0), cplx(-2, 0);
        CHECK((pre.C - want).norm() <= 1e-13);
        CHECK_FALSE(pre.transformed.finite_part().has_value());
        // defining rows: d_j^0* C = lambda_j^0 d_j^0*
        const auto& fp = *t.finite_part();
        for (int j = 0; j < 2; ++j)
            CHECK((fp.d0[static_cast<std::size_t>(j)].adjoint() * pre.C -
                   fp.lambda0[static_cast<std::size_t>(j)] *
                       fp.d0[static_cast<std::size_t>(j)].adjoint())
                      .norm() <= 1e-12);
    }

    SUBCASE("row transform against a hand inverse") {
        // C = diag(-1,-2), d = e1, lambda = ln 2: the transformed row is
        // e1^T (I - C/ln2) = (1 + 1/ln2, 0), and mapping it back through
        // (I - C/lambda)^{-1} returns e1.
        SpectralTarget t = SpectralTarget::reference(ref, frame, 2)
                               .with_finite_part(fixtures::canonical_finite_part());
        FinitePartTransform pre = finite_part_pretransform(t, frame, ref);
        const cplx ln2 = std::log(2.0);
        const Vec f = pre.transformed.d_raw(0, 0);
        CHECK(std::abs(f(0) - (1.0 + 1.0 / ln2)) <= 1e-13);
        CHECK(std::abs(f(1)) <= 1e-14);
        const Vec back = finite_part_row_recover(pre.C, ln2, f);
        CHECK((back - frame.z(0)).norm() <= 1e-13);
    }

    SUBCASE("roundtrip through the row recovery on a perturbed table") {
        SpectralTarget t = fixtures::perturbed_target(ref, frame, 3)
                               .with_finite_part(fixtures::canonical_finite_part());
        FinitePartTransform pre = finite_part_pretransform(t, frame, ref);
        CHECK(pre.M_bound >= 2.0); // at least ||C||
        for (int m = 0; m < 2; ++m)
            for (long k = -3; k <= 3; ++k) {
                const Vec back = finite_part_row_recover(pre.C, t.lambda_raw(m, k),
                                                         pre.transformed.d_raw(m, k));
                CHECK((back - t.d_raw(m, k)).norm() <= 1e-12);
            }
    }

    SUBCASE("finite-part lambda equal to a target lambda is rejected") {
        SpectralTarget base = fixtures::perturbed_target(ref, frame, 2);
        FinitePart fp = fixtures::canonical_finite_part();
        fp.lambda0[0] = base.lambda_raw(0, 0);
        SpectralTarget t = base.with_finite_part(fp);
        CHECK_THROWS_AS(finite_part_pretransform(t, frame, ref), input_error);
    }
}

TEST_CASE("finite_part_posttransform") {
    ReferenceSpectrum ref = fixtures::two_channel_ref();

    SUBCASE("zero C is the identity transform") {
        SystemRealization sys = oracle::random_system(2, 61, 0.3, /*canonical=*/true);
        SystemRealization out = finite_part_posttransform(sys, Mat::Zero(2, 2));
        for (const cplx lambda : {cplx(0.4, 1.0), cplx(-0.3, -2.2)})
            CHECK((delta_eval(out, lambda) - delta_eval(sys, lambda)).norm() <= 1e-13);
    }

    SUBCASE("bare system with diagonal C factors exactly") {
        Mat a(2, 2);
        a << cplx(2, 0), cplx(0, 0), cplx(0, 0), cplx(3, 0);
        Mat C(2, 2);
        C << cplx(-1, 0), cplx(0, 0), cplx(0, 0), cplx(-2, 0);
        SystemRealization hat = SystemRealization::unperturbed(a);
        SystemRealization out = finite_part_posttransform(hat, C);
        CHECK_FALSE(out.canonical);
        // det Delta(-1) = 0 with left vector e1
        const Mat d = delta_eval(out, cplx(-1, 0));
        DegeneracyReport rep = degeneracy_of(d, cplx(-1, 0));
        CHECK(rep.sigma_min_ratio <= 1e-14);
        Vec e1 = Vec::Zero(2);
        e1(0) = 1.0;
        CHECK((e1.adjoint() * d).norm() <= 1e-13);
        // factorization identity at an arbitrary probe
        const cplx probe(0.9, 0.4);
        const Mat lhs = delta_eval(out, probe);
        const Mat rhs = (Mat::Identity(2, 2) - C / probe) * delta_eval(hat, probe);
        CHECK((lhs - rhs).norm() <= 1e-12);
    }

    SUBCASE("general canonical hat system keeps the factorization") {
        SystemRealization hat = oracle::random_system(2, 62, 0.25, /*canonical=*/true);
        const Mat C = oracle::random_matrix(2, 2, 63);
        SystemRealization out = finite_part_posttransform(hat, C);
        for (std::uint64_t i = 0; i < 10; ++i) {
            const cplx lambda = cplx(0.2, 0.1) + 1.5 * oracle::random_vector(1, 7000 + i)(0);
            const Mat lhs = delta_eval(out, lambda);
            const Mat rhs = (Mat::Identity(2, 2) - C / lambda) * delta_eval(hat, lambda);
            CHECK((lhs - rhs).norm() <= 1e-11 * std::max(1.0, lhs.norm()));
        }
        // Delta(0) = -∫A3 still holds on the composed system
        CHECK((delta_eval(out, cplx(0, 0)) + out.A3.integral()).norm() <= 1e-12);
    }

    SUBCASE("non-canonical input rejected") {
        SystemRealization bad = oracle::random_system(2, 64, 0.3, /*canonical=*/false);
        CHECK_THROWS_AS(finite_part_posttransform(bad, Mat::Identity(2, 2)), input_error);
    }
}
