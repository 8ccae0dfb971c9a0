#pragma once

#include <optional>
#include <vector>

#include "nds/errors.hpp"
#include "nds/types.hpp"

namespace nds {

// Principal argument normalized to (-pi, pi].
double arg_principal(cplx z);

// lambda_tilde(m, k) = ln|mu_m| + i(Arg mu_m + 2*pi*k) for a raw eigenvalue
// list.  Throws on mu_m == 0.
cplx reference_grid(const std::vector<cplx>& mu, int m, long k);

// Eigenvalues mu_m of A_{-1} and the logarithmic grid they induce.
// The grid lambda_tilde(m, .) is the unperturbed spectrum; beta_tilde
// substitutes 1 for the single possible zero grid point (mu_m == 1, k == 0).
class ReferenceSpectrum {
public:
    explicit ReferenceSpectrum(std::vector<cplx> mu);

    int n() const { return static_cast<int>(mu_.size()); }
    const std::vector<cplx>& mu() const { return mu_; }
    cplx mu(int m) const { return mu_.at(static_cast<std::size_t>(m)); }

    cplx lambda_tilde(int m, long k) const;
    cplx beta_tilde(int m, long k) const;

    // Exact membership test: true iff `lambda` is bitwise equal to some grid
    // point, reporting its indices.  Used by the target validation rule.
    bool grid_index_of(cplx lambda, int& m_out, long& k_out) const;

private:
    std::vector<cplx> mu_;
    std::vector<double> log_abs_;
    std::vector<double> arg_;
};

// Left eigen-rows z_m (columns of Z) and the biorthogonal columns y_m with
// Z^* Y = I.
struct EigenFrame {
    Mat Z;
    Mat Y;
    double sigma_min = 0.0;
    double sigma_max = 0.0;

    int n() const { return static_cast<int>(Z.cols()); }
    Vec z(int m) const { return Z.col(m); }
    Vec y(int m) const { return Y.col(m); }
};

// Y = (Z^*)^{-1}; throws conditioning_error when Z is numerically singular.
EigenFrame biorthogonal_frame(const Mat& Z);

// A_{-1} = Y diag(mu) Z^*, the unique matrix with z_m^* A_{-1} = mu_m z_m^*.
Mat minus_one_matrix(const Mat& Z, const std::vector<cplx>& mu);

struct FinitePart {
    std::vector<cplx> lambda0; // pairwise distinct, disjoint from the lambda table
    std::vector<Vec> d0;       // linearly independent
};

// Prescribed eigenvalues lambda(m, k) and left degenerating vectors d(m, k)
// on the window |k| <= N_t, with the tail convention lambda = lambda_tilde,
// d = z_m outside the window.  The tail makes the quadratic-closeness sums
// finite by construction.
class SpectralTarget {
public:
    SpectralTarget(long window,
                   std::vector<std::vector<cplx>> lambda,   // [m][k + window]
                   std::vector<std::vector<Vec>> d,         // [m][k + window]
                   std::optional<FinitePart> finite_part = std::nullopt);

    // Targets identical to the reference grid (d = z_m everywhere).
    static SpectralTarget reference(const ReferenceSpectrum& ref, const EigenFrame& frame,
                                    long window);

    long window() const { return window_; }
    int n() const { return static_cast<int>(lambda_.size()); }

    cplx lambda(const ReferenceSpectrum& ref, int m, long k) const;
    Vec d(const EigenFrame& frame, int m, long k) const;

    bool in_window(long k) const { return k >= -window_ && k <= window_; }
    cplx lambda_raw(int m, long k) const; // in-window only
    const Vec& d_raw(int m, long k) const;
    void set_d_raw(int m, long k, Vec v);

    const std::optional<FinitePart>& finite_part() const { return finite_part_; }
    SpectralTarget without_finite_part() const;
    SpectralTarget with_finite_part(FinitePart fp) const;
    SpectralTarget with_d_table(std::vector<std::vector<Vec>> d) const;

    // Enforces: pairwise distinct lambdas, the grid-coincidence indexing rule
    // (a target equal to a grid point must sit at that grid point's indices),
    // nonzero d vectors, and finite-part side conditions.
    void validate(const ReferenceSpectrum& ref, const EigenFrame& frame) const;

    // Additional gate for assignment workflows: every mu_m outside {0, 1}.
    static void require_assignable(const ReferenceSpectrum& ref);

private:
    long window_;
    std::vector<std::vector<cplx>> lambda_;
    std::vector<std::vector<Vec>> d_;
    std::optional<FinitePart> finite_part_;
};

// alpha(m, m0, k0): coordinates of d(m0, k0)^* in the row basis {z_m^*},
// i.e. d^* = sum_m alpha(m) z_m^*.  Tail entries are delta_{m,m0}.
class AlphaTable {
public:
    AlphaTable(int n, long window);

    long window() const { return window_; }
    int n() const { return n_; }

    cplx alpha(int m, int m0, long k0) const;
    cplx& at(int m, int m0, long k0); // in-window only

private:
    int n_;
    long window_;
    std::vector<cplx> data_;
};

// alpha(m, m0, k0) = d(m0,k0)^* y_m; exact deltas in the tail.
AlphaTable alpha_decompose(const SpectralTarget& target, const EigenFrame& frame);

// Rebuild the d table from an alpha table (d^* = sum alpha z^*); used after
// randomized repair to expose the adjusted targets.
SpectralTarget apply_alpha(const SpectralTarget& target, const AlphaTable& alpha,
                           const EigenFrame& frame);

// Finite window sums of the quadratic-closeness quantities.  The tail
// contributes zero by construction.
struct ClosenessReport {
    std::vector<double> sum_lambda;              // per channel
    std::vector<double> sum_vec;                 // per channel
    std::vector<std::vector<double>> sum_alpha_off; // [m][m0], m != m0
    std::vector<double> sum_alpha_diag;          // per channel, |alpha_mm - 1|^2
    std::vector<int> warn_channels;              // sum_vec above threshold
    double warn_threshold = kVecClosenessWarn;
};

ClosenessReport closeness_report(const SpectralTarget& target, const ReferenceSpectrum& ref,
                                 const EigenFrame& frame,
                                 double warn_threshold = kVecClosenessWarn);

} // namespace nds
