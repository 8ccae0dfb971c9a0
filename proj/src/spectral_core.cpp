#include "nds/spectral_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nds {

double arg_principal(cplx z) {
    double a = std::arg(z);
    if (a <= -kPi) a = kPi; // -pi comes from a negative-zero imaginary part
    return a;
}

cplx reference_grid(const std::vector<cplx>& mu, int m, long k) {
    if (m < 0 || m >= static_cast<int>(mu.size()))
        throw input_error("reference_grid: channel index out of range");
    const cplx mum = mu[static_cast<std::size_t>(m)];
    if (mum == cplx(0.0, 0.0))
        throw input_error("reference_grid: mu must be nonzero");
    return cplx(std::log(std::abs(mum)),
                arg_principal(mum) + kTwoPi * static_cast<double>(k));
}

ReferenceSpectrum::ReferenceSpectrum(std::vector<cplx> mu) : mu_(std::move(mu)) {
    if (mu_.empty()) throw input_error("ReferenceSpectrum: empty eigenvalue list", "mu");
    log_abs_.reserve(mu_.size());
    arg_.reserve(mu_.size());
    for (std::size_t m = 0; m < mu_.size(); ++m) {
        if (mu_[m] == cplx(0.0, 0.0))
            throw input_error("ReferenceSpectrum: mu[" + std::to_string(m) + "] is zero", "mu");
        for (std::size_t m2 = 0; m2 < m; ++m2)
            if (mu_[m] == mu_[m2])
                throw input_error("ReferenceSpectrum: mu[" + std::to_string(m) + "] duplicates mu[" +
                                      std::to_string(m2) + "]",
                                  "mu");
        log_abs_.push_back(std::log(std::abs(mu_[m])));
        arg_.push_back(arg_principal(mu_[m]));
    }
}

cplx ReferenceSpectrum::lambda_tilde(int m, long k) const {
    const auto mm = static_cast<std::size_t>(m);
    return cplx(log_abs_.at(mm), arg_[mm] + kTwoPi * static_cast<double>(k));
}

cplx ReferenceSpectrum::beta_tilde(int m, long k) const {
    const cplx lt = lambda_tilde(m, k);
    return lt == cplx(0.0, 0.0) ? cplx(1.0, 0.0) : lt;
}

bool ReferenceSpectrum::grid_index_of(cplx lambda, int& m_out, long& k_out) const {
    for (int m = 0; m < n(); ++m) {
        const auto mm = static_cast<std::size_t>(m);
        if (lambda.real() != log_abs_[mm]) continue;
        const double kf = (lambda.imag() - arg_[mm]) / kTwoPi;
        const long k = std::lround(kf);
        if (lambda == lambda_tilde(m, k)) {
            m_out = m;
            k_out = k;
            return true;
        }
    }
    return false;
}

EigenFrame biorthogonal_frame(const Mat& Z) {
    if (Z.rows() != Z.cols() || Z.rows() == 0)
        throw input_error("biorthogonal_frame: Z must be square and nonempty", "Z");
    Eigen::JacobiSVD<Mat> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(Z.rows() - 1);
    if (!(smax > 0.0) || smin / smax < kFrameRankTol)
        throw conditioning_error("biorthogonal_frame: Z is numerically rank deficient",
                                 smax > 0.0 ? smax / smin : std::numeric_limits<double>::infinity());
    EigenFrame frame;
    frame.Z = Z;
    // Z^* Y = I  =>  Y = (Z^*)^{-1}
    frame.Y = Z.adjoint().partialPivLu().solve(Mat::Identity(Z.rows(), Z.cols()));
    frame.sigma_min = smin;
    frame.sigma_max = smax;
    return frame;
}

Mat minus_one_matrix(const Mat& Z, const std::vector<cplx>& mu) {
    if (static_cast<int>(mu.size()) != Z.cols())
        throw input_error("minus_one_matrix: mu size does not match Z", "mu");
    ReferenceSpectrum check(mu); // validates distinct nonzero
    EigenFrame frame = biorthogonal_frame(Z);
    Vec diag(Z.cols());
    for (int m = 0; m < Z.cols(); ++m) diag(m) = mu[static_cast<std::size_t>(m)];
    return frame.Y * diag.asDiagonal() * Z.adjoint();
}

SpectralTarget::SpectralTarget(long window, std::vector<std::vector<cplx>> lambda,
                               std::vector<std::vector<Vec>> d,
                               std::optional<FinitePart> finite_part)
    : window_(window), lambda_(std::move(lambda)), d_(std::move(d)),
      finite_part_(std::move(finite_part)) {
    if (window_ < 0) throw input_error("SpectralTarget: window must be >= 0", "target.window");
    const std::size_t width = static_cast<std::size_t>(2 * window_ + 1);
    if (lambda_.empty() || lambda_.size() != d_.size())
        throw input_error("SpectralTarget: lambda/d table shape mismatch", "target");
    for (std::size_t m = 0; m < lambda_.size(); ++m) {
        if (lambda_[m].size() != width || d_[m].size() != width)
            throw input_error("SpectralTarget: table row has wrong width", "target");
        for (const Vec& v : d_[m])
            if (v.size() != static_cast<Eigen::Index>(lambda_.size()))
                throw input_error("SpectralTarget: d vector has wrong dimension", "target.d");
    }
}

SpectralTarget SpectralTarget::reference(const ReferenceSpectrum& ref, const EigenFrame& frame,
                                         long window) {
    std::vector<std::vector<cplx>> lambda(static_cast<std::size_t>(ref.n()));
    std::vector<std::vector<Vec>> d(static_cast<std::size_t>(ref.n()));
    for (int m = 0; m < ref.n(); ++m) {
        for (long k = -window; k <= window; ++k) {
            lambda[static_cast<std::size_t>(m)].push_back(ref.lambda_tilde(m, k));
            d[static_cast<std::size_t>(m)].push_back(frame.z(m));
        }
    }
    return SpectralTarget(window, std::move(lambda), std::move(d));
}

cplx SpectralTarget::lambda(const ReferenceSpectrum& ref, int m, long k) const {
    if (in_window(k)) return lambda_raw(m, k);
    return ref.lambda_tilde(m, k);
}

Vec SpectralTarget::d(const EigenFrame& frame, int m, long k) const {
    if (in_window(k)) return d_raw(m, k);
    return frame.z(m);
}

cplx SpectralTarget::lambda_raw(int m, long k) const {
    return lambda_.at(static_cast<std::size_t>(m)).at(static_cast<std::size_t>(k + window_));
}

const Vec& SpectralTarget::d_raw(int m, long k) const {
    return d_.at(static_cast<std::size_t>(m)).at(static_cast<std::size_t>(k + window_));
}

void SpectralTarget::set_d_raw(int m, long k, Vec v) {
    d_.at(static_cast<std::size_t>(m)).at(static_cast<std::size_t>(k + window_)) = std::move(v);
}

SpectralTarget SpectralTarget::without_finite_part() const {
    return SpectralTarget(window_, lambda_, d_);
}

SpectralTarget SpectralTarget::with_finite_part(FinitePart fp) const {
    return SpectralTarget(window_, lambda_, d_, std::move(fp));
}

SpectralTarget SpectralTarget::with_d_table(std::vector<std::vector<Vec>> d) const {
    return SpectralTarget(window_, lambda_, std::move(d), finite_part_);
}

void SpectralTarget::validate(const ReferenceSpectrum& ref, const EigenFrame& frame) const {
    if (n() != ref.n() || n() != frame.n())
        throw input_error("SpectralTarget: channel count mismatch", "target");

    // Pairwise distinct listed lambdas (exact comparison).
    std::vector<std::pair<cplx, std::pair<int, long>>> listed;
    for (int m = 0; m < n(); ++m)
        for (long k = -window_; k <= window_; ++k)
            listed.push_back({lambda_raw(m, k), {m, k}});
    for (std::size_t a = 0; a < listed.size(); ++a)
        for (std::size_t b = a + 1; b < listed.size(); ++b)
            if (listed[a].first == listed[b].first) {
                std::ostringstream os;
                os << "SpectralTarget: duplicate target lambda at (m=" << listed[a].second.first
                   << ", k=" << listed[a].second.second << ") and (m=" << listed[b].second.first
                   << ", k=" << listed[b].second.second << ")";
                throw input_error(os.str(), "target.lambda");
            }

    // Indexing rule: a target on the reference grid must carry that grid
    // point's own indices.
    for (int m0 = 0; m0 < n(); ++m0)
        for (long k0 = -window_; k0 <= window_; ++k0) {
            int m = 0;
            long k = 0;
            if (ref.grid_index_of(lambda_raw(m0, k0), m, k) && (m != m0 || k != k0)) {
                std::ostringstream os;
                os << "SpectralTarget: lambda(m=" << m0 << ", k=" << k0
                   << ") coincides with lambda_tilde(m=" << m << ", k=" << k
                   << ") but the indices differ";
                throw input_error(os.str(), "target.lambda");
            }
        }

    for (int m = 0; m < n(); ++m)
        for (long k = -window_; k <= window_; ++k)
            if (d_raw(m, k).norm() == 0.0)
                throw input_error("SpectralTarget: zero degenerating vector at (m=" +
                                      std::to_string(m) + ", k=" + std::to_string(k) + ")",
                                  "target.d");

    if (finite_part_) {
        const auto& fp = *finite_part_;
        if (fp.lambda0.size() != fp.d0.size() || fp.lambda0.empty())
            throw input_error("SpectralTarget: finite part shape mismatch", "target.finite_part");
        for (std::size_t a = 0; a < fp.lambda0.size(); ++a) {
            for (std::size_t b = a + 1; b < fp.lambda0.size(); ++b)
                if (fp.lambda0[a] == fp.lambda0[b])
                    throw input_error("SpectralTarget: duplicate finite-part lambda",
                                      "target.finite_part");
            for (const auto& entry : listed)
                if (fp.lambda0[a] == entry.first)
                    throw input_error("SpectralTarget: finite-part lambda collides with a target lambda",
                                      "target.finite_part");
            int m = 0;
            long k = 0;
            if (ref.grid_index_of(fp.lambda0[a], m, k))
                throw input_error("SpectralTarget: finite-part lambda lies on the reference grid",
                                  "target.finite_part");
            if (fp.d0[a].size() != n())
                throw input_error("SpectralTarget: finite-part vector has wrong dimension",
                                  "target.finite_part");
        }
        Mat D0(n(), static_cast<int>(fp.d0.size()));
        for (std::size_t j = 0; j < fp.d0.size(); ++j) D0.col(static_cast<int>(j)) = fp.d0[j];
        Eigen::JacobiSVD<Mat> svd(D0);
        const double smax = svd.singularValues()(0);
        const double smin = svd.singularValues()(svd.singularValues().size() - 1);
        if (!(smax > 0.0) || smin / smax < kFrameRankTol)
            throw input_error("SpectralTarget: finite-part vectors are linearly dependent",
                              "target.finite_part");
    }
}

void SpectralTarget::require_assignable(const ReferenceSpectrum& ref) {
    for (int m = 0; m < ref.n(); ++m)
        if (ref.mu(m) == cplx(1.0, 0.0))
            throw input_error("assignment requires mu[" + std::to_string(m) +
                                  "] != 1 (zero grid point not solvable)",
                              "mu");
}

AlphaTable::AlphaTable(int n, long window) : n_(n), window_(window) {
    data_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
                     static_cast<std::size_t>(2 * window + 1),
                 cplx(0.0, 0.0));
}

cplx AlphaTable::alpha(int m, int m0, long k0) const {
    if (k0 < -window_ || k0 > window_) return m == m0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    const std::size_t width = static_cast<std::size_t>(2 * window_ + 1);
    return data_[(static_cast<std::size_t>(m) * static_cast<std::size_t>(n_) +
                  static_cast<std::size_t>(m0)) *
                     width +
                 static_cast<std::size_t>(k0 + window_)];
}

cplx& AlphaTable::at(int m, int m0, long k0) {
    if (k0 < -window_ || k0 > window_)
        throw input_error("AlphaTable: index outside window");
    const std::size_t width = static_cast<std::size_t>(2 * window_ + 1);
    return data_[(static_cast<std::size_t>(m) * static_cast<std::size_t>(n_) +
                  static_cast<std::size_t>(m0)) *
                     width +
                 static_cast<std::size_t>(k0 + window_)];
}

AlphaTable alpha_decompose(const SpectralTarget& target, const EigenFrame& frame) {
    const int n = target.n();
    AlphaTable table(n, target.window());
    // d^* = sum_m (d^* y_m) z_m^*  because Y Z^* = I
    for (int m0 = 0; m0 < n; ++m0)
        for (long k0 = -target.window(); k0 <= target.window(); ++k0) {
            const Vec& d = target.d_raw(m0, k0);
            for (int m = 0; m < n; ++m) table.at(m, m0, k0) = d.dot(frame.y(m));
        }
    return table;
}

SpectralTarget apply_alpha(const SpectralTarget& target, const AlphaTable& alpha,
                           const EigenFrame& frame) {
    const int n = target.n();
    std::vector<std::vector<Vec>> d(static_cast<std::size_t>(n));
    for (int m0 = 0; m0 < n; ++m0)
        for (long k0 = -target.window(); k0 <= target.window(); ++k0) {
            // d = sum_m conj(alpha_m) z_m  (from d^* = sum alpha_m z_m^*)
            Vec v = Vec::Zero(n);
            for (int m = 0; m < n; ++m)
                v += std::conj(alpha.alpha(m, m0, k0)) * frame.z(m);
            d[static_cast<std::size_t>(m0)].push_back(std::move(v));
        }
    return target.with_d_table(std::move(d));
}

ClosenessReport closeness_report(const SpectralTarget& target, const ReferenceSpectrum& ref,
                                 const EigenFrame& frame, double warn_threshold) {
    const int n = target.n();
    ClosenessReport rep;
    rep.warn_threshold = warn_threshold;
    rep.sum_lambda.assign(static_cast<std::size_t>(n), 0.0);
    rep.sum_vec.assign(static_cast<std::size_t>(n), 0.0);
    rep.sum_alpha_diag.assign(static_cast<std::size_t>(n), 0.0);
    rep.sum_alpha_off.assign(static_cast<std::size_t>(n),
                             std::vector<double>(static_cast<std::size_t>(n), 0.0));
    const AlphaTable alpha = alpha_decompose(target, frame);
    for (int m = 0; m < n; ++m) {
        for (long k = -target.window(); k <= target.window(); ++k) {
            rep.sum_lambda[static_cast<std::size_t>(m)] +=
                std::norm(target.lambda_raw(m, k) - ref.lambda_tilde(m, k));
            rep.sum_vec[static_cast<std::size_t>(m)] +=
                (target.d_raw(m, k) - frame.z(m)).squaredNorm();
            rep.sum_alpha_diag[static_cast<std::size_t>(m)] +=
                std::norm(alpha.alpha(m, m, k) - cplx(1.0, 0.0));
            for (int m2 = 0; m2 < n; ++m2)
                if (m2 != m)
                    rep.sum_alpha_off[static_cast<std::size_t>(m2)][static_cast<std::size_t>(m)] +=
                        std::norm(alpha.alpha(m2, m, k));
        }
        if (rep.sum_vec[static_cast<std::size_t>(m)] > warn_threshold)
            rep.warn_channels.push_back(m);
    }
    return rep;
}

} // namespace nds
