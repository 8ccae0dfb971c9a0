// Shared deterministic fixtures for tests and the acceptance suite.
#pragma once

#include <cmath>

#include "nds/spectral_core.hpp"

namespace fixtures {

using nds::cplx;
using nds::Mat;
using nds::Vec;

inline nds::ReferenceSpectrum two_channel_ref() {
    return nds::ReferenceSpectrum({cplx(2.0, 0.0), cplx(-3.0, 0.0)});
}

inline nds::EigenFrame identity_frame(int n = 2) {
    return nds::biorthogonal_frame(Mat::Identity(n, n));
}

// n = 2, mu = (2, -3), window N_t: lambda shifted by 0.2/(1+k^2) * (1+i)/2,
// d mixing 0.05/(1+|k|) of the other channel's row.
inline nds::SpectralTarget perturbed_target(const nds::ReferenceSpectrum& ref,
                                            const nds::EigenFrame& frame, long window) {
    std::vector<std::vector<cplx>> lambda(2);
    std::vector<std::vector<Vec>> d(2);
    for (int m = 0; m < 2; ++m)
        for (long k = -window; k <= window; ++k) {
            const double kk = static_cast<double>(k);
            lambda[static_cast<std::size_t>(m)].push_back(
                ref.lambda_tilde(m, k) + 0.2 / (1.0 + kk * kk) * cplx(0.5, 0.5));
            d[static_cast<std::size_t>(m)].push_back(
                Vec(frame.z(m) + 0.05 / (1.0 + std::abs(kk)) * frame.z(1 - m)));
        }
    return nds::SpectralTarget(window, std::move(lambda), std::move(d));
}

inline nds::FinitePart canonical_finite_part() {
    nds::FinitePart fp;
    fp.lambda0 = {cplx(-1.0, 0.0), cplx(-2.0, 0.0)};
    Vec e1 = Vec::Zero(2), e2 = Vec::Zero(2);
    e1(0) = 1.0;
    e2(1) = 1.0;
    fp.d0 = {e1, e2};
    return fp;
}

} // namespace fixtures
