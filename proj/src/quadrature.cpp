#include "nds/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nds {

namespace {

// Newton iteration on P_n with the Chebyshev-like initial guess.
GaussLegendre compute_gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    GaussLegendre gl;
    gl.nodes.resize(order);
    gl.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        gl.nodes[i] = -x;
        gl.nodes[order - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        gl.weights[i] = w;
        gl.weights[order - 1 - i] = w;
    }
    return gl;
}

} // namespace

const GaussLegendre& gauss_legendre(int order) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               int panels, int order) {
    const auto& gl = gauss_legendre(order);
    cplx total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double scale = 0.5 * h;
        for (int i = 0; i < order; ++i)
            total += gl.weights[i] * scale * f(mid + scale * gl.nodes[i]);
    }
    return total;
}

Mat integrate_matrix(const std::function<Mat(double)>& f, double a, double b,
                     int panels, int order) {
    const auto& gl = gauss_legendre(order);
    const double h = (b - a) / panels;
    Mat total;
    bool first = true;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        const double scale = 0.5 * h;
        for (int i = 0; i < order; ++i) {
            Mat term = f(mid + scale * gl.nodes[i]) * (gl.weights[i] * scale);
            if (first) {
                total = term;
                first = false;
            } else {
                total += term;
            }
        }
    }
    return total;
}

} // namespace nds
