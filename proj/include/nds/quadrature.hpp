#pragma once

#include <functional>
#include <vector>

#include "nds/types.hpp"

namespace nds {

// Gauss-Legendre nodes/weights on [-1, 1]; cached per order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int order);

// ∫_a^b f(t) dt with a composite Gauss-Legendre rule (`panels` × `order`).
// The integrands here are entire, so a fixed rule converges fast.
cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               int panels = 8, int order = 16);

// Entrywise matrix version.
Mat integrate_matrix(const std::function<Mat(double)>& f, double a, double b,
                     int panels = 8, int order = 16);

} // namespace nds
