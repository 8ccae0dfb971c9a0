#include "nds/rng.hpp"

#include <cmath>

namespace nds {

// splitmix64 step
std::uint64_t ComplexGaussian::next_raw() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double ComplexGaussian::uniform() {
    // 53 random bits into (0,1); never exactly 0
    return (static_cast<double>(next_raw() >> 11) + 0.5) * 0x1.0p-53;
}

cplx ComplexGaussian::operator()() {
    // Box-Muller; the pair becomes one complex normal (independent re/im)
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return cplx(r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2));
}

} // namespace nds
