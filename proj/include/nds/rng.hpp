#pragma once

#include <cstdint>

#include "nds/types.hpp"

namespace nds {

// Deterministic stream of complex standard normals.  splitmix64 plus a
// hand-rolled Box-Muller, so the stream does not depend on the standard
// library's distribution implementations.
class ComplexGaussian {
public:
    explicit ComplexGaussian(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    double uniform(); // in (0, 1)
    cplx operator()();

private:
    std::uint64_t next_raw();
    std::uint64_t state_;
};

} // namespace nds
