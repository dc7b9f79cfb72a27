#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace splatgaze {

// Bad input data: unreadable files, schema violations, invariant breaks.
// The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Failure while computing on valid input. CLI exit code 2.
class ComputeError : public std::runtime_error {
public:
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

// Pairwise (cascade) summation. Result depends only on element order, never
// on how callers partition surrounding work, and keeps rounding error at
// O(log n) for image-sized arrays.
double pairwise_sum(std::span<const double> values);

// Uniform double in [0, 1) built from the top 53 bits of the generator
// output. std::uniform_real_distribution is implementation-defined, which
// would break byte-identical reports across toolchains.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Worker count for parallel sections: min(hardware, SPLATGAZE_THREADS).
int worker_count();

// Runs fn(i) for i in [0, n). Work items must write disjoint state; the
// schedule is dynamic, so outputs must not depend on execution order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace splatgaze
