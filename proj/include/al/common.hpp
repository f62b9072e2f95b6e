#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace al {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Deterministic splitmix64 generator. Every random draw in the project goes
// through this class so results are reproducible across platforms and
// standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller.
    double normal();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Combines two seeds into one (e.g. run seed + round index).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace al
