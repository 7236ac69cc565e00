#ifndef FASTTRACK_RNG_HPP
#define FASTTRACK_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace fasttrack {

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard, and all distributions below are derived
// from the raw 64-bit stream by explicit arithmetic, so a given seed yields
// the same values on every platform. (Stdlib distribution objects are not
// portable across implementations and are deliberately not used.)
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Standard normal via the Marsaglia polar method; the rejected-sample
    // pattern is part of the deterministic stream.
    double normal();

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // Knuth's product method; suitable for the small rates used here.
    int poisson(double rate);

    // Uniform point on the unit sphere in `dim` dimensions.
    std::vector<double> unit_vector(int dim);

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fasttrack

#endif
