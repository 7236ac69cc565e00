#include "fasttrack/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fasttrack {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

int Rng::poisson(double rate) {
    if (rate < 0.0) throw std::invalid_argument("poisson rate must be >= 0");
    if (rate == 0.0) return 0;
    const double limit = std::exp(-rate);
    int count = 0;
    double product = uniform01();
    while (product > limit) {
        ++count;
        product *= uniform01();
    }
    return count;
}

std::vector<double> Rng::unit_vector(int dim) {
    if (dim <= 0) throw std::invalid_argument("unit_vector dim must be > 0");
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (auto& x : v) {
            x = normal();
            norm_sq += x * x;
        }
    } while (norm_sq < 1e-24);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& x : v) x *= inv;
    return v;
}

}  // namespace fasttrack
