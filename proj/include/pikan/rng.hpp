#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace pikan {

/// mt19937_64 wrapped with hand-coded uniform/normal conversions, so that a
/// seed produces the same stream on every standard library. Normal draws use
/// Box-Muller without spare caching: every call consumes exactly two raws,
/// which keeps the engine state a pure function of the number of calls.
class Rng {
 public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t raw() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void restore(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
    std::mt19937_64 engine_;
};

}  // namespace pikan
