#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pikan {

/// Sobol low-discrepancy sequence in up to four dimensions, built from the
/// Joe-Kuo D(6) direction numbers. Index 0 is the origin; callers usually
/// skip it. Points for a given index are computed directly (Gray-code
/// form), so the generator is stateless and deterministic.
class SobolSequence {
 public:
    static constexpr int kMaxDim = 4;
    static constexpr int kBits = 32;

    explicit SobolSequence(int dim);

    int dim() const { return dim_; }

    /// Fills out[0..dim) with point `index` of the sequence in [0, 1)^dim.
    void point(uint64_t index, std::span<double> out) const;

 private:
    int dim_;
    std::array<std::array<uint32_t, kBits + 1>, kMaxDim> v_;
};

/// First n Sobol points after skipping `skip`, mapped affinely into the box
/// [lo, hi]^dim; row-major [n x dim]. A non-power-of-two n is allowed but
/// reported through `warnings` when provided.
std::vector<double> sobol_sample(std::span<const double> lo, std::span<const double> hi,
                                 std::size_t n, uint64_t skip,
                                 std::vector<std::string>* warnings = nullptr);

}  // namespace pikan
