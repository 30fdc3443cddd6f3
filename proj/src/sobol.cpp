#include "pikan/sobol.hpp"

#include "pikan/errors.hpp"

namespace pikan {

namespace {

// Joe-Kuo D(6) primitive polynomial data for dimensions 2..4; the first
// dimension is the van der Corput sequence in base 2.
struct JoeKuoEntry {
    int s;
    uint32_t a;
    std::array<uint32_t, 3> m;
};

constexpr JoeKuoEntry kJoeKuo[3] = {
    {1, 0, {1, 0, 0}},
    {2, 1, {1, 3, 0}},
    {3, 1, {1, 3, 1}},
};

}  // namespace

SobolSequence::SobolSequence(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
        throw ArgumentError("SobolSequence: dimension must be between 1 and 4");
    }
    for (int j = 1; j <= kBits; ++j) v_[0][j] = 1u << (kBits - j);
    for (int d = 1; d < dim_; ++d) {
        const JoeKuoEntry& e = kJoeKuo[d - 1];
        auto& v = v_[d];
        for (int j = 1; j <= e.s; ++j) v[j] = e.m[j - 1] << (kBits - j);
        for (int j = e.s + 1; j <= kBits; ++j) {
            v[j] = v[j - e.s] ^ (v[j - e.s] >> e.s);
            for (int i = 1; i <= e.s - 1; ++i) {
                if ((e.a >> (e.s - 1 - i)) & 1u) v[j] ^= v[j - i];
            }
        }
    }
}

void SobolSequence::point(uint64_t index, std::span<double> out) const {
    uint64_t gray = index ^ (index >> 1);
    std::array<uint32_t, kMaxDim> acc{};
    int bit = 1;
    while (gray != 0 && bit <= kBits) {
        if (gray & 1u) {
            for (int d = 0; d < dim_; ++d) acc[d] ^= v_[d][bit];
        }
        gray >>= 1;
        ++bit;
    }
    for (int d = 0; d < dim_; ++d) {
        out[d] = static_cast<double>(acc[d]) * 0x1.0p-32;
    }
}

std::vector<double> sobol_sample(std::span<const double> lo, std::span<const double> hi,
                                 std::size_t n, uint64_t skip,
                                 std::vector<std::string>* warnings) {
    const int dim = static_cast<int>(lo.size());
    if (hi.size() != lo.size()) throw ArgumentError("sobol_sample: box shape mismatch");
    if (n > 0 && (n & (n - 1)) != 0 && warnings != nullptr) {
        warnings->push_back("sobol_sample: sample count " + std::to_string(n) +
                            " is not a power of two");
    }
    SobolSequence seq(dim);
    std::vector<double> out(n * static_cast<std::size_t>(dim));
    std::array<double, SobolSequence::kMaxDim> u;
    for (std::size_t i = 0; i < n; ++i) {
        seq.point(skip + i, std::span<double>(u.data(), static_cast<std::size_t>(dim)));
        for (int d = 0; d < dim; ++d) {
            out[i * dim + d] = lo[d] + (hi[d] - lo[d]) * u[d];
        }
    }
    return out;
}

}  // namespace pikan
