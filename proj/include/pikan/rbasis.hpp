#pragma once

#include <span>
#include <vector>

#include "pikan/grid.hpp"
#include "pikan/spline.hpp"

namespace pikan {

/// Squared-product-of-ReLUs bump functions, one per grid point:
/// R_i(x) = [ norm_i * max(0, end_i - x) * max(0, x - start_i) ]^2.
/// Each bump is centered on its grid point, peaks at exactly one, and its
/// width follows the local grid spacing, so the family adapts to
/// non-uniform grids without zero-support gaps.
struct RBasisParams {
    std::vector<double> start;  ///< s_i
    std::vector<double> end;    ///< e_i, with s_i < e_i
    std::vector<double> norm;   ///< 4 (e_i - s_i)^{-2}
    int p = 2;
    int k = 2;

    int count() const { return static_cast<int>(start.size()); }
    void validate() const;
    bool operator==(const RBasisParams&) const = default;
};

/// Build G+1 bump parameters from a grid: extend the grid by p points at
/// each end (each step reaches 1/k of the distance to the current k-th
/// neighbour), then give bump i the half-width (ext[i+p] - ext[i-p]) / 2
/// around grid point i. Requires 1 <= k <= G and p >= 1.
RBasisParams build_r_basis(const Grid& grid, int p, int k);

/// Dense batch evaluation, row-major [xs.size() x (G+1)].
std::vector<double> eval_r_basis(const RBasisParams& params, std::span<const double> xs);

/// All bump values and derivatives up to dmax at a single input. The window
/// is dense (lo = 0, count = G+1). Second derivatives are piecewise: they
/// jump at the support ends s_i, e_i.
void r_basis_window(const RBasisParams& params, double x, int dmax, BasisWindow& out);

}  // namespace pikan
