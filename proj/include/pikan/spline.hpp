#pragma once

#include <array>
#include <span>
#include <vector>

#include "pikan/grid.hpp"

namespace pikan {

inline constexpr int kMaxSplineDegree = 8;
inline constexpr int kMaxBasisWindow = 40;

/// Contiguous block of basis functions that may be nonzero at one input,
/// with values and derivatives up to order three. Entry d[o][c] is the
/// o-th derivative of basis function (lo + c). count == 0 means the input
/// lies outside the augmented span.
struct BasisWindow {
    int lo = 0;
    int count = 0;
    std::array<std::array<double, kMaxBasisWindow>, 4> d;
};

/// Values (and derivatives up to dmax) of every spline basis function that
/// is nonzero at x. Iterative Cox-de Boor over the augmented knot vector,
/// restricted to the k+1 wide support window of the containing span.
/// Intervals are half-open: at the right end of the augmented span all
/// functions evaluate to zero.
void spline_window(const Grid& grid, double x, int dmax, BasisWindow& out);

/// Dense batch evaluation, row-major [xs.size() x (G + degree)]. Inside the
/// interior span each row sums to one. Throws EvalError on non-finite
/// inputs, naming the offending index.
std::vector<double> eval_spline_basis(const Grid& grid, std::span<const double> xs);

/// Dense batch derivatives of the given order (1 or 2). The order must not
/// exceed the spline degree.
std::vector<double> eval_spline_basis_derivs(const Grid& grid, std::span<const double> xs,
                                             int order);

}  // namespace pikan
