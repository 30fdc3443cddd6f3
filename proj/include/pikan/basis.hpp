#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pikan/grid.hpp"
#include "pikan/rbasis.hpp"
#include "pikan/spline.hpp"

namespace pikan {

enum class BasisKind { Spline, ReluR };

struct BasisFamily {
    BasisKind kind = BasisKind::Spline;
    int k = 3;  ///< spline order, or the R construction's edge parameter
    int p = 2;  ///< R construction only

    int coeff_count(int intervals) const {
        return kind == BasisKind::Spline ? intervals + k : intervals + 1;
    }
    void validate() const;
    bool operator==(const BasisFamily&) const = default;
};

/// One input node's basis state: the grid plus (for the R family) the bump
/// parameters derived from it. Rebuilt whenever the grid changes.
struct NodeBasis {
    Grid grid;
    BasisKind kind = BasisKind::Spline;
    RBasisParams r;  ///< ReluR only

    int count() const {
        return kind == BasisKind::Spline ? grid.spline_basis_count() : r.count();
    }
    void window(double x, int dmax, BasisWindow& out) const {
        if (kind == BasisKind::Spline) {
            spline_window(grid, x, dmax, out);
        } else {
            r_basis_window(r, x, dmax, out);
        }
    }

    static NodeBasis make(Grid g, const BasisFamily& fam);
    bool operator==(const NodeBasis&) const = default;
};

/// Basis expansions for several coefficient vectors at a batch of inputs:
/// out[rhs * xs.size() + n] = sum_m coeffs[rhs * count + m] * basis_m(xs[n]).
void basis_expansion(const NodeBasis& basis, std::span<const double> xs,
                     std::span<const double> coeffs, int n_rhs, std::span<double> out);

/// Least-squares fit of basis coefficients to target values at xs, one fit
/// per right-hand side (targets is row-major [n_rhs x xs.size()]). Solved
/// through the normal equations; a rank-deficient system falls back to a
/// Tikhonov-damped solve instead of failing.
std::vector<double> refit_coeffs(const NodeBasis& basis, std::span<const double> xs,
                                 std::span<const double> targets, int n_rhs);

/// Adapt (and possibly enlarge) a spline grid to an input batch, refitting
/// the coefficients so the new expansion tracks the old one at the inputs.
std::pair<Grid, std::vector<double>> extend_and_refit(const Grid& old_grid,
                                                      std::span<const double> old_coeffs,
                                                      std::span<const double> inputs,
                                                      int new_intervals, const GridMixConfig& cfg);

}  // namespace pikan
