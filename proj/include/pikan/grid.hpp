#pragma once

#include <span>
#include <vector>

namespace pikan {

/// Controls how adapted grids blend a uniform knot layout with an
/// input-quantile layout, and how far the grid ends extend past the data.
struct GridMixConfig {
    double g_e = 0.05;    ///< uniform/adaptive mixing weight in [0, 1]; 1 = fully uniform
    double margin = 0.01; ///< end padding as a fraction of the observed input range

    void validate() const;
};

/// Knot vector with G intervals plus the spline support extension: `degree`
/// extra knots on each side, spaced by the mean interior spacing. A grid
/// with G intervals carries G + degree spline basis functions.
struct Grid {
    std::vector<double> knots;      ///< G+1 strictly increasing knots
    int degree = 3;                 ///< spline order k
    std::vector<double> augmented;  ///< knots extended by `degree` points each side

    int intervals() const { return static_cast<int>(knots.size()) - 1; }
    int spline_basis_count() const { return intervals() + degree; }
    double lo() const { return knots.front(); }
    double hi() const { return knots.back(); }

    static Grid from_knots(std::vector<double> knots, int degree);
    static Grid uniform(double lo, double hi, int intervals, int degree);

    void validate() const;
    bool operator==(const Grid&) const = default;
};

/// Sorted-order linear-interpolation quantile of a sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

/// Blend of a uniform grid and an input-quantile grid over the padded range
/// of `inputs`: knot_j = g_e * uniform_j + (1 - g_e) * quantile_j. Both
/// layouts share the padded end points. Interior quantile knot j sits at
/// level j/G of the input batch. Throws DegenerateRangeError when all
/// inputs coincide.
Grid build_adapted_grid(std::span<const double> inputs, int intervals, const GridMixConfig& cfg,
                        int degree);

}  // namespace pikan
