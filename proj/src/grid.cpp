#include "pikan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pikan/errors.hpp"

namespace pikan {

void GridMixConfig::validate() const {
    if (!(g_e >= 0.0 && g_e <= 1.0)) {
        throw ArgumentError("GridMixConfig: g_e must lie in [0, 1], got " + std::to_string(g_e));
    }
    if (!(margin >= 0.0)) {
        throw ArgumentError("GridMixConfig: margin must be non-negative");
    }
}

Grid Grid::from_knots(std::vector<double> knots, int degree) {
    Grid g;
    g.knots = std::move(knots);
    g.degree = degree;
    g.validate();

    const int n = static_cast<int>(g.knots.size());
    const double spacing = (g.knots.back() - g.knots.front()) / static_cast<double>(n - 1);
    g.augmented.resize(n + 2 * degree);
    for (int j = 0; j < degree; ++j) {
        g.augmented[j] = g.knots.front() - spacing * static_cast<double>(degree - j);
        g.augmented[degree + n + j] = g.knots.back() + spacing * static_cast<double>(j + 1);
    }
    std::copy(g.knots.begin(), g.knots.end(), g.augmented.begin() + degree);
    return g;
}

Grid Grid::uniform(double lo, double hi, int intervals, int degree) {
    if (intervals < 1) throw ArgumentError("Grid: intervals must be >= 1");
    if (!(lo < hi)) throw ArgumentError("Grid: lo must be < hi");
    std::vector<double> knots(intervals + 1);
    for (int j = 0; j <= intervals; ++j) {
        knots[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(intervals);
    }
    knots.back() = hi;
    return from_knots(std::move(knots), degree);
}

void Grid::validate() const {
    if (degree < 0) throw ArgumentError("Grid: degree must be >= 0");
    if (knots.size() < 2) throw ArgumentError("Grid: need at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!std::isfinite(knots[i])) throw ArgumentError("Grid: non-finite knot");
        if (i > 0 && !(knots[i] > knots[i - 1])) {
            throw ArgumentError("Grid: knots must be strictly increasing");
        }
    }
}

double quantile_sorted(std::span<const double> sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 0) throw ArgumentError("quantile_sorted: empty sample");
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const double lo = std::floor(pos);
    std::size_t i = static_cast<std::size_t>(lo);
    if (i >= n - 1) return sorted[n - 1];
    const double w = pos - lo;
    return sorted[i] + w * (sorted[i + 1] - sorted[i]);
}

Grid build_adapted_grid(std::span<const double> inputs, int intervals, const GridMixConfig& cfg,
                        int degree) {
    cfg.validate();
    if (inputs.empty()) throw ArgumentError("build_adapted_grid: empty input batch");
    if (intervals < 1) throw ArgumentError("build_adapted_grid: intervals must be >= 1");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!std::isfinite(inputs[i])) {
            throw EvalError("build_adapted_grid: non-finite input at index " + std::to_string(i));
        }
    }

    std::vector<double> sorted(inputs.begin(), inputs.end());
    std::sort(sorted.begin(), sorted.end());
    const double range = sorted.back() - sorted.front();
    if (range <= 0.0) {
        throw DegenerateRangeError("build_adapted_grid: all inputs equal (" +
                                   std::to_string(sorted.front()) + "); grid would collapse");
    }

    const double pad = cfg.margin * range;
    const double lo = sorted.front() - pad;
    const double hi = sorted.back() + pad;

    const int G = intervals;
    std::vector<double> knots(G + 1);
    knots.front() = lo;
    knots.back() = hi;
    for (int j = 1; j < G; ++j) {
        const double u = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(G);
        const double a = quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(G));
        knots[j] = cfg.g_e * u + (1.0 - cfg.g_e) * a;
    }

    // Quantile ties can produce coincident interior knots; nudge just enough
    // to keep the knot vector strictly increasing.
    const double eps = 1e-12 * (hi - lo);
    for (int j = 1; j <= G; ++j) {
        if (knots[j] <= knots[j - 1]) knots[j] = knots[j - 1] + eps;
    }
    if (knots.back() > hi) {
        // Re-pin the end if the nudge chain reached it.
        knots.back() = hi;
        for (int j = G - 1; j >= 1; --j) {
            if (knots[j] >= knots[j + 1]) knots[j] = knots[j + 1] - eps;
        }
    }

    return Grid::from_knots(std::move(knots), degree);
}

}  // namespace pikan
