#include "pikan/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pikan/errors.hpp"
#include "pikan/parallel.hpp"

namespace pikan {

namespace {

void check_finite(std::span<const double> xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i])) {
            throw EvalError("spline evaluation: non-finite input at index " + std::to_string(i));
        }
    }
}

}  // namespace

void spline_window(const Grid& grid, double x, int dmax, BasisWindow& out) {
    const std::vector<double>& t = grid.augmented;
    const int k = grid.degree;
    const int nt = static_cast<int>(t.size());
    const int nb = nt - 1 - k;

    out.lo = 0;
    out.count = 0;
    if (!(x >= t.front() && x < t.back())) return;

    // Containing span: t[j] <= x < t[j+1].
    const int j = static_cast<int>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;

    // Triangles over the support window. Row q holds B_{j-q+r, q}(x) for
    // r in [0, q]; entries whose basis index falls outside [0, nt-2-q] are
    // zero (those functions do not exist at that degree).
    double val[kMaxSplineDegree + 1][kMaxSplineDegree + 1];
    double dt1[kMaxSplineDegree + 1][kMaxSplineDegree + 1];
    double dt2[kMaxSplineDegree + 1][kMaxSplineDegree + 1];
    double dt3[kMaxSplineDegree + 1][kMaxSplineDegree + 1];

    val[0][0] = 1.0;
    for (int q = 1; q <= k; ++q) {
        for (int r = 0; r <= q; ++r) {
            const int i = j - q + r;
            double v = 0.0;
            if (i >= 0 && i <= nt - 2 - q) {
                if (r >= 1) {
                    const double prev = val[q - 1][r - 1];  // B_{i, q-1}
                    if (prev != 0.0) v += (x - t[i]) / (t[i + q] - t[i]) * prev;
                }
                if (r <= q - 1) {
                    const double prev = val[q - 1][r];  // B_{i+1, q-1}
                    if (prev != 0.0) v += (t[i + q + 1] - x) / (t[i + q + 1] - t[i + 1]) * prev;
                }
            }
            val[q][r] = v;
        }
    }

    // Derivative rows reuse the one-order-lower triangle of the previous
    // derivative: B^{(m)}_{i,q} = q [ B^{(m-1)}_{i,q-1}/(t_{i+q}-t_i)
    //                              - B^{(m-1)}_{i+1,q-1}/(t_{i+q+1}-t_{i+1}) ].
    auto derive = [&](const double (*src)[kMaxSplineDegree + 1],
                      double (*dst)[kMaxSplineDegree + 1], int qmin) {
        for (int q = qmin; q <= k; ++q) {
            for (int r = 0; r <= q; ++r) {
                const int i = j - q + r;
                double v = 0.0;
                if (i >= 0 && i <= nt - 2 - q) {
                    if (r >= 1) {
                        const double prev = src[q - 1][r - 1];
                        if (prev != 0.0) v += prev / (t[i + q] - t[i]);
                    }
                    if (r <= q - 1) {
                        const double prev = src[q - 1][r];
                        if (prev != 0.0) v -= prev / (t[i + q + 1] - t[i + 1]);
                    }
                    v *= static_cast<double>(q);
                }
                dst[q][r] = v;
            }
        }
    };
    if (dmax >= 1 && k >= 1) derive(val, dt1, 1);
    if (dmax >= 2 && k >= 2) derive(dt1, dt2, 2);
    if (dmax >= 3 && k >= 3) derive(dt2, dt3, 3);

    out.lo = std::max(0, j - k);
    const int hi = std::min(j, nb - 1);
    out.count = hi - out.lo + 1;
    for (int c = 0; c < out.count; ++c) {
        const int r = out.lo + c - (j - k);
        out.d[0][c] = val[k][r];
        if (dmax >= 1) out.d[1][c] = k >= 1 ? dt1[k][r] : 0.0;
        if (dmax >= 2) out.d[2][c] = k >= 2 ? dt2[k][r] : 0.0;
        if (dmax >= 3) out.d[3][c] = k >= 3 ? dt3[k][r] : 0.0;
    }
}

std::vector<double> eval_spline_basis(const Grid& grid, std::span<const double> xs) {
    grid.validate();
    check_finite(xs);
    const int nb = grid.spline_basis_count();
    std::vector<double> out(xs.size() * static_cast<std::size_t>(nb), 0.0);
    parallel_for(xs.size(), [&](std::size_t row) {
        BasisWindow w;
        spline_window(grid, xs[row], 0, w);
        double* dst = out.data() + row * static_cast<std::size_t>(nb);
        for (int c = 0; c < w.count; ++c) dst[w.lo + c] = w.d[0][c];
    });
    return out;
}

std::vector<double> eval_spline_basis_derivs(const Grid& grid, std::span<const double> xs,
                                             int order) {
    grid.validate();
    if (order < 1 || order > 2) {
        throw ArgumentError("eval_spline_basis_derivs: order must be 1 or 2");
    }
    if (order > grid.degree) {
        throw ArgumentError("eval_spline_basis_derivs: order " + std::to_string(order) +
                            " exceeds spline degree " + std::to_string(grid.degree));
    }
    check_finite(xs);
    const int nb = grid.spline_basis_count();
    std::vector<double> out(xs.size() * static_cast<std::size_t>(nb), 0.0);
    parallel_for(xs.size(), [&](std::size_t row) {
        BasisWindow w;
        spline_window(grid, xs[row], order, w);
        double* dst = out.data() + row * static_cast<std::size_t>(nb);
        for (int c = 0; c < w.count; ++c) dst[w.lo + c] = w.d[order][c];
    });
    return out;
}

}  // namespace pikan
