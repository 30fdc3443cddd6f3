#include "pikan/rbasis.hpp"

#include <cmath>
#include <string>

#include "pikan/errors.hpp"
#include "pikan/parallel.hpp"

namespace pikan {

void RBasisParams::validate() const {
    if (start.size() != end.size() || start.size() != norm.size() || start.empty()) {
        throw ArgumentError("RBasisParams: inconsistent parameter arrays");
    }
    for (std::size_t i = 0; i < start.size(); ++i) {
        if (!(start[i] < end[i])) throw ArgumentError("RBasisParams: start must be < end");
        const double w = end[i] - start[i];
        if (std::abs(norm[i] * w * w - 4.0) > 1e-9) {
            throw ArgumentError("RBasisParams: norm must equal 4 (end - start)^-2");
        }
    }
}

RBasisParams build_r_basis(const Grid& grid, int p, int k) {
    grid.validate();
    const int G = grid.intervals();
    if (p < 1) throw ArgumentError("build_r_basis: p must be >= 1");
    if (k < 1) throw ArgumentError("build_r_basis: k must be >= 1");
    if (k > G) {
        throw ArgumentError("build_r_basis: k = " + std::to_string(k) +
                            " exceeds interval count G = " + std::to_string(G));
    }

    // Edge augmentation on the evolving extended grid.
    std::vector<double> ext = grid.knots;
    ext.reserve(ext.size() + 2 * static_cast<std::size_t>(p));
    for (int it = 0; it < p; ++it) {
        const std::size_t n = ext.size();
        const double ps = ext.front() - (ext[static_cast<std::size_t>(k)] - ext.front()) / k;
        const double pe = ext.back() + (ext.back() - ext[n - 1 - static_cast<std::size_t>(k)]) / k;
        ext.insert(ext.begin(), ps);
        ext.push_back(pe);
    }

    RBasisParams rp;
    rp.p = p;
    rp.k = k;
    rp.start.resize(G + 1);
    rp.end.resize(G + 1);
    rp.norm.resize(G + 1);
    for (int i = p; i <= G + p; ++i) {
        const double s = ext[i] - 0.5 * (ext[i + p] - ext[i - p]);
        const double e = 2.0 * ext[i] - s;
        rp.start[i - p] = s;
        rp.end[i - p] = e;
        rp.norm[i - p] = 4.0 / ((e - s) * (e - s));
    }
    return rp;
}

void r_basis_window(const RBasisParams& params, double x, int dmax, BasisWindow& out) {
    const int n = params.count();
    out.lo = 0;
    out.count = n;
    for (int i = 0; i < n; ++i) {
        const double s = params.start[i];
        const double e = params.end[i];
        if (x <= s || x >= e) {
            out.d[0][i] = 0.0;
            if (dmax >= 1) out.d[1][i] = 0.0;
            if (dmax >= 2) out.d[2][i] = 0.0;
            if (dmax >= 3) out.d[3][i] = 0.0;
            continue;
        }
        const double r = params.norm[i];
        const double a = e - x;
        const double b = x - s;
        const double pr = r * a * b;
        const double diff = a - b;
        out.d[0][i] = pr * pr;
        if (dmax >= 1) out.d[1][i] = 2.0 * r * pr * diff;
        if (dmax >= 2) out.d[2][i] = 2.0 * r * r * diff * diff - 4.0 * r * pr;
        if (dmax >= 3) out.d[3][i] = -12.0 * r * r * diff;
    }
}

std::vector<double> eval_r_basis(const RBasisParams& params, std::span<const double> xs) {
    params.validate();
    if (params.count() > kMaxBasisWindow) {
        throw ArgumentError("eval_r_basis: basis count exceeds kMaxBasisWindow");
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i])) {
            throw EvalError("R basis evaluation: non-finite input at index " + std::to_string(i));
        }
    }
    const int nb = params.count();
    std::vector<double> out(xs.size() * static_cast<std::size_t>(nb));
    parallel_for(xs.size(), [&](std::size_t row) {
        BasisWindow w;
        r_basis_window(params, xs[row], 0, w);
        double* dst = out.data() + row * static_cast<std::size_t>(nb);
        for (int c = 0; c < nb; ++c) dst[c] = w.d[0][c];
    });
    return out;
}

}  // namespace pikan
