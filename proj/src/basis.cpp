#include "pikan/basis.hpp"

#include <cmath>
#include <string>

#include "pikan/errors.hpp"

namespace pikan {

namespace {

/// In-place lower Cholesky; false on a non-positive or non-finite pivot.
bool cholesky(std::vector<double>& a, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(i) * n + j];
            for (int m = 0; m < j; ++m) {
                sum -= a[static_cast<std::size_t>(i) * n + m] * a[static_cast<std::size_t>(j) * n + m];
            }
            if (i == j) {
                if (!(sum > 0.0) || !std::isfinite(sum)) return false;
                a[static_cast<std::size_t>(i) * n + i] = std::sqrt(sum);
            } else {
                a[static_cast<std::size_t>(i) * n + j] = sum / a[static_cast<std::size_t>(j) * n + j];
            }
        }
    }
    return true;
}

void solve_llt(const std::vector<double>& l, int n, std::span<double> b) {
    for (int i = 0; i < n; ++i) {
        double sum = b[i];
        for (int m = 0; m < i; ++m) sum -= l[static_cast<std::size_t>(i) * n + m] * b[m];
        b[i] = sum / l[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double sum = b[i];
        for (int m = i + 1; m < n; ++m) sum -= l[static_cast<std::size_t>(m) * n + i] * b[m];
        b[i] = sum / l[static_cast<std::size_t>(i) * n + i];
    }
}

/// SPD solve with escalating Tikhonov damping on failure; never throws for
/// rank deficiency.
void solve_spd(const std::vector<double>& a, int n, std::vector<double>& rhs, int n_rhs) {
    std::vector<double> f = a;
    double damping = 1e-10;
    for (int attempt = 0; attempt < 12; ++attempt) {
        if (cholesky(f, n)) {
            for (int r = 0; r < n_rhs; ++r) {
                solve_llt(f, n, std::span<double>(rhs.data() + static_cast<std::size_t>(r) * n,
                                                  static_cast<std::size_t>(n)));
            }
            return;
        }
        f = a;
        for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i) * n + i] += damping;
        damping *= 1000.0;
    }
    throw EvalError("refit_coeffs: normal equations not solvable even with damping");
}

}  // namespace

void BasisFamily::validate() const {
    if (kind == BasisKind::Spline) {
        if (k < 0 || k > kMaxSplineDegree) {
            throw ArgumentError("BasisFamily: spline order out of range");
        }
    } else {
        if (k < 1) throw ArgumentError("BasisFamily: R construction needs k >= 1");
        if (p < 1) throw ArgumentError("BasisFamily: R construction needs p >= 1");
    }
}

NodeBasis NodeBasis::make(Grid g, const BasisFamily& fam) {
    fam.validate();
    NodeBasis nb;
    nb.kind = fam.kind;
    if (fam.kind == BasisKind::ReluR) {
        nb.r = build_r_basis(g, fam.p, fam.k);
    }
    nb.grid = std::move(g);
    if (nb.count() > kMaxBasisWindow) {
        throw ArgumentError("NodeBasis: basis count " + std::to_string(nb.count()) +
                            " exceeds kMaxBasisWindow");
    }
    return nb;
}

void basis_expansion(const NodeBasis& basis, std::span<const double> xs,
                     std::span<const double> coeffs, int n_rhs, std::span<double> out) {
    const int nb = basis.count();
    const std::size_t n = xs.size();
    std::fill(out.begin(), out.end(), 0.0);
    BasisWindow w;
    for (std::size_t i = 0; i < n; ++i) {
        basis.window(xs[i], 0, w);
        for (int r = 0; r < n_rhs; ++r) {
            const double* c = coeffs.data() + static_cast<std::size_t>(r) * nb + w.lo;
            double acc = 0.0;
            for (int m = 0; m < w.count; ++m) acc += c[m] * w.d[0][m];
            out[static_cast<std::size_t>(r) * n + i] = acc;
        }
    }
}

std::vector<double> refit_coeffs(const NodeBasis& basis, std::span<const double> xs,
                                 std::span<const double> targets, int n_rhs) {
    const int nb = basis.count();
    const std::size_t n = xs.size();
    if (targets.size() != n * static_cast<std::size_t>(n_rhs)) {
        throw ArgumentError("refit_coeffs: targets shape mismatch");
    }

    std::vector<double> gram(static_cast<std::size_t>(nb) * nb, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(n_rhs) * nb, 0.0);
    BasisWindow w;
    for (std::size_t i = 0; i < n; ++i) {
        basis.window(xs[i], 0, w);
        for (int a = 0; a < w.count; ++a) {
            const double wa = w.d[0][a];
            if (wa == 0.0) continue;
            const int ia = w.lo + a;
            double* grow = gram.data() + static_cast<std::size_t>(ia) * nb + w.lo;
            for (int b = 0; b < w.count; ++b) grow[b] += wa * w.d[0][b];
            for (int r = 0; r < n_rhs; ++r) {
                rhs[static_cast<std::size_t>(r) * nb + ia] += wa * targets[static_cast<std::size_t>(r) * n + i];
            }
        }
    }
    solve_spd(gram, nb, rhs, n_rhs);
    return rhs;
}

std::pair<Grid, std::vector<double>> extend_and_refit(const Grid& old_grid,
                                                      std::span<const double> old_coeffs,
                                                      std::span<const double> inputs,
                                                      int new_intervals, const GridMixConfig& cfg) {
    if (new_intervals < old_grid.intervals()) {
        throw ArgumentError("extend_and_refit: new interval count must be >= old");
    }
    if (static_cast<int>(old_coeffs.size()) != old_grid.spline_basis_count()) {
        throw ArgumentError("extend_and_refit: coefficient count mismatch");
    }

    NodeBasis old_basis;
    old_basis.kind = BasisKind::Spline;
    old_basis.grid = old_grid;
    std::vector<double> targets(inputs.size());
    basis_expansion(old_basis, inputs, old_coeffs, 1, targets);

    Grid next = build_adapted_grid(inputs, new_intervals, cfg, old_grid.degree);
    NodeBasis new_basis;
    new_basis.kind = BasisKind::Spline;
    new_basis.grid = next;
    std::vector<double> coeffs = refit_coeffs(new_basis, inputs, targets, 1);
    return {std::move(next), std::move(coeffs)};
}

}  // namespace pikan
