#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pikan/basis.hpp"

namespace pikan {

double silu(double x);

/// silu value and derivatives up to order dmax (at most 3) into out[0..dmax].
void silu_derivs(double x, int dmax, double out[4]);

/// One KAN layer: every edge (j, i) carries a learnable activation
/// phi(x) = c_r silu(x) + c_B sum_m c_m basis_m(x). All edges reading input
/// node i share that node's grid/basis, so a layer stores n_in bases and
/// n_out x n_in coefficient blocks.
struct KanLayer {
    int n_in = 0;
    int n_out = 0;
    std::vector<NodeBasis> nodes;  ///< one per input node
    int coeffs_per_edge = 0;       ///< basis count shared across the layer

    int edge_params() const { return coeffs_per_edge + 2; }  // c_r, c_B, coefficients
    int param_count() const { return n_in * n_out * edge_params(); }
};

/// Parameter block layout per edge: [c_r, c_B, c_0 .. c_{nb-1}], edges
/// ordered (layer, out node j, in node i), layers concatenated.
class KanModel {
 public:
    std::vector<int> shape;
    BasisFamily family;
    std::vector<KanLayer> layers;
    std::vector<double> params;
    uint64_t seed = 0;

    int dim() const { return shape.front(); }
    int out_dim() const { return shape.back(); }
    std::size_t param_count() const { return params.size(); }
    int grid_intervals() const { return layers.front().nodes.front().grid.intervals(); }

    std::size_t layer_offset(int l) const;
    std::size_t edge_offset(int l, int j, int i) const;
    double c_r(int l, int j, int i) const { return params[edge_offset(l, j, i)]; }
    double c_b(int l, int j, int i) const { return params[edge_offset(l, j, i) + 1]; }
    std::span<const double> coeffs(int l, int j, int i) const {
        return {params.data() + edge_offset(l, j, i) + 2,
                static_cast<std::size_t>(layers[l].coeffs_per_edge)};
    }

    /// Human-readable name of the edge block containing flat parameter index.
    std::string param_block_name(std::size_t flat_index) const;

    void validate() const;
    bool operator==(const KanModel&) const = default;
};

/// Fresh model with uniform grids on [-1, 1]: c_r = c_B = 1 and
/// coefficients drawn from Normal(0, 0.1) in layout order, so the same
/// seed reproduces the same parameter bytes.
KanModel init_model(std::vector<int> shape, const BasisFamily& family, int initial_intervals,
                    uint64_t seed);

/// Batch forward pass; x is row-major [n x dim], result [n x out_dim].
std::vector<double> forward(const KanModel& model, std::span<const double> x, std::size_t n);

/// Input batches seen by each layer; entry 0 is the input batch itself and
/// entry L equals the forward output.
std::vector<std::vector<double>> layer_inputs(const KanModel& model, std::span<const double> x,
                                              std::size_t n);

struct GridUpdateResult {
    KanModel model;
    std::vector<std::string> warnings;  ///< nodes whose degenerate inputs kept the old grid
};

/// Adapt every node grid to the given input batch (optionally enlarging to
/// new_intervals) and least-squares refit all basis coefficients; c_r and
/// c_B are untouched. Layers are processed front to back, each later
/// layer's inputs computed through the already-updated earlier layers.
GridUpdateResult update_grids(const KanModel& model, std::span<const double> x, std::size_t n,
                              std::optional<int> new_intervals, const GridMixConfig& cfg);

}  // namespace pikan
