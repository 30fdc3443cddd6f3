#include "pikan/model.hpp"

#include <cmath>

#include "pikan/errors.hpp"
#include "pikan/parallel.hpp"
#include "pikan/rng.hpp"

namespace pikan {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

void silu_derivs(double x, int dmax, double out[4]) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    out[0] = x * s;
    if (dmax >= 1) {
        const double s1 = s * (1.0 - s);
        out[1] = s + x * s1;
        if (dmax >= 2) {
            const double s2 = s1 * (1.0 - 2.0 * s);
            out[2] = 2.0 * s1 + x * s2;
            if (dmax >= 3) {
                const double s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
                out[3] = 3.0 * s2 + x * s3;
            }
        }
    }
}

std::size_t KanModel::layer_offset(int l) const {
    std::size_t off = 0;
    for (int m = 0; m < l; ++m) off += static_cast<std::size_t>(layers[m].param_count());
    return off;
}

std::size_t KanModel::edge_offset(int l, int j, int i) const {
    const KanLayer& layer = layers[l];
    return layer_offset(l) +
           static_cast<std::size_t>((j * layer.n_in + i)) * layer.edge_params();
}

std::string KanModel::param_block_name(std::size_t flat_index) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::size_t next = off + static_cast<std::size_t>(layers[l].param_count());
        if (flat_index < next) {
            const std::size_t in_layer = flat_index - off;
            const int ep = layers[l].edge_params();
            const int edge = static_cast<int>(in_layer / ep);
            const int slot = static_cast<int>(in_layer % ep);
            const int j = edge / layers[l].n_in;
            const int i = edge % layers[l].n_in;
            const char* what = slot == 0 ? "c_r" : (slot == 1 ? "c_B" : "coeff");
            return "layer " + std::to_string(l) + " edge (" + std::to_string(j) + "," +
                   std::to_string(i) + ") " + what;
        }
        off = next;
    }
    return "parameter " + std::to_string(flat_index);
}

void KanModel::validate() const {
    if (shape.size() < 2) throw ArgumentError("KanModel: shape needs at least two entries");
    if (layers.size() + 1 != shape.size()) throw ArgumentError("KanModel: layer count mismatch");
    std::size_t total = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const KanLayer& layer = layers[l];
        if (layer.n_in != shape[l] || layer.n_out != shape[l + 1]) {
            throw ArgumentError("KanModel: layer dims do not chain with shape");
        }
        if (static_cast<int>(layer.nodes.size()) != layer.n_in) {
            throw ArgumentError("KanModel: node basis count mismatch");
        }
        for (const NodeBasis& nb : layer.nodes) {
            if (nb.count() != layer.coeffs_per_edge) {
                throw ArgumentError("KanModel: coefficient count inconsistent with node basis");
            }
        }
        total += static_cast<std::size_t>(layer.param_count());
    }
    if (total != params.size()) throw ArgumentError("KanModel: flat parameter size mismatch");
}

KanModel init_model(std::vector<int> shape, const BasisFamily& family, int initial_intervals,
                    uint64_t seed) {
    family.validate();
    if (shape.size() < 2) throw ArgumentError("init_model: shape needs at least two entries");
    for (int d : shape) {
        if (d < 1) throw ArgumentError("init_model: every shape entry must be >= 1");
    }
    if (initial_intervals < 1) throw ArgumentError("init_model: initial_intervals must be >= 1");
    if (family.kind == BasisKind::ReluR && family.k > initial_intervals) {
        throw ArgumentError("init_model: R construction needs k <= initial interval count");
    }

    KanModel model;
    model.shape = std::move(shape);
    model.family = family;
    model.seed = seed;

    const int spline_degree = family.kind == BasisKind::Spline ? family.k : family.k;
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < model.shape.size(); ++l) {
        KanLayer layer;
        layer.n_in = model.shape[l];
        layer.n_out = model.shape[l + 1];
        layer.coeffs_per_edge = family.coeff_count(initial_intervals);
        layer.nodes.reserve(layer.n_in);
        for (int i = 0; i < layer.n_in; ++i) {
            layer.nodes.push_back(
                NodeBasis::make(Grid::uniform(-1.0, 1.0, initial_intervals, spline_degree), family));
        }
        total += static_cast<std::size_t>(layer.param_count());
        model.layers.push_back(std::move(layer));
    }

    model.params.resize(total);
    Rng rng(seed);
    std::size_t off = 0;
    for (const KanLayer& layer : model.layers) {
        for (int j = 0; j < layer.n_out; ++j) {
            for (int i = 0; i < layer.n_in; ++i) {
                model.params[off++] = 1.0;  // c_r
                model.params[off++] = 1.0;  // c_B
                for (int m = 0; m < layer.coeffs_per_edge; ++m) {
                    model.params[off++] = rng.normal(0.0, 0.1);
                }
            }
        }
    }
    model.validate();
    return model;
}

namespace {

struct LayerScratch {
    std::vector<BasisWindow> wins;
    std::vector<double> silu_vals;
    void ensure(int n) {
        if (static_cast<int>(wins.size()) < n) {
            wins.resize(n);
            silu_vals.resize(n);
        }
    }
};

/// One layer applied to one row of inputs (value path only).
void apply_layer(const KanModel& model, int l, std::span<const double> in, std::span<double> out,
                 LayerScratch& scratch) {
    const KanLayer& layer = model.layers[l];
    scratch.ensure(layer.n_in);
    std::vector<BasisWindow>& wins = scratch.wins;
    std::vector<double>& sv = scratch.silu_vals;
    for (int i = 0; i < layer.n_in; ++i) {
        layer.nodes[i].window(in[i], 0, wins[i]);
        sv[i] = silu(in[i]);
    }
    const double* p = model.params.data() + model.layer_offset(l);
    const int ep = layer.edge_params();
    for (int j = 0; j < layer.n_out; ++j) {
        double acc = 0.0;
        const double* edge = p + static_cast<std::size_t>(j) * layer.n_in * ep;
        for (int i = 0; i < layer.n_in; ++i, edge += ep) {
            const BasisWindow& w = wins[i];
            double basis_part = 0.0;
            const double* c = edge + 2 + w.lo;
            for (int m = 0; m < w.count; ++m) basis_part += c[m] * w.d[0][m];
            acc += edge[0] * sv[i] + edge[1] * basis_part;
        }
        out[j] = acc;
    }
}

}  // namespace

std::vector<double> forward(const KanModel& model, std::span<const double> x, std::size_t n) {
    const int dim = model.dim();
    if (x.size() != n * static_cast<std::size_t>(dim)) {
        throw ArgumentError("forward: batch shape mismatch");
    }
    int max_width = 0;
    for (int d : model.shape) max_width = std::max(max_width, d);

    std::vector<double> out(n * static_cast<std::size_t>(model.out_dim()));
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        LayerScratch scratch;
        std::vector<double> a(max_width), b(max_width);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (long row = 0; row < static_cast<long>(n); ++row) {
            std::copy_n(x.data() + static_cast<std::size_t>(row) * dim, dim, a.data());
            std::span<double> cur(a.data(), static_cast<std::size_t>(dim));
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                std::span<double> next(b.data(), static_cast<std::size_t>(model.layers[l].n_out));
                apply_layer(model, static_cast<int>(l), cur, next, scratch);
                std::swap(a, b);
                cur = std::span<double>(a.data(), next.size());
            }
            std::copy_n(cur.data(), model.out_dim(),
                        out.data() + static_cast<std::size_t>(row) * model.out_dim());
        }
    }
    return out;
}

std::vector<std::vector<double>> layer_inputs(const KanModel& model, std::span<const double> x,
                                              std::size_t n) {
    const int dim = model.dim();
    if (x.size() != n * static_cast<std::size_t>(dim)) {
        throw ArgumentError("layer_inputs: batch shape mismatch");
    }
    std::vector<std::vector<double>> batches(model.layers.size() + 1);
    batches[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const KanLayer& layer = model.layers[l];
        batches[l + 1].resize(n * static_cast<std::size_t>(layer.n_out));
        const std::vector<double>& in = batches[l];
        std::vector<double>& out = batches[l + 1];
#ifdef _OPENMP
#pragma omp parallel
#endif
        {
            LayerScratch scratch;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
            for (long row = 0; row < static_cast<long>(n); ++row) {
                apply_layer(model, static_cast<int>(l),
                            std::span<const double>(in.data() + static_cast<std::size_t>(row) * layer.n_in,
                                                    static_cast<std::size_t>(layer.n_in)),
                            std::span<double>(out.data() + static_cast<std::size_t>(row) * layer.n_out,
                                              static_cast<std::size_t>(layer.n_out)),
                            scratch);
            }
        }
    }
    return batches;
}

GridUpdateResult update_grids(const KanModel& model, std::span<const double> x, std::size_t n,
                              std::optional<int> new_intervals, const GridMixConfig& cfg) {
    cfg.validate();
    model.validate();
    if (new_intervals && *new_intervals < model.grid_intervals()) {
        throw ArgumentError("update_grids: grids can only be kept or enlarged");
    }
    const int target_g = new_intervals.value_or(model.grid_intervals());

    GridUpdateResult res;
    res.model = model;
    KanModel& next = res.model;

    std::vector<double> current(x.begin(), x.end());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const KanLayer& old_layer = model.layers[l];
        const int nb_old = old_layer.coeffs_per_edge;
        const int nb_new = model.family.coeff_count(target_g);
        const int n_in = old_layer.n_in;
        const int n_out = old_layer.n_out;

        // Per node: adapt grid to that node's input column, refit all n_out
        // coefficient vectors against the old expansion values.
        std::vector<std::vector<double>> new_coeffs(n_in);
        std::vector<NodeBasis> new_nodes(old_layer.nodes.begin(), old_layer.nodes.end());
        std::vector<std::string> node_warnings(n_in);
        parallel_for(static_cast<std::size_t>(n_in), [&](std::size_t i) {
            std::vector<double> column(n);
            for (std::size_t row = 0; row < n; ++row) column[row] = current[row * n_in + i];

            std::vector<double> old_c(static_cast<std::size_t>(n_out) * nb_old);
            for (int j = 0; j < n_out; ++j) {
                const std::size_t src = next.edge_offset(static_cast<int>(l), j, static_cast<int>(i)) + 2;
                std::copy_n(next.params.data() + src, nb_old,
                            old_c.data() + static_cast<std::size_t>(j) * nb_old);
            }

            Grid adapted;
            try {
                adapted = build_adapted_grid(column, target_g, cfg, old_layer.nodes[i].grid.degree);
            } catch (const DegenerateRangeError&) {
                node_warnings[i] = "layer " + std::to_string(l) + " node " + std::to_string(i) +
                                   ": degenerate input range, grid kept";
                const Grid& old = old_layer.nodes[i].grid;
                if (target_g != old.intervals()) {
                    // A size change was requested, so the old grid cannot be
                    // kept as-is; reuse its range with the new interval count.
                    adapted = Grid::uniform(old.lo(), old.hi(), target_g, old.degree);
                } else {
                    new_coeffs[i] = std::move(old_c);
                    return;
                }
            }

            std::vector<double> targets(static_cast<std::size_t>(n_out) * n);
            basis_expansion(old_layer.nodes[i], column, old_c, n_out, targets);
            NodeBasis nb = NodeBasis::make(adapted, model.family);
            new_coeffs[i] = refit_coeffs(nb, column, targets, n_out);
            new_nodes[i] = std::move(nb);
        });
        for (const std::string& w : node_warnings) {
            if (!w.empty()) res.warnings.push_back(w);
        }

        // Splice the refit coefficients (and possibly new layout) into the model.
        if (nb_new != nb_old) {
            KanModel rebuilt = next;
            rebuilt.layers[l].coeffs_per_edge = nb_new;
            rebuilt.layers[l].nodes = new_nodes;
            std::size_t total = 0;
            for (const KanLayer& lay : rebuilt.layers) total += static_cast<std::size_t>(lay.param_count());
            rebuilt.params.assign(total, 0.0);
            for (std::size_t m = 0; m < rebuilt.layers.size(); ++m) {
                const KanLayer& lay = rebuilt.layers[m];
                for (int j = 0; j < lay.n_out; ++j) {
                    for (int i = 0; i < lay.n_in; ++i) {
                        const std::size_t dst = rebuilt.edge_offset(static_cast<int>(m), j, i);
                        const std::size_t src = next.edge_offset(static_cast<int>(m), j, i);
                        rebuilt.params[dst] = next.params[src];
                        rebuilt.params[dst + 1] = next.params[src + 1];
                        if (m == l) {
                            std::copy_n(new_coeffs[i].data() + static_cast<std::size_t>(j) * nb_new,
                                        nb_new, rebuilt.params.data() + dst + 2);
                        } else {
                            std::copy_n(next.params.data() + src + 2, lay.coeffs_per_edge,
                                        rebuilt.params.data() + dst + 2);
                        }
                    }
                }
            }
            next = std::move(rebuilt);
        } else {
            next.layers[l].nodes = new_nodes;
            for (int j = 0; j < n_out; ++j) {
                for (int i = 0; i < n_in; ++i) {
                    const std::size_t dst = next.edge_offset(static_cast<int>(l), j, i) + 2;
                    std::copy_n(new_coeffs[i].data() + static_cast<std::size_t>(j) * nb_new, nb_new,
                                next.params.data() + dst);
                }
            }
        }

        // Inputs for the next layer flow through the updated layer.
        if (l + 1 < model.layers.size()) {
            const KanLayer& lay = next.layers[l];
            std::vector<double> out(n * static_cast<std::size_t>(lay.n_out));
            LayerScratch scratch;
            for (std::size_t row = 0; row < n; ++row) {
                apply_layer(next, static_cast<int>(l),
                            std::span<const double>(current.data() + row * lay.n_in,
                                                    static_cast<std::size_t>(lay.n_in)),
                            std::span<double>(out.data() + row * lay.n_out,
                                              static_cast<std::size_t>(lay.n_out)),
                            scratch);
            }
            current = std::move(out);
        }
    }
    next.validate();
    return res;
}

}  // namespace pikan
