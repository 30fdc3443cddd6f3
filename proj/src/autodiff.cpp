#include "pikan/autodiff.hpp"

#include <cmath>
#include <string>

#include "pikan/errors.hpp"

namespace pikan {

namespace {

void validate_axes(const KanModel& model, std::span<const AxisRequest> axes) {
    if (model.out_dim() != 1) {
        throw ArgumentError("jet evaluation: multi-output models are unsupported");
    }
    if (axes.size() > kMaxAxes) throw ArgumentError("jet evaluation: too many axis requests");
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const AxisRequest& r = axes[a];
        if (r.axis < 0 || r.axis >= model.dim()) {
            throw ArgumentError("jet evaluation: axis index out of range");
        }
        if (r.order != 1 && r.order != 2) {
            throw ArgumentError("jet evaluation: derivative order " + std::to_string(r.order) +
                                " unsupported (only 1 and 2)");
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (axes[b].axis == r.axis) {
                throw ArgumentError(
                    "jet evaluation: duplicate axis request (mixed partials are unsupported)");
            }
        }
        if (model.family.kind == BasisKind::Spline && r.order > model.family.k) {
            throw ArgumentError("jet evaluation: derivative order " + std::to_string(r.order) +
                                " exceeds spline order " + std::to_string(model.family.k));
        }
    }
}

}  // namespace

void JetWorkspace::bind(const KanModel& model) {
    const std::size_t nl = model.layers.size();
    if (nodes.size() != nl + 1) nodes.resize(nl + 1);
    if (edge_sums.size() != nl) edge_sums.resize(nl);
    if (adj.size() != nl + 1) adj.resize(nl + 1);
    for (std::size_t l = 0; l <= nl; ++l) {
        const std::size_t width = static_cast<std::size_t>(model.shape[l]);
        if (nodes[l].size() != width) nodes[l].resize(width);
        if (adj[l].size() != width) adj[l].resize(width);
    }
    for (std::size_t l = 0; l < nl; ++l) {
        const std::size_t ne =
            static_cast<std::size_t>(model.layers[l].n_in) * model.layers[l].n_out * 4;
        if (edge_sums[l].size() != ne) edge_sums[l].resize(ne);
    }
}

FieldJets jet_forward(const KanModel& model, std::span<const double> x,
                      std::span<const AxisRequest> axes, JetWorkspace& ws) {
    validate_axes(model, axes);
    if (x.size() != static_cast<std::size_t>(model.dim())) {
        throw ArgumentError("jet_forward: input dimension mismatch");
    }
    ws.bind(model);
    const int A = static_cast<int>(axes.size());
    ws.n_axes = A;
    int dfwd = 0;
    for (const AxisRequest& r : axes) dfwd = std::max(dfwd, r.order);
    const int dmax = std::min(dfwd + 1, 3);
    ws.dmax = dmax;

    // Seed the input layer.
    for (int i = 0; i < model.dim(); ++i) {
        JetWorkspace::NodeTrace& nt = ws.nodes[0][i];
        nt.z0 = x[i];
        for (int a = 0; a < A; ++a) {
            nt.zd1[a] = axes[a].axis == i ? axes[a].seed : 0.0;
            nt.zd2[a] = 0.0;
        }
    }

    const int L = static_cast<int>(model.layers.size());
    for (int l = 0; l < L; ++l) {
        const KanLayer& layer = model.layers[l];
        std::vector<JetWorkspace::NodeTrace>& in = ws.nodes[l];
        std::vector<JetWorkspace::NodeTrace>& out = ws.nodes[l + 1];
        double* sums = ws.edge_sums[l].data();

        for (int i = 0; i < layer.n_in; ++i) {
            JetWorkspace::NodeTrace& nt = in[i];
            layer.nodes[i].window(nt.z0, dmax, nt.w);
            silu_derivs(nt.z0, dmax, nt.s.data());
        }
        for (int j = 0; j < layer.n_out; ++j) {
            JetWorkspace::NodeTrace& oj = out[j];
            oj.z0 = 0.0;
            for (int a = 0; a < A; ++a) {
                oj.zd1[a] = 0.0;
                oj.zd2[a] = 0.0;
            }
        }

        const double* lp = model.params.data() + model.layer_offset(l);
        const int ep = layer.edge_params();
        for (int j = 0; j < layer.n_out; ++j) {
            JetWorkspace::NodeTrace& oj = out[j];
            const double* edge = lp + static_cast<std::size_t>(j) * layer.n_in * ep;
            double* esum = sums + static_cast<std::size_t>(j) * layer.n_in * 4;
            for (int i = 0; i < layer.n_in; ++i, edge += ep, esum += 4) {
                const JetWorkspace::NodeTrace& nt = in[i];
                const double* c = edge + 2 + nt.w.lo;
                double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
                switch (dmax) {
                    case 0:
                        for (int m = 0; m < nt.w.count; ++m) s0 += c[m] * nt.w.d[0][m];
                        break;
                    case 1:
                        for (int m = 0; m < nt.w.count; ++m) {
                            s0 += c[m] * nt.w.d[0][m];
                            s1 += c[m] * nt.w.d[1][m];
                        }
                        break;
                    case 2:
                        for (int m = 0; m < nt.w.count; ++m) {
                            s0 += c[m] * nt.w.d[0][m];
                            s1 += c[m] * nt.w.d[1][m];
                            s2 += c[m] * nt.w.d[2][m];
                        }
                        break;
                    default:
                        for (int m = 0; m < nt.w.count; ++m) {
                            s0 += c[m] * nt.w.d[0][m];
                            s1 += c[m] * nt.w.d[1][m];
                            s2 += c[m] * nt.w.d[2][m];
                            s3 += c[m] * nt.w.d[3][m];
                        }
                        break;
                }
                esum[0] = s0;
                esum[1] = s1;
                esum[2] = s2;
                esum[3] = s3;

                const double cr = edge[0], cb = edge[1];
                const double f0 = cr * nt.s[0] + cb * s0;
                oj.z0 += f0;
                if (A > 0) {
                    const double f1 = cr * nt.s[1] + cb * s1;
                    const double f2 = dmax >= 2 ? cr * nt.s[2] + cb * s2 : 0.0;
                    for (int a = 0; a < A; ++a) {
                        oj.zd1[a] += f1 * nt.zd1[a];
                        oj.zd2[a] += f2 * nt.zd1[a] * nt.zd1[a] + f1 * nt.zd2[a];
                    }
                }
            }
        }
    }

    FieldJets res;
    res.u = ws.nodes[L][0].z0;
    for (int a = 0; a < A; ++a) {
        res.d1[a] = ws.nodes[L][0].zd1[a];
        res.d2[a] = ws.nodes[L][0].zd2[a];
    }
    if (model.family.kind == BasisKind::ReluR && dfwd >= 2) res.d2_piecewise = true;
    return res;
}

void jet_backward(const KanModel& model, std::span<const AxisRequest> axes,
                  const FieldAdjoint& seed, JetWorkspace& ws, GradBuffer& grad) {
    if (grad.size() != model.param_count()) {
        throw ArgumentError("jet_backward: gradient buffer size mismatch");
    }
    const int A = ws.n_axes;
    if (A != static_cast<int>(axes.size())) {
        throw ArgumentError("jet_backward: axes do not match the recorded trace");
    }
    const int dmax = ws.dmax;
    const int L = static_cast<int>(model.layers.size());

    // Seed the output node: slot 0 is the adjoint of the value, then first
    // and second derivative adjoints per axis.
    auto& out_adj = ws.adj[L];
    out_adj[0][0] = seed.u;
    for (int a = 0; a < A; ++a) {
        out_adj[0][1 + a] = seed.d1[a];
        out_adj[0][1 + kMaxAxes + a] = seed.d2[a];
    }

    for (int l = L - 1; l >= 0; --l) {
        const KanLayer& layer = model.layers[l];
        const std::vector<JetWorkspace::NodeTrace>& in = ws.nodes[l];
        auto& adj_out = ws.adj[l + 1];
        auto& adj_in = ws.adj[l];
        if (l > 0) {
            for (int i = 0; i < layer.n_in; ++i) adj_in[i].fill(0.0);
        }

        const double* lp = model.params.data() + model.layer_offset(l);
        double* gp = grad.values.data() + model.layer_offset(l);
        const int ep = layer.edge_params();
        const double* sums = ws.edge_sums[l].data();

        for (int j = 0; j < layer.n_out; ++j) {
            const double a0 = adj_out[j][0];
            const double* a1 = adj_out[j].data() + 1;
            const double* a2 = adj_out[j].data() + 1 + kMaxAxes;
            const double* edge = lp + static_cast<std::size_t>(j) * layer.n_in * ep;
            double* gedge = gp + static_cast<std::size_t>(j) * layer.n_in * ep;
            const double* esum = sums + static_cast<std::size_t>(j) * layer.n_in * 4;
            for (int i = 0; i < layer.n_in; ++i, edge += ep, gedge += ep, esum += 4) {
                const JetWorkspace::NodeTrace& nt = in[i];
                // Collapse the per-axis adjoints into weights on successive
                // derivative levels of the edge activation.
                double w1 = 0.0, w2 = 0.0;
                for (int a = 0; a < A; ++a) {
                    w1 += a1[a] * nt.zd1[a] + a2[a] * nt.zd2[a];
                    w2 += a2[a] * nt.zd1[a] * nt.zd1[a];
                }
                const double w0 = a0;

                gedge[0] += w0 * nt.s[0] + w1 * nt.s[1] + w2 * nt.s[2];
                gedge[1] += w0 * esum[0] + w1 * esum[1] + w2 * esum[2];

                const double cr = edge[0], cb = edge[1];
                const double cw0 = cb * w0, cw1 = cb * w1, cw2 = cb * w2;
                double* gc = gedge + 2 + nt.w.lo;
                if (dmax >= 2) {
                    for (int m = 0; m < nt.w.count; ++m) {
                        gc[m] += cw0 * nt.w.d[0][m] + cw1 * nt.w.d[1][m] + cw2 * nt.w.d[2][m];
                    }
                } else if (dmax == 1) {
                    for (int m = 0; m < nt.w.count; ++m) {
                        gc[m] += cw0 * nt.w.d[0][m] + cw1 * nt.w.d[1][m];
                    }
                } else {
                    for (int m = 0; m < nt.w.count; ++m) gc[m] += cw0 * nt.w.d[0][m];
                }

                if (l > 0) {
                    const double f1 = cr * nt.s[1] + cb * esum[1];
                    const double f2 = dmax >= 2 ? cr * nt.s[2] + cb * esum[2] : 0.0;
                    const double f3 = dmax >= 3 ? cr * nt.s[3] + cb * esum[3] : 0.0;
                    auto& ai = adj_in[i];
                    ai[0] += w0 * f1 + w1 * f2 + w2 * f3;
                    for (int a = 0; a < A; ++a) {
                        ai[1 + a] += a1[a] * f1 + 2.0 * f2 * nt.zd1[a] * a2[a];
                        ai[1 + kMaxAxes + a] += a2[a] * f1;
                    }
                }
            }
        }
    }
}

InputDerivs eval_with_input_derivs(const KanModel& model, std::span<const double> x, int axis) {
    if (model.family.kind == BasisKind::Spline && model.family.k < 2) {
        throw ArgumentError(
            "eval_with_input_derivs: second-order derivatives need spline order k >= 2");
    }
    JetWorkspace ws;
    const AxisRequest req{axis, 2, 1.0};
    const FieldJets jets = jet_forward(model, x, std::span<const AxisRequest>(&req, 1), ws);
    return {jets.u, jets.d1[0], jets.d2[0], jets.d2_piecewise};
}

double loss_value(const KanModel& model, std::span<const LossTerm> terms) {
    JetWorkspace ws;
    double total = 0.0;
    for (const LossTerm& term : terms) {
        const FieldJets jets = jet_forward(model, term.x, term.axes, ws);
        total += term.weight * term.fn(jets, nullptr);
    }
    return total;
}

GradBuffer loss_gradient(const KanModel& model, std::span<const LossTerm> terms) {
    JetWorkspace ws;
    GradBuffer grad(model.param_count());
    for (const LossTerm& term : terms) {
        const FieldJets jets = jet_forward(model, term.x, term.axes, ws);
        FieldAdjoint adj;
        term.fn(jets, &adj);
        adj.u *= term.weight;
        for (int a = 0; a < kMaxAxes; ++a) {
            adj.d1[a] *= term.weight;
            adj.d2[a] *= term.weight;
        }
        jet_backward(model, term.axes, adj, ws, grad);
    }
    return grad;
}

}  // namespace pikan
