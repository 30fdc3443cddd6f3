#include "pikan/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pikan/errors.hpp"
#include "pikan/parallel.hpp"
#include "pikan/sobol.hpp"

namespace pikan {

RbaWeights RbaWeights::ones(const CollocationSet& colloc, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ArgumentError("RbaWeights: eta must lie in [0, 1]");
    RbaWeights rba;
    rba.eta = eta;
    rba.alpha.emplace_back(colloc.n_interior, 1.0);
    for (std::size_t f = 0; f < colloc.boundary.size(); ++f) {
        rba.alpha.emplace_back(colloc.n_boundary[f], 1.0);
    }
    return rba;
}

void RbaWeights::validate(const CollocationSet& colloc) const {
    if (alpha.size() != colloc.boundary.size() + 1) {
        throw ArgumentError("RbaWeights: family count mismatch");
    }
    if (alpha[0].size() != colloc.n_interior) throw ArgumentError("RbaWeights: interior size");
    for (std::size_t f = 0; f < colloc.boundary.size(); ++f) {
        if (alpha[f + 1].size() != colloc.n_boundary[f]) {
            throw ArgumentError("RbaWeights: boundary family size mismatch");
        }
    }
}

RbaWeights rba_update(const RbaWeights& rba, std::span<const std::vector<double>> residuals) {
    if (residuals.size() != rba.alpha.size()) {
        throw ArgumentError("rba_update: family count mismatch");
    }
    RbaWeights next = rba;
    for (std::size_t f = 0; f < residuals.size(); ++f) {
        const std::vector<double>& r = residuals[f];
        std::vector<double>& a = next.alpha[f];
        if (r.size() != a.size()) throw ArgumentError("rba_update: residual size mismatch");
        double rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
        if (rmax == 0.0) continue;  // division by zero: skip this family
        const double eta = rba.eta;
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = (1.0 - eta) * a[i] + eta * std::abs(r[i]) / rmax;
        }
    }
    return next;
}

namespace {

struct FamilyTask {
    const double* points;
    std::size_t n;
    const double* alpha;  // may be null
    double weight;
    bool interior;
    std::size_t boundary_index = 0;
};

/// Accumulates one family's squared-residual sum and (optionally) gradient.
/// Deterministic: fixed chunking, chunk partials combined in order.
double family_pass(const PdeProblem& problem, const KanModel& model, const FamilyTask& task,
                   std::vector<double>& residuals_out, GradBuffer* grad, LossScratch* scratch) {
    const int dim = problem.dim();
    residuals_out.resize(task.n);
    const std::size_t nchunks = chunk_count(task.n);

    std::vector<double> chunk_sums(nchunks, 0.0);
    const bool with_grad = grad != nullptr;
    if (with_grad) {
        if (scratch->workspaces.size() < static_cast<std::size_t>(max_threads())) {
            scratch->workspaces.resize(max_threads());
        }
        if (scratch->chunk_grads.size() < nchunks) scratch->chunk_grads.resize(nchunks);
        for (std::size_t c = 0; c < nchunks; ++c) {
            if (scratch->chunk_grads[c].size() != model.param_count()) {
                scratch->chunk_grads[c] = GradBuffer(model.param_count());
            } else {
                scratch->chunk_grads[c].zero();
            }
        }
    }

    const BoundarySpec* bspec = task.interior ? nullptr : &problem.boundaries[task.boundary_index];
    const std::vector<AxisRequest> no_axes;

#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        JetWorkspace local_ws;
        JetWorkspace& ws = with_grad ? scratch->workspaces[thread_index()] : local_ws;
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
        for (long c = 0; c < static_cast<long>(nchunks); ++c) {
            const std::size_t begin = static_cast<std::size_t>(c) * kReduceChunk;
            const std::size_t end = std::min(begin + kReduceChunk, task.n);
            GradBuffer* cg = with_grad ? &scratch->chunk_grads[c] : nullptr;
            double sum = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                std::span<const double> x(task.points + i * dim, static_cast<std::size_t>(dim));
                const std::span<const AxisRequest> axes =
                    task.interior ? std::span<const AxisRequest>(problem.axes) : no_axes;
                const FieldJets jets = model_jets(model, problem.domain, x, axes, ws);
                const double r = task.interior ? problem.residual(x, jets)
                                               : jets.u - bspec->target(x);
                residuals_out[i] = r;
                const double a = task.alpha ? task.alpha[i] : 1.0;
                const double ar = a * r;
                sum += ar * ar;
                if (with_grad) {
                    const double seed =
                        2.0 * task.weight * a * a * r / static_cast<double>(task.n);
                    FieldAdjoint adj;
                    if (task.interior) {
                        problem.residual_partials(x, jets, adj);
                        const std::vector<AxisRequest> scaled = scaled_axes(problem.domain, axes);
                        adj.u *= seed;
                        for (std::size_t s = 0; s < scaled.size(); ++s) {
                            adj.d1[s] *= seed;
                            adj.d2[s] *= seed;
                        }
                        jet_backward(model, scaled, adj, ws, *cg);
                    } else {
                        adj.u = seed;
                        jet_backward(model, no_axes, adj, ws, *cg);
                    }
                }
            }
            chunk_sums[c] = sum;
        }
    }

    if (with_grad) {
        for (std::size_t c = 0; c < nchunks; ++c) grad->add(scratch->chunk_grads[c]);
    }
    double total = 0.0;
    for (double s : chunk_sums) total += s;
    return total;
}

LossResult assemble(const PdeProblem& problem, const KanModel& model, const CollocationSet& colloc,
                    const RbaWeights* rba, GradBuffer* grad, LossScratch* scratch) {
    problem.validate();
    colloc.validate(problem);
    if (rba) rba->validate(colloc);
    if (grad && grad->size() != model.param_count()) {
        throw ArgumentError("physics_loss_grad: gradient buffer size mismatch");
    }

    LossResult res;
    res.residuals.resize(problem.n_families());

    FamilyTask interior{colloc.interior.data(), colloc.n_interior,
                        rba ? rba->alpha[0].data() : nullptr, problem.w_f, true, 0};
    const double sum_f = family_pass(problem, model, interior, res.residuals[0], grad, scratch);
    res.loss.interior = sum_f / static_cast<double>(colloc.n_interior);
    res.loss.total = problem.w_f * res.loss.interior;

    res.loss.boundary.resize(problem.boundaries.size());
    for (std::size_t f = 0; f < problem.boundaries.size(); ++f) {
        FamilyTask bt{colloc.boundary[f].data(), colloc.n_boundary[f],
                      rba ? rba->alpha[f + 1].data() : nullptr, problem.w_b[f], false, f};
        const double sum_b = family_pass(problem, model, bt, res.residuals[f + 1], grad, scratch);
        res.loss.boundary[f] = sum_b / static_cast<double>(colloc.n_boundary[f]);
        res.loss.total += problem.w_b[f] * res.loss.boundary[f];
    }
    return res;
}

}  // namespace

LossResult physics_loss(const PdeProblem& problem, const KanModel& model,
                        const CollocationSet& colloc, const RbaWeights* rba) {
    return assemble(problem, model, colloc, rba, nullptr, nullptr);
}

LossResult physics_loss_grad(const PdeProblem& problem, const KanModel& model,
                             const CollocationSet& colloc, const RbaWeights* rba,
                             GradBuffer& grad, LossScratch& scratch) {
    grad.values.assign(model.param_count(), 0.0);
    return assemble(problem, model, colloc, rba, &grad, &scratch);
}

LossResult physics_loss_with(const PdeProblem& problem, const JetsProvider& jets,
                             const CollocationSet& colloc, const RbaWeights* rba) {
    problem.validate();
    colloc.validate(problem);
    if (rba) rba->validate(colloc);
    const int dim = problem.dim();

    LossResult res;
    res.residuals.resize(problem.n_families());
    res.residuals[0].resize(colloc.n_interior);
    double sum = 0.0;
    for (std::size_t i = 0; i < colloc.n_interior; ++i) {
        std::span<const double> x(colloc.interior.data() + i * dim, static_cast<std::size_t>(dim));
        const double r = problem.residual(x, jets(x, problem.axes));
        res.residuals[0][i] = r;
        const double a = rba ? rba->alpha[0][i] : 1.0;
        sum += a * r * a * r;
    }
    res.loss.interior = sum / static_cast<double>(colloc.n_interior);
    res.loss.total = problem.w_f * res.loss.interior;

    res.loss.boundary.resize(problem.boundaries.size());
    for (std::size_t f = 0; f < problem.boundaries.size(); ++f) {
        std::vector<double>& rf = res.residuals[f + 1];
        rf.resize(colloc.n_boundary[f]);
        double bsum = 0.0;
        for (std::size_t i = 0; i < colloc.n_boundary[f]; ++i) {
            std::span<const double> x(colloc.boundary[f].data() + i * dim,
                                      static_cast<std::size_t>(dim));
            const double r = jets(x, {}).u - problem.boundaries[f].target(x);
            rf[i] = r;
            const double a = rba ? rba->alpha[f + 1][i] : 1.0;
            bsum += a * r * a * r;
        }
        res.loss.boundary[f] = bsum / static_cast<double>(colloc.n_boundary[f]);
        res.loss.total += problem.w_b[f] * res.loss.boundary[f];
    }
    return res;
}

std::vector<double> rad_probabilities(std::span<const double> residuals, double a, double c) {
    if (a < 0.0 || c < 0.0) throw ArgumentError("rad_probabilities: a and c must be >= 0");
    const std::size_t n = residuals.size();
    if (n == 0) throw ArgumentError("rad_probabilities: empty residual set");

    std::vector<double> p(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::pow(std::abs(residuals[i]), a);
        mean += p[i];
    }
    mean /= static_cast<double>(n);
    if (mean == 0.0) {
        if (c == 0.0) {
            std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
            return p;
        }
        std::fill(p.begin(), p.end(), 0.0);
    } else {
        for (double& v : p) v /= mean;
    }
    double total = 0.0;
    for (double& v : p) {
        v += c;
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

RadResult rad_resample(const PdeProblem& problem, const KanModel& model, std::size_t n_f,
                       double a, double c, const RbaWeights& rba, const GridMixConfig& cfg,
                       uint64_t& sobol_cursor, Rng& rng) {
    const int dim = problem.dim();
    const std::size_t n_dense = 16 * n_f;
    std::vector<double> dense =
        sobol_sample(problem.domain.lo, problem.domain.hi, n_dense, sobol_cursor);
    sobol_cursor += n_dense;

    const std::vector<double> residuals = pde_residual(problem, model, dense, n_dense);
    const std::vector<double> p = rad_probabilities(residuals, a, c);

    // Weighted sampling without replacement via exponential races: the n_f
    // smallest keys -log(u)/p win. Zero-probability points only fill in
    // after every positive-probability point.
    std::vector<std::pair<double, std::size_t>> keys(n_dense);
    for (std::size_t i = 0; i < n_dense; ++i) {
        const double u = 1.0 - rng.uniform();
        const double key = p[i] > 0.0 ? -std::log(u) / p[i]
                                      : std::numeric_limits<double>::max() * (0.5 + 0.25 * u);
        keys[i] = {key, i};
    }
    if (n_f > n_dense) throw ArgumentError("rad_resample: n_f exceeds the candidate set");
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_f), keys.end());

    RadResult res{.interior = std::vector<double>(n_f * static_cast<std::size_t>(dim)),
                  .rba = rba,
                  .model = model,
                  .warnings = {}};
    for (std::size_t i = 0; i < n_f; ++i) {
        const std::size_t src = keys[i].second;
        std::copy_n(dense.data() + src * dim, dim, res.interior.data() + i * dim);
    }

    // Interior attention weights restart from their mean.
    const std::vector<double>& old_alpha = rba.alpha[0];
    double mean_alpha = 0.0;
    for (double v : old_alpha) mean_alpha += v;
    mean_alpha /= static_cast<double>(old_alpha.size());
    res.rba.alpha[0].assign(n_f, mean_alpha);

    // Grids follow the new collocation points.
    std::vector<double> mapped(n_f * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n_f; ++i) {
        map_to_model(problem.domain,
                     std::span<const double>(res.interior.data() + i * dim,
                                             static_cast<std::size_t>(dim)),
                     std::span<double>(mapped.data() + i * dim, static_cast<std::size_t>(dim)));
    }
    GridUpdateResult upd = update_grids(model, mapped, n_f, std::nullopt, cfg);
    res.model = std::move(upd.model);
    res.warnings = std::move(upd.warnings);
    return res;
}

double relative_l2(const std::function<double(std::span<const double>)>& u,
                   const ReferenceSolution& reference, std::span<const double> points,
                   std::size_t n, int dim) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> x(points.data() + i * dim, static_cast<std::size_t>(dim));
        const double ur = reference(x);
        const double diff = ur - u(x);
        num += diff * diff;
        den += ur * ur;
    }
    if (den == 0.0) throw ArgumentError("relative_l2: reference norm is zero");
    return std::sqrt(num / den);
}

std::vector<double> eval_lattice(const Box& box, int resolution) {
    if (box.dim() != 2) throw ArgumentError("eval_lattice: only 2-d boxes supported");
    if (resolution < 1) throw ArgumentError("eval_lattice: resolution must be >= 1");
    std::vector<double> pts(static_cast<std::size_t>(resolution) * resolution * 2);
    std::size_t idx = 0;
    for (int i = 0; i < resolution; ++i) {
        const double a = box.lo[0] + (box.hi[0] - box.lo[0]) * (i + 0.5) / resolution;
        for (int j = 0; j < resolution; ++j) {
            const double b = box.lo[1] + (box.hi[1] - box.lo[1]) * (j + 0.5) / resolution;
            pts[idx++] = a;
            pts[idx++] = b;
        }
    }
    return pts;
}

double relative_l2(const KanModel& model, const PdeProblem& problem, int resolution) {
    if (!problem.reference) throw ArgumentError("relative_l2: problem has no reference solution");
    const std::vector<double> pts = eval_lattice(problem.domain, resolution);
    const std::size_t n = static_cast<std::size_t>(resolution) * resolution;

    // Batch-map and evaluate, then reduce serially for determinism.
    std::vector<double> mapped(pts.size());
    for (std::size_t i = 0; i < n; ++i) {
        map_to_model(problem.domain, std::span<const double>(pts.data() + i * 2, 2),
                     std::span<double>(mapped.data() + i * 2, 2));
    }
    const std::vector<double> u = forward(model, mapped, n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ur = (*problem.reference)(std::span<const double>(pts.data() + i * 2, 2));
        const double diff = ur - u[i];
        num += diff * diff;
        den += ur * ur;
    }
    if (den == 0.0) throw ArgumentError("relative_l2: reference norm is zero");
    return std::sqrt(num / den);
}

}  // namespace pikan
