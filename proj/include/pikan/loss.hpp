#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pikan/pde.hpp"
#include "pikan/rng.hpp"

namespace pikan {

/// Residual-based attention weights: one multiplier per collocation point,
/// grouped per residual family (family 0 = interior, then one per boundary
/// spec). Initialized at 1 and pulled toward the normalized residual
/// magnitudes with mixing factor eta.
struct RbaWeights {
    double eta = 1e-4;
    std::vector<std::vector<double>> alpha;

    static RbaWeights ones(const CollocationSet& colloc, double eta);
    void validate(const CollocationSet& colloc) const;
};

/// alpha' = (1 - eta) alpha + eta |r| / max|r|, elementwise per family. A
/// family whose residuals are all zero keeps its weights unchanged.
RbaWeights rba_update(const RbaWeights& rba, std::span<const std::vector<double>> residuals);

struct LossBreakdown {
    double total = 0.0;
    double interior = 0.0;
    std::vector<double> boundary;
};

struct LossResult {
    LossBreakdown loss;
    std::vector<std::vector<double>> residuals;  ///< raw residuals per family
};

/// Reusable buffers for the parallel loss/gradient driver.
struct LossScratch {
    std::vector<JetWorkspace> workspaces;  // per thread
    std::vector<GradBuffer> chunk_grads;   // per chunk
    std::vector<double> chunk_sums;
};

/// Physics-informed loss: w_f * mean((alpha r_0)^2) + sum_k w_b^k *
/// mean((alpha r_k)^2). Passing rba = nullptr uses unit weights.
LossResult physics_loss(const PdeProblem& problem, const KanModel& model,
                        const CollocationSet& colloc, const RbaWeights* rba = nullptr);

/// Same, but also accumulates the gradient of the total with respect to
/// every model parameter. Collocation points are processed in fixed-size
/// chunks combined in chunk order, so results do not depend on the thread
/// count.
LossResult physics_loss_grad(const PdeProblem& problem, const KanModel& model,
                             const CollocationSet& colloc, const RbaWeights* rba,
                             GradBuffer& grad, LossScratch& scratch);

/// Loss evaluated through an arbitrary jets provider instead of a network
/// (reference-solution closures in tests).
using JetsProvider =
    std::function<FieldJets(std::span<const double>, std::span<const AxisRequest>)>;
LossResult physics_loss_with(const PdeProblem& problem, const JetsProvider& jets,
                             const CollocationSet& colloc, const RbaWeights* rba = nullptr);

/// Normalized resampling distribution over a candidate set:
/// p_i = |r_i|^a / mean_j |r_j|^a + c, then scaled to sum to one. All-zero
/// residuals with c = 0 fall back to the uniform distribution.
std::vector<double> rad_probabilities(std::span<const double> residuals, double a, double c);

struct RadResult {
    std::vector<double> interior;  ///< [n_f x dim] resampled collocation points
    RbaWeights rba;                ///< interior weights reset to their mean
    KanModel model;                ///< grids re-adapted to the new points
    std::vector<std::string> warnings;
};

/// Residual-based adaptive resampling: score a 16x denser Sobol candidate
/// set by residual magnitude, draw n_f points without replacement, reset
/// the interior attention weights to their mean, and re-adapt the model
/// grids to the new points. `sobol_cursor` advances so repeated calls see
/// fresh candidates.
RadResult rad_resample(const PdeProblem& problem, const KanModel& model, std::size_t n_f,
                       double a, double c, const RbaWeights& rba, const GridMixConfig& cfg,
                       uint64_t& sobol_cursor, Rng& rng);

/// Relative L2 error of `u` against the reference over the given points.
double relative_l2(const std::function<double(std::span<const double>)>& u,
                   const ReferenceSolution& reference, std::span<const double> points,
                   std::size_t n, int dim);

/// Cell-center lattice over a 2-d box, row-major [resolution^2 x 2].
std::vector<double> eval_lattice(const Box& box, int resolution);

/// Relative L2 error of the model on the default cell-center lattice.
double relative_l2(const KanModel& model, const PdeProblem& problem, int resolution = 256);

}  // namespace pikan
