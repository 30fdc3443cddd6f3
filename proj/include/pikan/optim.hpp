#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pikan/autodiff.hpp"
#include "pikan/model.hpp"

namespace pikan {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool nesterov = true;
};

/// Adam state: step count plus first/second moment buffers congruent with
/// the model's flat parameter layout.
struct AdamState {
    long t = 0;
    std::vector<double> m;
    std::vector<double> v;
    AdamHyper hyper;

    static AdamState init(std::size_t n, const AdamHyper& hyper = {});
    bool operator==(const AdamState&) const = default;
};

/// One Adam step with bias correction; with `nesterov` set, the update
/// direction is the look-ahead blend beta1 * m_hat + (1 - beta1) * g_hat.
/// Throws on non-finite gradients, naming the parameter block.
std::pair<KanModel, AdamState> adam_step(const KanModel& model, const AdamState& state,
                                         const GradBuffer& grads, double lr);

/// Carry the optimizer state across a grid extension: the step count and
/// the c_r / c_B moments are copied unchanged, and each edge's coefficient
/// moments are linearly interpolated from the old basis size to the new one
/// on normalized index positions.
AdamState transition_state(const AdamState& state, const KanModel& old_model,
                           const KanModel& new_model);

/// Piecewise-multiplicative learning-rate schedule: the base rate times the
/// product of all factors whose epoch has been reached.
struct LrSchedule {
    double base_lr = 1e-3;
    std::vector<std::pair<long, double>> events;  ///< (epoch, factor), epochs strictly increasing

    void validate() const;
};

double lr_at(const LrSchedule& schedule, long epoch);

}  // namespace pikan
