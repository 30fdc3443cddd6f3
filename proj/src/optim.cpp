#include "pikan/optim.hpp"

#include <cmath>
#include <string>

#include "pikan/errors.hpp"

namespace pikan {

AdamState AdamState::init(std::size_t n, const AdamHyper& hyper) {
    AdamState s;
    s.t = 0;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.hyper = hyper;
    return s;
}

std::pair<KanModel, AdamState> adam_step(const KanModel& model, const AdamState& state,
                                         const GradBuffer& grads, double lr) {
    const std::size_t n = model.param_count();
    if (state.m.size() != n || state.v.size() != n || grads.size() != n) {
        throw ArgumentError("adam_step: buffer sizes incongruent with the model");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(grads.values[i])) {
            throw EvalError("adam_step: non-finite gradient in " + model.param_block_name(i));
        }
    }

    KanModel next_model = model;
    AdamState next = state;
    next.t = state.t + 1;
    const AdamHyper& h = state.hyper;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(next.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(next.t));

    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads.values[i];
        const double m = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
        const double v = h.beta2 * state.v[i] + (1.0 - h.beta2) * g * g;
        next.m[i] = m;
        next.v[i] = v;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        const double dir = h.nesterov ? h.beta1 * m_hat + (1.0 - h.beta1) * g / bc1 : m_hat;
        next_model.params[i] -= lr * dir / (std::sqrt(v_hat) + h.eps);
    }
    return {std::move(next_model), std::move(next)};
}

namespace {

/// Linear interpolation of a moment vector onto a larger basis, with both
/// index ranges normalized to [0, 1]. The a + w (b - a) form keeps constant
/// vectors exact; results are clamped to the source hull.
void interp_block(std::span<const double> src, std::span<double> dst) {
    const std::size_t n_old = src.size();
    const std::size_t n_new = dst.size();
    if (n_old == n_new) {
        std::copy(src.begin(), src.end(), dst.begin());
        return;
    }
    if (n_old == 1) {
        std::fill(dst.begin(), dst.end(), src[0]);
        return;
    }
    for (std::size_t j = 0; j < n_new; ++j) {
        const double pos = static_cast<double>(j) * static_cast<double>(n_old - 1) /
                           static_cast<double>(n_new - 1);
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= n_old - 1) i = n_old - 2;
        const double w = pos - static_cast<double>(i);
        const double a = src[i], b = src[i + 1];
        double out = a + w * (b - a);
        const double lo = std::min(a, b), hi = std::max(a, b);
        if (out < lo) out = lo;
        if (out > hi) out = hi;
        dst[j] = out;
    }
}

}  // namespace

AdamState transition_state(const AdamState& state, const KanModel& old_model,
                           const KanModel& new_model) {
    if (state.m.size() != old_model.param_count()) {
        throw ArgumentError("transition_state: state incongruent with the old model");
    }
    if (old_model.shape != new_model.shape) {
        throw ArgumentError("transition_state: model shapes differ");
    }
    for (std::size_t l = 0; l < old_model.layers.size(); ++l) {
        if (new_model.layers[l].coeffs_per_edge < old_model.layers[l].coeffs_per_edge) {
            throw ArgumentError("transition_state: grids can only grow, not shrink");
        }
    }

    AdamState next;
    next.t = state.t;
    next.hyper = state.hyper;
    next.m.assign(new_model.param_count(), 0.0);
    next.v.assign(new_model.param_count(), 0.0);

    for (std::size_t l = 0; l < old_model.layers.size(); ++l) {
        const KanLayer& ol = old_model.layers[l];
        const KanLayer& nl = new_model.layers[l];
        for (int j = 0; j < ol.n_out; ++j) {
            for (int i = 0; i < ol.n_in; ++i) {
                const std::size_t so = old_model.edge_offset(static_cast<int>(l), j, i);
                const std::size_t sn = new_model.edge_offset(static_cast<int>(l), j, i);
                next.m[sn] = state.m[so];
                next.m[sn + 1] = state.m[so + 1];
                next.v[sn] = state.v[so];
                next.v[sn + 1] = state.v[so + 1];
                interp_block({state.m.data() + so + 2, static_cast<std::size_t>(ol.coeffs_per_edge)},
                             {next.m.data() + sn + 2, static_cast<std::size_t>(nl.coeffs_per_edge)});
                interp_block({state.v.data() + so + 2, static_cast<std::size_t>(ol.coeffs_per_edge)},
                             {next.v.data() + sn + 2, static_cast<std::size_t>(nl.coeffs_per_edge)});
            }
        }
    }
    return next;
}

void LrSchedule::validate() const {
    if (!(base_lr > 0.0)) throw ArgumentError("LrSchedule: base_lr must be positive");
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (!(events[i].second > 0.0)) throw ArgumentError("LrSchedule: factors must be positive");
        if (i > 0 && events[i].first <= events[i - 1].first) {
            throw ArgumentError("LrSchedule: event epochs must be strictly increasing");
        }
    }
}

double lr_at(const LrSchedule& schedule, long epoch) {
    if (epoch < 0) throw ArgumentError("lr_at: epoch must be non-negative");
    double lr = schedule.base_lr;
    for (const auto& [e, factor] : schedule.events) {
        if (e <= epoch) lr *= factor;
    }
    return lr;
}

}  // namespace pikan
