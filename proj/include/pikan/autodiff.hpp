#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "pikan/model.hpp"

namespace pikan {

inline constexpr int kMaxAxes = 4;

/// Request for input derivatives along one coordinate axis. `seed` scales
/// the direction (chain-rule factor when the model input is an affine map
/// of the physical coordinate).
struct AxisRequest {
    int axis = 0;
    int order = 2;  ///< 1 or 2
    double seed = 1.0;
};

/// Network output with its input derivatives, one slot per requested axis.
struct FieldJets {
    double u = 0.0;
    std::array<double, kMaxAxes> d1{};
    std::array<double, kMaxAxes> d2{};
    bool d2_piecewise = false;  ///< set for R-basis models: d2 jumps at support ends
};

/// Adjoint seeds for the components of FieldJets.
struct FieldAdjoint {
    double u = 0.0;
    std::array<double, kMaxAxes> d1{};
    std::array<double, kMaxAxes> d2{};
};

/// Flat gradient buffer, congruent with KanModel::params.
struct GradBuffer {
    std::vector<double> values;

    GradBuffer() = default;
    explicit GradBuffer(std::size_t n) : values(n, 0.0) {}

    void zero() { std::fill(values.begin(), values.end(), 0.0); }
    void add(const GradBuffer& o) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    }
    std::size_t size() const { return values.size(); }
};

/// Per-point evaluation trace: layer input jets, univariate tables, and
/// per-edge basis sums. One workspace per thread; forward fills it,
/// backward consumes it.
class JetWorkspace {
 public:
    struct NodeTrace {
        double z0 = 0.0;
        std::array<double, kMaxAxes> zd1{};
        std::array<double, kMaxAxes> zd2{};
        std::array<double, 4> s{};  // silu derivatives at z0
        BasisWindow w;
    };

    std::vector<std::vector<NodeTrace>> nodes;       // [layer 0..L][node]
    std::vector<std::vector<double>> edge_sums;      // [layer][(j*n_in+i)*4 + order]
    std::vector<std::vector<std::array<double, 2 * kMaxAxes + 1>>> adj;
    int n_axes = 0;
    int dmax = 0;

    void bind(const KanModel& model);
};

/// Forward pass recording the trace; returns the output jets. The model
/// must have a single output node.
FieldJets jet_forward(const KanModel& model, std::span<const double> x,
                      std::span<const AxisRequest> axes, JetWorkspace& ws);

/// Reverse pass over the recorded trace, accumulating d(seeded loss)/d(params).
void jet_backward(const KanModel& model, std::span<const AxisRequest> axes,
                  const FieldAdjoint& seed, JetWorkspace& ws, GradBuffer& grad);

/// Value, first and second derivative of the network output along one input
/// axis. Spline models require order k >= 2; R-basis results carry the
/// piecewise-d2 flag.
struct InputDerivs {
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
    bool d2_piecewise = false;
};
InputDerivs eval_with_input_derivs(const KanModel& model, std::span<const double> x, int axis);

/// One additive term of a scalar loss: a point, the axis jets it needs, and
/// a local function returning its value and (optionally) its partials with
/// respect to the jet components. The engine differentiates through the
/// network; the term supplies only its own local chain-rule factors.
struct LossTerm {
    std::vector<double> x;
    std::vector<AxisRequest> axes;
    std::function<double(const FieldJets&, FieldAdjoint*)> fn;
    double weight = 1.0;
};

double loss_value(const KanModel& model, std::span<const LossTerm> terms);
GradBuffer loss_gradient(const KanModel& model, std::span<const LossTerm> terms);

}  // namespace pikan
