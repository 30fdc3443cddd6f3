#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pikan/autodiff.hpp"
#include "pikan/jet.hpp"

namespace pikan {

/// Axis-aligned box domain.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    void validate() const;
};

/// Reference solution: either an analytic closure or a gridded table with
/// bilinear interpolation (2-d tensor grids only).
class ReferenceSolution {
 public:
    using Closure = std::function<double(std::span<const double>)>;

    static ReferenceSolution analytic(Closure u);

    /// Text table `axis1,axis2,u`, one row per tensor-grid node, row-major
    /// over axis1 then axis2.
    static ReferenceSolution load_table(const std::string& path);

    double operator()(std::span<const double> x) const;
    bool is_table() const { return !table_values_.empty(); }

 private:
    Closure closure_;
    std::vector<double> axis1_, axis2_;
    std::vector<double> table_values_;  // [axis1.size() x axis2.size()]
};

/// One boundary condition: a face of the box (x[axis] == value) with a
/// residual b_res = B(u) - b(x) supplied as value and partials.
struct BoundarySpec {
    std::string name;
    int fixed_axis = 0;
    double fixed_value = 0.0;
    std::function<double(std::span<const double>)> target;  ///< b(x)
};

/// Forward PDE problem on a box: interior residual F(u) - f with hand-coded
/// partials with respect to the jet components, plus Dirichlet-style
/// boundary specs. `axes` lists the derivative slots the residual reads.
struct PdeProblem {
    std::string name;
    Box domain;
    std::vector<AxisRequest> axes;
    std::function<double(std::span<const double>, const FieldJets&)> residual;
    std::function<void(std::span<const double>, const FieldJets&, FieldAdjoint&)> residual_partials;
    std::vector<BoundarySpec> boundaries;
    double w_f = 1.0;
    std::vector<double> w_b;
    std::vector<std::pair<std::string, double>> constants;
    std::shared_ptr<const ReferenceSolution> reference;

    int dim() const { return domain.dim(); }
    int n_families() const { return 1 + static_cast<int>(boundaries.size()); }
    void validate() const;
};

/// Interior and boundary collocation points (row-major coordinate blocks).
struct CollocationSet {
    std::vector<double> interior;                 // [n_interior x dim]
    std::size_t n_interior = 0;
    std::vector<std::vector<double>> boundary;    // per family [n x dim]
    std::vector<std::size_t> n_boundary;

    void validate(const PdeProblem& problem) const;
};

/// Default Sobol skip: index 0 of the sequence is the origin, which is
/// degenerate as a collocation point.
inline constexpr uint64_t kSobolSkipOrigin = 1;

/// Sobol interior points plus per-face boundary points; the fixed boundary
/// coordinate is set bit-exactly. `warnings` receives the non-power-of-two
/// notes, when provided.
CollocationSet sample_collocation(const PdeProblem& problem, std::size_t n_interior,
                                  std::size_t n_boundary, uint64_t interior_skip = kSobolSkipOrigin,
                                  std::vector<std::string>* warnings = nullptr);

/// Map a physical point into the model's [-1,1]^d input cube.
void map_to_model(const Box& box, std::span<const double> x, std::span<double> out);

/// Axis requests rescaled so jets taken in model coordinates come out as
/// physical-coordinate derivatives.
std::vector<AxisRequest> scaled_axes(const Box& box, std::span<const AxisRequest> axes);

/// Network jets at a physical point (derivatives with respect to physical
/// coordinates).
FieldJets model_jets(const KanModel& model, const Box& box, std::span<const double> x,
                     std::span<const AxisRequest> axes, JetWorkspace& ws);

/// Network value at a physical point.
double model_value(const KanModel& model, const Box& box, std::span<const double> x);

/// Interior residuals r_0(x_i) = F(u(x_i)) - f(x_i) at the given points.
std::vector<double> pde_residual(const PdeProblem& problem, const KanModel& model,
                                 std::span<const double> points, std::size_t n);

/// Jets of an analytic closure via Jet2 arithmetic (test and reference
/// path): the closure receives one Jet2 per coordinate, seeded along the
/// requested axis.
FieldJets closure_jets(const std::function<Jet2(std::span<const Jet2>)>& u,
                       std::span<const double> x, std::span<const AxisRequest> axes);

/// The four built-in PDE problems (diffusion, helmholtz, burgers,
/// allen_cahn) with the stock constants; reference tables for burgers and
/// allen_cahn must be attached separately.
std::vector<PdeProblem> builtin_problems();

/// Look up one problem by name, optionally overriding named constants and
/// attaching a reference table file.
PdeProblem make_problem(const std::string& name,
                        const std::vector<std::pair<std::string, double>>& constant_overrides = {},
                        const std::string& reference_path = "");

/// 4-d regression target used by the function-fit task.
struct FitTask {
    std::string name;
    Box domain;
    std::function<double(std::span<const double>)> target;
    std::size_t n_points = 3000;
};

FitTask builtin_fit_task();

}  // namespace pikan
