#include "pikan/pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pikan/errors.hpp"
#include "pikan/sobol.hpp"

namespace pikan {

namespace {
constexpr double kPi = std::numbers::pi;
}

void Box::validate() const {
    if (lo.empty() || lo.size() != hi.size()) throw ArgumentError("Box: shape mismatch");
    for (std::size_t d = 0; d < lo.size(); ++d) {
        if (!(lo[d] < hi[d])) throw ArgumentError("Box: lo must be < hi on every axis");
    }
}

ReferenceSolution ReferenceSolution::analytic(Closure u) {
    ReferenceSolution ref;
    ref.closure_ = std::move(u);
    return ref;
}

ReferenceSolution ReferenceSolution::load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("reference table: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("reference table '" + path + "': empty file");
    // Tolerate trailing carriage returns from foreign line endings.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line != "axis1,axis2,u") {
        throw DataError("reference table '" + path + "': expected header 'axis1,axis2,u', got '" +
                        line + "'");
    }

    std::vector<double> a1, a2, val;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        double x1, x2, u;
        char c1, c2;
        if (!(row >> x1 >> c1 >> x2 >> c2 >> u) || c1 != ',' || c2 != ',') {
            throw DataError("reference table '" + path + "': malformed row at line " +
                            std::to_string(line_no));
        }
        a1.push_back(x1);
        a2.push_back(x2);
        val.push_back(u);
    }
    if (val.empty()) throw DataError("reference table '" + path + "': no data rows");

    // Row-major over axis1 then axis2: axis2 cycles fastest.
    std::size_t n2 = 1;
    while (n2 < a1.size() && a1[n2] == a1[0]) ++n2;
    if (a1.size() % n2 != 0) {
        throw DataError("reference table '" + path + "': rows do not form a tensor grid");
    }
    const std::size_t n1 = a1.size() / n2;

    ReferenceSolution ref;
    ref.axis1_.resize(n1);
    ref.axis2_.assign(a2.begin(), a2.begin() + static_cast<std::ptrdiff_t>(n2));
    for (std::size_t i = 0; i < n1; ++i) {
        ref.axis1_[i] = a1[i * n2];
        for (std::size_t j = 0; j < n2; ++j) {
            const std::size_t row = i * n2 + j;
            if (a1[row] != ref.axis1_[i] || a2[row] != ref.axis2_[j]) {
                throw DataError("reference table '" + path +
                                "': rows are not row-major over a tensor grid (row " +
                                std::to_string(row + 2) + ")");
            }
        }
    }
    for (std::size_t i = 1; i < n1; ++i) {
        if (!(ref.axis1_[i] > ref.axis1_[i - 1])) {
            throw DataError("reference table '" + path + "': axis1 must be strictly increasing");
        }
    }
    for (std::size_t j = 1; j < n2; ++j) {
        if (!(ref.axis2_[j] > ref.axis2_[j - 1])) {
            throw DataError("reference table '" + path + "': axis2 must be strictly increasing");
        }
    }
    ref.table_values_ = std::move(val);
    return ref;
}

double ReferenceSolution::operator()(std::span<const double> x) const {
    if (!is_table()) return closure_(x);

    auto bracket = [](const std::vector<double>& axis, double q, std::size_t& idx, double& w) {
        const std::size_t n = axis.size();
        if (n == 1) {
            idx = 0;
            w = 0.0;
            return;
        }
        std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(axis.begin(), axis.end(), q) - axis.begin());
        if (hi == 0) hi = 1;
        if (hi >= n) hi = n - 1;
        idx = hi - 1;
        w = (q - axis[idx]) / (axis[idx + 1] - axis[idx]);
        w = std::clamp(w, 0.0, 1.0);
    };

    std::size_t i, j;
    double wi, wj;
    bracket(axis1_, x[0], i, wi);
    bracket(axis2_, x[1], j, wj);
    const std::size_t n2 = axis2_.size();
    const double v00 = table_values_[i * n2 + j];
    const double v01 = axis2_.size() > 1 ? table_values_[i * n2 + j + 1] : v00;
    const double v10 = axis1_.size() > 1 ? table_values_[(i + 1) * n2 + j] : v00;
    const double v11 = (axis1_.size() > 1 && axis2_.size() > 1) ? table_values_[(i + 1) * n2 + j + 1] : v00;
    const double a = v00 + wj * (v01 - v00);
    const double b = v10 + wj * (v11 - v10);
    return a + wi * (b - a);
}

void PdeProblem::validate() const {
    domain.validate();
    if (!residual || !residual_partials) throw ArgumentError("PdeProblem: residual not set");
    if (w_b.size() != boundaries.size()) throw ArgumentError("PdeProblem: boundary weight count");
    for (const BoundarySpec& b : boundaries) {
        if (b.fixed_axis < 0 || b.fixed_axis >= dim()) {
            throw ArgumentError("PdeProblem: boundary axis out of range");
        }
        if (!(b.fixed_value >= domain.lo[b.fixed_axis] && b.fixed_value <= domain.hi[b.fixed_axis])) {
            throw ArgumentError("PdeProblem: boundary face not on the domain boundary");
        }
    }
}

void CollocationSet::validate(const PdeProblem& problem) const {
    if (interior.size() != n_interior * static_cast<std::size_t>(problem.dim())) {
        throw ArgumentError("CollocationSet: interior shape mismatch");
    }
    if (boundary.size() != problem.boundaries.size() || n_boundary.size() != boundary.size()) {
        throw ArgumentError("CollocationSet: boundary family count mismatch");
    }
    for (std::size_t f = 0; f < boundary.size(); ++f) {
        if (boundary[f].size() != n_boundary[f] * static_cast<std::size_t>(problem.dim())) {
            throw ArgumentError("CollocationSet: boundary shape mismatch");
        }
    }
}

CollocationSet sample_collocation(const PdeProblem& problem, std::size_t n_interior,
                                  std::size_t n_boundary, uint64_t interior_skip,
                                  std::vector<std::string>* warnings) {
    problem.validate();
    const int dim = problem.dim();
    CollocationSet set;
    set.n_interior = n_interior;
    set.interior = sobol_sample(problem.domain.lo, problem.domain.hi, n_interior, interior_skip,
                                warnings);

    for (std::size_t f = 0; f < problem.boundaries.size(); ++f) {
        const BoundarySpec& spec = problem.boundaries[f];
        std::vector<double> free_lo, free_hi;
        for (int d = 0; d < dim; ++d) {
            if (d == spec.fixed_axis) continue;
            free_lo.push_back(problem.domain.lo[d]);
            free_hi.push_back(problem.domain.hi[d]);
        }
        const uint64_t skip = kSobolSkipOrigin + (f + 1) * n_boundary;
        std::vector<double> free_pts =
            free_lo.empty() ? std::vector<double>{}
                            : sobol_sample(free_lo, free_hi, n_boundary, skip, warnings);
        std::vector<double> pts(n_boundary * static_cast<std::size_t>(dim));
        for (std::size_t i = 0; i < n_boundary; ++i) {
            int fd = 0;
            for (int d = 0; d < dim; ++d) {
                if (d == spec.fixed_axis) {
                    pts[i * dim + d] = spec.fixed_value;
                } else {
                    pts[i * dim + d] = free_pts[i * (dim - 1) + fd];
                    ++fd;
                }
            }
        }
        set.boundary.push_back(std::move(pts));
        set.n_boundary.push_back(n_boundary);
    }
    return set;
}

void map_to_model(const Box& box, std::span<const double> x, std::span<double> out) {
    for (int d = 0; d < box.dim(); ++d) {
        out[d] = 2.0 * (x[d] - box.lo[d]) / (box.hi[d] - box.lo[d]) - 1.0;
    }
}

std::vector<AxisRequest> scaled_axes(const Box& box, std::span<const AxisRequest> axes) {
    std::vector<AxisRequest> scaled(axes.begin(), axes.end());
    for (AxisRequest& r : scaled) {
        r.seed *= 2.0 / (box.hi[r.axis] - box.lo[r.axis]);
    }
    return scaled;
}

FieldJets model_jets(const KanModel& model, const Box& box, std::span<const double> x,
                     std::span<const AxisRequest> axes, JetWorkspace& ws) {
    double mapped[SobolSequence::kMaxDim];
    map_to_model(box, x, std::span<double>(mapped, static_cast<std::size_t>(box.dim())));
    const std::vector<AxisRequest> scaled = scaled_axes(box, axes);
    return jet_forward(model, std::span<const double>(mapped, static_cast<std::size_t>(box.dim())),
                       scaled, ws);
}

double model_value(const KanModel& model, const Box& box, std::span<const double> x) {
    double mapped[SobolSequence::kMaxDim];
    map_to_model(box, x, std::span<double>(mapped, static_cast<std::size_t>(box.dim())));
    const std::vector<double> out =
        forward(model, std::span<const double>(mapped, static_cast<std::size_t>(box.dim())), 1);
    return out[0];
}

std::vector<double> pde_residual(const PdeProblem& problem, const KanModel& model,
                                 std::span<const double> points, std::size_t n) {
    if (model.dim() != problem.dim()) {
        throw ArgumentError("pde_residual: model and problem dimension mismatch");
    }
    std::vector<double> res(n);
    JetWorkspace ws;
    const int dim = problem.dim();
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> x(points.data() + i * dim, static_cast<std::size_t>(dim));
        const FieldJets jets = model_jets(model, problem.domain, x, problem.axes, ws);
        res[i] = problem.residual(x, jets);
    }
    return res;
}

FieldJets closure_jets(const std::function<Jet2(std::span<const Jet2>)>& u,
                       std::span<const double> x, std::span<const AxisRequest> axes) {
    FieldJets jets;
    std::vector<Jet2> args(x.size());
    if (axes.empty()) {
        for (std::size_t d = 0; d < x.size(); ++d) args[d] = Jet2::constant(x[d]);
        jets.u = u(args).v;
        return jets;
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
        for (std::size_t d = 0; d < x.size(); ++d) {
            args[d] = static_cast<int>(d) == axes[a].axis
                          ? Jet2::variable(x[d], axes[a].seed)
                          : Jet2::constant(x[d]);
        }
        const Jet2 out = u(args);
        jets.u = out.v;
        jets.d1[a] = out.d1;
        jets.d2[a] = out.d2;
    }
    return jets;
}

namespace {

PdeProblem make_diffusion() {
    PdeProblem p;
    p.name = "diffusion";
    p.domain = {{0.0, 0.0}, {1.0, 1.0}};  // (t, x)
    p.axes = {{0, 1, 1.0}, {1, 2, 1.0}};
    p.residual = [](std::span<const double> x, const FieldJets& j) {
        const double f = (kPi * kPi - 1.0) * std::exp(-x[0]) * std::sin(kPi * x[1]);
        return j.d1[0] - j.d2[1] - f;
    };
    p.residual_partials = [](std::span<const double>, const FieldJets&, FieldAdjoint& adj) {
        adj.d1[0] = 1.0;
        adj.d2[1] = -1.0;
    };
    p.boundaries = {
        {"t=0", 0, 0.0, [](std::span<const double> x) { return std::sin(kPi * x[1]); }},
        {"x=0", 1, 0.0, [](std::span<const double>) { return 0.0; }},
        {"x=1", 1, 1.0, [](std::span<const double>) { return 0.0; }},
    };
    p.w_b = {1.0, 1.0, 1.0};
    p.reference = std::make_shared<const ReferenceSolution>(ReferenceSolution::analytic(
        [](std::span<const double> x) { return std::sin(kPi * x[1]) * std::exp(-x[0]); }));
    return p;
}

PdeProblem make_helmholtz(double wave_number) {
    PdeProblem p;
    p.name = "helmholtz";
    p.domain = {{-1.0, -1.0}, {1.0, 1.0}};  // (x, y)
    p.axes = {{0, 2, 1.0}, {1, 2, 1.0}};
    const double k2 = wave_number * wave_number;
    p.residual = [k2](std::span<const double> x, const FieldJets& j) {
        const double f = (1.0 - 17.0 * kPi * kPi) * std::sin(kPi * x[0]) * std::sin(4.0 * kPi * x[1]);
        return j.d2[0] + j.d2[1] + k2 * j.u - f;
    };
    p.residual_partials = [k2](std::span<const double>, const FieldJets&, FieldAdjoint& adj) {
        adj.d2[0] = 1.0;
        adj.d2[1] = 1.0;
        adj.u = k2;
    };
    auto zero = [](std::span<const double>) { return 0.0; };
    p.boundaries = {
        {"x=-1", 0, -1.0, zero},
        {"x=1", 0, 1.0, zero},
        {"y=-1", 1, -1.0, zero},
        {"y=1", 1, 1.0, zero},
    };
    p.w_b = {1.0, 1.0, 1.0, 1.0};
    p.w_f = 0.01;
    p.constants = {{"k", wave_number}};
    p.reference = std::make_shared<const ReferenceSolution>(ReferenceSolution::analytic(
        [](std::span<const double> x) { return std::sin(kPi * x[0]) * std::sin(4.0 * kPi * x[1]); }));
    return p;
}

PdeProblem make_burgers(double nu) {
    PdeProblem p;
    p.name = "burgers";
    p.domain = {{0.0, -1.0}, {1.0, 1.0}};  // (t, x)
    p.axes = {{0, 1, 1.0}, {1, 2, 1.0}};
    p.residual = [nu](std::span<const double>, const FieldJets& j) {
        return j.d1[0] + j.u * j.d1[1] - nu * j.d2[1];
    };
    p.residual_partials = [nu](std::span<const double>, const FieldJets& j, FieldAdjoint& adj) {
        adj.d1[0] = 1.0;
        adj.u = j.d1[1];
        adj.d1[1] = j.u;
        adj.d2[1] = -nu;
    };
    auto zero = [](std::span<const double>) { return 0.0; };
    p.boundaries = {
        {"t=0", 0, 0.0, [](std::span<const double> x) { return -std::sin(kPi * x[1]); }},
        {"x=-1", 1, -1.0, zero},
        {"x=1", 1, 1.0, zero},
    };
    p.w_b = {1.0, 1.0, 1.0};
    p.constants = {{"nu", nu}};
    return p;
}

PdeProblem make_allen_cahn(double diffusivity) {
    PdeProblem p;
    p.name = "allen_cahn";
    p.domain = {{0.0, -1.0}, {1.0, 1.0}};  // (t, x)
    p.axes = {{0, 1, 1.0}, {1, 2, 1.0}};
    p.residual = [diffusivity](std::span<const double>, const FieldJets& j) {
        return j.d1[0] - diffusivity * j.d2[1] + 5.0 * (j.u * j.u * j.u - j.u);
    };
    p.residual_partials = [diffusivity](std::span<const double>, const FieldJets& j,
                                        FieldAdjoint& adj) {
        adj.d1[0] = 1.0;
        adj.d2[1] = -diffusivity;
        adj.u = 5.0 * (3.0 * j.u * j.u - 1.0);
    };
    auto minus_one = [](std::span<const double>) { return -1.0; };
    p.boundaries = {
        {"t=0", 0, 0.0,
         [](std::span<const double> x) { return x[1] * x[1] * std::cos(kPi * x[1]); }},
        {"x=-1", 1, -1.0, minus_one},
        {"x=1", 1, 1.0, minus_one},
    };
    p.w_b = {1.0, 1.0, 1.0};
    p.constants = {{"D", diffusivity}};
    return p;
}

}  // namespace

std::vector<PdeProblem> builtin_problems() {
    return {make_diffusion(), make_helmholtz(1.0), make_burgers(0.01 / kPi),
            make_allen_cahn(0.001)};
}

PdeProblem make_problem(const std::string& name,
                        const std::vector<std::pair<std::string, double>>& constant_overrides,
                        const std::string& reference_path) {
    auto find = [&](const std::string& key, double fallback) {
        for (const auto& [k, v] : constant_overrides) {
            if (k == key) return v;
        }
        return fallback;
    };
    for (const auto& [k, v] : constant_overrides) {
        (void)v;
        if (k != "k" && k != "nu" && k != "D") {
            throw ConfigError("make_problem: unknown constant '" + k + "'");
        }
    }

    PdeProblem p;
    if (name == "diffusion") {
        p = make_diffusion();
    } else if (name == "helmholtz") {
        p = make_helmholtz(find("k", 1.0));
    } else if (name == "burgers") {
        p = make_burgers(find("nu", 0.01 / kPi));
    } else if (name == "allen_cahn") {
        p = make_allen_cahn(find("D", 0.001));
    } else {
        throw ConfigError("make_problem: unknown problem '" + name + "'");
    }
    if (!reference_path.empty()) {
        p.reference = std::make_shared<const ReferenceSolution>(
            ReferenceSolution::load_table(reference_path));
    }
    return p;
}

FitTask builtin_fit_task() {
    FitTask task;
    task.name = "function_fit";
    task.domain = {{-1.0, -1.0, -1.0, -1.0}, {1.0, 1.0, 1.0, 1.0}};
    task.target = [](std::span<const double> x) {
        const double a = kPi * (x[0] * x[0] + x[1] * x[1]);
        const double b = kPi * (x[2] * x[2] + x[3] * x[3]);
        return std::exp(0.5 * std::sin(a) + 0.5 * std::sin(b));
    };
    task.n_points = 3000;
    return task;
}

}  // namespace pikan
