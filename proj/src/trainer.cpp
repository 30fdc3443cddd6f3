#include "pikan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pikan/errors.hpp"

namespace pikan {

void TrainPlan::validate() const {
    if (epochs < 0) throw ConfigError("TrainPlan: epochs must be >= 0");
    lr.validate();
    grid_mix.validate();
    if (adapt_every < 0) throw ConfigError("TrainPlan: adapt_every must be >= 0");
    if (adapt_until > epochs) throw ConfigError("TrainPlan: adapt_until must be <= epochs");
    for (std::size_t i = 0; i < extensions.size(); ++i) {
        if (extensions[i].second < 1) throw ConfigError("TrainPlan: extension size must be >= 1");
        if (i > 0 && extensions[i].first <= extensions[i - 1].first) {
            throw ConfigError("TrainPlan: extension epochs must be strictly increasing");
        }
    }
    if (rad) {
        if (rad->a < 0.0 || rad->c < 0.0) throw ConfigError("TrainPlan: RAD a, c must be >= 0");
        for (long e : rad->epochs) {
            for (const auto& [ee, g] : extensions) {
                (void)g;
                if (e == ee) {
                    throw ConfigError("TrainPlan: RAD epoch " + std::to_string(e) +
                                      " collides with a grid extension");
                }
            }
        }
    }
    if (rba && !(rba->eta >= 0.0 && rba->eta <= 1.0)) {
        throw ConfigError("TrainPlan: RBA eta must lie in [0, 1]");
    }
    if (n_interior == 0) throw ConfigError("TrainPlan: n_interior must be positive");
}

std::string RunLog::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "# order=" << kEpochOrder << "\n";
    for (const EpochRecord& r : records) {
        os << r.epoch << ',' << r.total << ',' << r.interior;
        for (double b : r.boundary) os << ',' << b;
        os << ',' << r.lr << ',' << r.grid_intervals << ',';
        for (std::size_t i = 0; i < r.events.size(); ++i) {
            if (i > 0) os << '|';
            os << r.events[i];
        }
        os << ',';
        if (std::isfinite(r.rel_l2)) os << r.rel_l2;
        os << '\n';
    }
    os << "# final_loss=" << final_loss << " final_rel_l2=" << final_rel_l2 << "\n";
    for (const std::string& w : warnings) os << "# warning: " << w << "\n";
    return os.str();
}

TrainState make_initial_state(const PdeProblem& problem, KanModel model, const TrainPlan& plan,
                              std::vector<std::string>* warnings) {
    problem.validate();
    plan.validate();
    model.validate();
    if (model.dim() != problem.dim()) {
        throw ConfigError("train: model input dimension does not match the problem");
    }
    if (model.out_dim() != 1) throw ConfigError("train: the trainer expects a scalar output");

    TrainState st;
    st.colloc = sample_collocation(problem, plan.n_interior, plan.n_boundary, kSobolSkipOrigin,
                                   warnings);
    st.sobol_cursor = kSobolSkipOrigin + plan.n_interior;
    st.rba = RbaWeights::ones(st.colloc, plan.rba ? plan.rba->eta : 0.0);
    AdamHyper hyper;
    hyper.nesterov = plan.nesterov;
    st.opt = AdamState::init(model.param_count(), hyper);
    st.model = std::move(model);
    st.rng = Rng(plan.seed);
    st.epoch = 0;
    return st;
}

namespace {

int extension_at(const TrainPlan& plan, long epoch) {
    for (const auto& [e, g] : plan.extensions) {
        if (e == epoch) return g;
    }
    return 0;
}

bool rad_at(const TrainPlan& plan, long epoch) {
    if (!plan.rad) return false;
    return std::find(plan.rad->epochs.begin(), plan.rad->epochs.end(), epoch) !=
           plan.rad->epochs.end();
}

bool adapt_at(const TrainPlan& plan, long epoch) {
    return plan.adapt_every > 0 && epoch > 0 && epoch % plan.adapt_every == 0 &&
           epoch <= plan.adapt_until;
}

std::vector<double> mapped_interior(const PdeProblem& problem, const CollocationSet& colloc) {
    const int dim = problem.dim();
    std::vector<double> mapped(colloc.interior.size());
    for (std::size_t i = 0; i < colloc.n_interior; ++i) {
        map_to_model(problem.domain,
                     std::span<const double>(colloc.interior.data() + i * dim,
                                             static_cast<std::size_t>(dim)),
                     std::span<double>(mapped.data() + i * dim, static_cast<std::size_t>(dim)));
    }
    return mapped;
}

}  // namespace

TrainResult train(const PdeProblem& problem, const TrainPlan& plan, TrainState st,
                  TrainHooks* hooks) {
    plan.validate();
    problem.validate();

    RunLog log;
    LossScratch scratch;
    GradBuffer grad(st.model.param_count());
    const bool can_eval = problem.reference && problem.dim() == 2;

    for (long epoch = st.epoch; epoch < plan.epochs; ++epoch) {
        const double lr = lr_at(plan.lr, epoch);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr;
        rec.grid_intervals = st.model.grid_intervals();

        const RbaWeights* rba_ptr = plan.rba ? &st.rba : nullptr;
        const LossResult loss = physics_loss_grad(problem, st.model, st.colloc, rba_ptr, grad,
                                                  scratch);
        rec.total = loss.loss.total;
        rec.interior = loss.loss.interior;
        rec.boundary = loss.loss.boundary;
        if (!std::isfinite(rec.total)) {
            throw NumericAbort(epoch, hooks ? hooks->last_checkpoint : "");
        }

        if (can_eval && plan.eval_every > 0 &&
            (epoch % plan.eval_every == 0 || epoch + 1 == plan.epochs)) {
            rec.rel_l2 = relative_l2(st.model, problem);
            rec.events.push_back("eval");
        }

        for (const auto& [e, factor] : plan.lr.events) {
            if (e == epoch) rec.events.push_back("lr:" + std::to_string(factor));
        }

        if (plan.rba) st.rba = rba_update(st.rba, loss.residuals);

        auto stepped = adam_step(st.model, st.opt, grad, lr);
        st.model = std::move(stepped.first);
        st.opt = std::move(stepped.second);

        if (const int new_g = extension_at(plan, epoch); new_g > 0) {
            const std::vector<double> mapped = mapped_interior(problem, st.colloc);
            GridUpdateResult upd =
                update_grids(st.model, mapped, st.colloc.n_interior, new_g, plan.grid_mix);
            for (std::string& w : upd.warnings) {
                log.warnings.push_back("epoch " + std::to_string(epoch) + ": " + std::move(w));
            }
            if (plan.state_transition) {
                st.opt = transition_state(st.opt, st.model, upd.model);
            } else {
                st.opt = AdamState::init(upd.model.param_count(), st.opt.hyper);
            }
            st.model = std::move(upd.model);
            grad = GradBuffer(st.model.param_count());
            scratch.chunk_grads.clear();
            rec.events.push_back("extend:" + std::to_string(new_g));
        } else if (rad_at(plan, epoch)) {
            RadResult rr = rad_resample(problem, st.model, st.colloc.n_interior, plan.rad->a,
                                        plan.rad->c, st.rba, plan.grid_mix, st.sobol_cursor,
                                        st.rng);
            for (std::string& w : rr.warnings) {
                log.warnings.push_back("epoch " + std::to_string(epoch) + ": " + std::move(w));
            }
            st.colloc.interior = std::move(rr.interior);
            st.rba = std::move(rr.rba);
            st.model = std::move(rr.model);
            rec.events.push_back("rad");
        } else if (adapt_at(plan, epoch)) {
            const std::vector<double> mapped = mapped_interior(problem, st.colloc);
            GridUpdateResult upd =
                update_grids(st.model, mapped, st.colloc.n_interior, std::nullopt, plan.grid_mix);
            for (std::string& w : upd.warnings) {
                log.warnings.push_back("epoch " + std::to_string(epoch) + ": " + std::move(w));
            }
            st.model = std::move(upd.model);
            rec.events.push_back("adapt");
        }

        st.epoch = epoch + 1;
        log.records.push_back(rec);
        if (hooks && hooks->on_record) hooks->on_record(rec);
        if (hooks && hooks->after_epoch) hooks->after_epoch(epoch, st);
    }

    if (!log.records.empty()) log.final_loss = log.records.back().total;
    if (can_eval && plan.epochs > 0) log.final_rel_l2 = relative_l2(st.model, problem);
    return {std::move(st), std::move(log)};
}

TrainResult train(const PdeProblem& problem, KanModel model, const TrainPlan& plan,
                  TrainHooks* hooks) {
    std::vector<std::string> warnings;
    TrainState st = make_initial_state(problem, std::move(model), plan, &warnings);
    TrainResult res = train(problem, plan, std::move(st), hooks);
    res.log.warnings.insert(res.log.warnings.begin(), warnings.begin(), warnings.end());
    return res;
}

PdeProblem as_problem(const FitTask& task) {
    PdeProblem p;
    p.name = task.name;
    p.domain = task.domain;
    p.axes = {};
    const auto target = task.target;
    p.residual = [target](std::span<const double> x, const FieldJets& j) {
        return j.u - target(x);
    };
    p.residual_partials = [](std::span<const double>, const FieldJets&, FieldAdjoint& adj) {
        adj.u = 1.0;
    };
    p.w_f = 1.0;
    p.reference = std::make_shared<const ReferenceSolution>(ReferenceSolution::analytic(target));
    return p;
}

TrainResult train_function_fit(const FitTask& task, KanModel model, const TrainPlan& plan,
                               TrainHooks* hooks) {
    TrainPlan fit_plan = plan;
    fit_plan.n_interior = task.n_points;
    fit_plan.n_boundary = 0;
    return train(as_problem(task), std::move(model), fit_plan, hooks);
}

EvalResult evaluate(const KanModel& model, const PdeProblem& problem, int resolution) {
    EvalResult res;
    res.resolution = resolution;
    res.has_reference = static_cast<bool>(problem.reference);

    const std::vector<double> pts = eval_lattice(problem.domain, resolution);
    const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
    std::vector<double> mapped(pts.size());
    for (std::size_t i = 0; i < n; ++i) {
        map_to_model(problem.domain, std::span<const double>(pts.data() + i * 2, 2),
                     std::span<double>(mapped.data() + i * 2, 2));
    }
    const std::vector<double> u = forward(model, mapped, n);

    const int cols = 3 + (res.has_reference ? 1 : 0);
    res.field.resize(n * static_cast<std::size_t>(cols));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double* row = res.field.data() + i * cols;
        row[0] = pts[i * 2];
        row[1] = pts[i * 2 + 1];
        row[2] = u[i];
        if (res.has_reference) {
            const double ur = (*problem.reference)(std::span<const double>(pts.data() + i * 2, 2));
            row[3] = std::abs(ur - u[i]);
            num += (ur - u[i]) * (ur - u[i]);
            den += ur * ur;
        }
    }
    if (res.has_reference) {
        if (den == 0.0) throw ArgumentError("evaluate: reference norm is zero");
        res.rel_l2 = std::sqrt(num / den);
    }
    return res;
}

}  // namespace pikan
