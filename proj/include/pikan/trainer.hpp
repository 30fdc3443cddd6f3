#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pikan/loss.hpp"
#include "pikan/optim.hpp"
#include "pikan/pde.hpp"

namespace pikan {

struct RbaConfig {
    double eta = 1e-4;
};

struct RadConfig {
    std::vector<long> epochs;
    double a = 1.0;
    double c = 1.0;
};

/// Epoch-indexed schedule of everything that happens during a run. Within
/// an epoch the order is fixed: loss -> RBA update -> Adam step -> at most
/// one structural event (grid adaptation, extension + state transition, or
/// RAD resampling; an extension supersedes a same-epoch adaptation).
struct TrainPlan {
    long epochs = 0;
    LrSchedule lr;
    long adapt_every = 0;  ///< 0 disables regular adaptations
    long adapt_until = 0;
    std::vector<std::pair<long, int>> extensions;  ///< (epoch, new interval count)
    std::optional<RbaConfig> rba;
    std::optional<RadConfig> rad;
    bool state_transition = true;  ///< false: re-initialize Adam at extensions
    bool nesterov = true;
    uint64_t seed = 0;
    long eval_every = 1000;
    std::size_t n_interior = 4096;
    std::size_t n_boundary = 64;
    GridMixConfig grid_mix;

    void validate() const;
};

struct EpochRecord {
    long epoch = 0;
    double total = 0.0;
    double interior = 0.0;
    std::vector<double> boundary;
    double lr = 0.0;
    int grid_intervals = 0;
    std::vector<std::string> events;
    double rel_l2 = std::numeric_limits<double>::quiet_NaN();

    bool operator==(const EpochRecord&) const = default;
};

struct RunLog {
    /// Order of operations within every epoch, recorded for the log reader.
    static constexpr const char* kEpochOrder = "loss,rba,adam,event";

    std::vector<EpochRecord> records;
    std::vector<std::string> warnings;
    double final_rel_l2 = std::numeric_limits<double>::quiet_NaN();
    double final_loss = std::numeric_limits<double>::quiet_NaN();

    std::string serialize() const;
    bool operator==(const RunLog&) const = default;
};

/// Everything that evolves across epochs; checkpoints serialize exactly
/// this, so a reloaded state continues bit-identically.
struct TrainState {
    long epoch = 0;
    KanModel model;
    AdamState opt;
    CollocationSet colloc;
    RbaWeights rba;
    uint64_t sobol_cursor = 0;
    Rng rng{0};
};

struct TrainHooks {
    std::function<void(const EpochRecord&)> on_record;
    std::function<void(long, const TrainState&)> after_epoch;
    std::string last_checkpoint;  ///< maintained by the hook owner, reported on abort
};

struct TrainResult {
    TrainState state;
    RunLog log;
};

TrainState make_initial_state(const PdeProblem& problem, KanModel model, const TrainPlan& plan,
                              std::vector<std::string>* warnings = nullptr);

/// Full training run from the given state up to plan.epochs. Deterministic
/// for a fixed plan and seed; aborts with NumericAbort on a non-finite
/// loss.
TrainResult train(const PdeProblem& problem, const TrainPlan& plan, TrainState state,
                  TrainHooks* hooks = nullptr);
TrainResult train(const PdeProblem& problem, KanModel model, const TrainPlan& plan,
                  TrainHooks* hooks = nullptr);

/// Supervised counterpart: mean-squared error against the task target over
/// Sobol-sampled points, with the same event machinery.
PdeProblem as_problem(const FitTask& task);
TrainResult train_function_fit(const FitTask& task, KanModel model, const TrainPlan& plan,
                               TrainHooks* hooks = nullptr);

/// Model evaluation on a cell-center lattice: relative L2 against the
/// problem reference (when present) plus the solution field for export.
struct EvalResult {
    double rel_l2 = std::numeric_limits<double>::quiet_NaN();
    bool has_reference = false;
    int resolution = 0;
    std::vector<double> field;  ///< [resolution^2 x (dim + 1 + has_reference)]
};

EvalResult evaluate(const KanModel& model, const PdeProblem& problem, int resolution);

}  // namespace pikan
