#pragma once

#include "daqd/dynamics_model.hpp"
#include "daqd/repertoire.hpp"
#include "daqd/rng.hpp"
#include "daqd/toy_env.hpp"
#include "daqd/variation.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace daqd {

enum class LoopMode { VanillaQD, DirectSurrogateQD, DAQD, Random };

const char* to_string(LoopMode m);
LoopMode loop_mode_from_string(const std::string& s);

struct SelectionStrategy {
    enum class Kind { AllImagined, LowDisagreementTopN };
    Kind kind = Kind::AllImagined;
    std::size_t pool = 20;
    std::size_t take = 1;

    void validate() const;
};

struct StopRule {
    enum class Kind { BudgetExhausted, ImaginedAdditionsBelow, Both };
    Kind kind = Kind::BudgetExhausted;
    double threshold = 1.0;
    std::size_t window = 10;

    void validate() const;
    bool watches_additions() const { return kind != Kind::BudgetExhausted; }
};

/// Windowed mean of imagined additions per QD iteration.
class AdditionWindow {
public:
    explicit AdditionWindow(std::size_t window) : window_(window) {}
    void push(std::size_t additions);
    /// True once `window` iterations are recorded and their mean is below `threshold`.
    bool below(double threshold) const;
    double mean() const;

private:
    std::size_t window_;
    std::vector<std::size_t> recent_;
};

struct LoopConfig {
    LoopMode mode = LoopMode::VanillaQD;
    std::size_t eval_budget = 5000;
    std::size_t imagination_iters_per_cycle = 10;
    SelectionStrategy selection;
    StopRule stop_rule;
    std::size_t metrics_every = 500;
    /// DA-QD / surrogate: stop after this many consecutive cycles without an env evaluation.
    std::size_t max_idle_cycles = 200;
    /// Cap on variation iterations (0 = none); used to align candidate streams between modes.
    std::size_t max_qd_iterations = 0;
    bool record_wall_time = false;

    VariationConfig variation;
    RepertoireParams repertoire;
    ModelConfig model;
    TrainConfig train;

    void validate() const;
};

struct MetricsRow {
    std::size_t evals_used = 0;
    std::size_t repertoire_size = 0;
    double qd_score = 0.0;
    std::size_t imagined_size = 0;
    std::size_t imagined_rollouts = 0;
    std::optional<double> model_nll_heldout;
    double wall_time_s = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "evals_used,repertoire_size,qd_score,imagined_size,imagined_rollouts,model_nll_heldout,wall_time_s";

/// Metrics rows kept in memory and, when a path is given, appended to a CSV
/// that is opened (and its header written) at construction.
class MetricsLog {
public:
    MetricsLog() = default;
    explicit MetricsLog(const std::filesystem::path& path);

    void append(const MetricsRow& row);
    const std::vector<MetricsRow>& rows() const noexcept { return rows_; }

private:
    std::vector<MetricsRow> rows_;
    std::unique_ptr<std::ofstream> out_;
};

std::string format_metrics_row(const MetricsRow& row);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

struct LoopResult {
    Repertoire repertoire{1};
    Repertoire imagined{1};
    std::unique_ptr<EnsembleDynamicsModel> model;
    std::vector<MetricsRow> metrics;
    /// try_add outcome of every env-evaluated candidate, in order.
    std::vector<AdditionOutcome> real_outcomes;
    /// Decision taken on every generated candidate: the real outcome for
    /// candidates sent straight to the env, the imagined outcome otherwise.
    std::vector<AdditionOutcome> candidate_outcomes;
    std::size_t env_evals = 0;
    std::size_t imagined_rollouts = 0;
    std::size_t qd_iterations = 0;
    std::size_t train_updates = 0;
    std::string stop_reason;
};

/// Optional hooks shared by the runners.
struct LoopOptions {
    /// Metrics CSV destination; empty keeps rows in memory only.
    std::filesystem::path metrics_path;
    /// Replaces the learned model (the learned model is then never trained).
    const DynamicsPredictor* external_model = nullptr;
    /// DA-QD: called after every imagined batch with the imagined repertoire as
    /// it was before the batch, the children and the decisions taken on them.
    std::function<void(const Repertoire& before, const std::vector<PolicyParams>& children,
                       const std::vector<AdditionOutcome>& decisions)>
        on_imagined_batch;
};

LoopResult run_vanilla_qd(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt = {});
LoopResult run_random(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt = {});
LoopResult run_daqd(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt = {});
LoopResult run_direct_surrogate_qd(const LoopConfig& cfg, Environment& env, const Rng& rng,
                                   const LoopOptions& opt = {});
/// Dispatch on cfg.mode.
LoopResult run_loop(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt = {});

struct ImaginationConfig {
    std::size_t imagined_rollouts = 20000;
    VariationConfig variation;
    RepertoireParams repertoire;
    /// Optional early stop on imagined additions.
    StopRule stop_rule;
};

struct ImaginationResult {
    Repertoire imagined{1};
    std::size_t imagined_rollouts = 0;
    std::size_t qd_iterations = 0;
    std::string stop_reason;
};

/// QD purely in imagination over `task`'s descriptor space; no env evaluation.
ImaginationResult run_imagination_only(const ImaginationConfig& cfg, const DynamicsPredictor& model,
                                       const EnvConfig& env_cfg, TaskKind task, const Rng& rng);

struct FewShotReport {
    std::size_t requested = 0;
    std::size_t pool = 0;
    std::vector<std::uint64_t> entry_ids;
    std::vector<double> imagined_returns;
    std::vector<double> realized_returns;
    double best_ret = 0.0;
    double mean_ret = 0.0;
    std::string warning;
};

/// Pool of the `pool` lowest-disagreement entries, ordered by imagined return,
/// top `n` evaluated in the env.
FewShotReport zero_few_shot_eval(const Repertoire& imagined, Environment& env, std::size_t n, std::size_t pool = 20);

struct AcquisitionResult {
    Repertoire repertoire{1};
    std::size_t env_evals = 0;
};

/// Evaluate every imagined entry in the env and add the outcomes to a fresh repertoire.
AcquisitionResult acquire_from_imagined(const Repertoire& imagined, Environment& env, const RepertoireParams& params);

} // namespace daqd
