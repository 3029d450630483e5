#pragma once

#include "daqd/core_types.hpp"
#include "daqd/mlp.hpp"
#include "daqd/repertoire.hpp"
#include "daqd/rng.hpp"
#include "daqd/toy_env.hpp"

#include <array>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace daqd {

// ---------------------------------------------------------------------------
// Gaussian-process residual model

struct GpParams {
    double length_scale = 0.1;
    double signal_std = 0.4;
    double noise_std = 0.1;

    void validate() const;
};

/// One zero-mean GP per output dimension, all sharing the kernel and inputs.
class SkillOutcomeGP {
public:
    static constexpr std::size_t kOutputs = 3;
    using Output = std::array<double, kOutputs>;

    struct Prediction {
        Output mean{};
        Output variance{};
    };

    explicit SkillOutcomeGP(std::size_t input_dim, GpParams params = {});

    /// Replace the training set and refactor the kernel matrix.
    void fit(std::vector<Vector> inputs, std::vector<Output> targets);
    /// Append one datum and refit.
    void add(const Vector& input, const Output& target);

    Prediction predict(std::span<const double> x) const;
    double kernel(std::span<const double> a, std::span<const double> b) const;

    std::size_t size() const noexcept { return inputs_.size(); }
    std::size_t input_dim() const noexcept { return dim_; }
    const GpParams& params() const noexcept { return params_; }
    /// Diagonal jitter added on top of the noise variance by the last fit.
    double jitter() const noexcept { return jitter_; }

private:
    void refactor();

    std::size_t dim_;
    GpParams params_;
    std::vector<Vector> inputs_;
    std::vector<Output> targets_;
    Matrix chol_;  // lower factor of K + (noise^2 + jitter) I
    Matrix alpha_; // n x kOutputs
    double jitter_ = 0.0;
};

// ---------------------------------------------------------------------------
// Maze

struct Pose {
    double x = 0.0, y = 0.0, yaw = 0.0;
};

/// Body-frame displacement of one skill.
struct SkillOutcome {
    double dx = 0.0, dy = 0.0, dyaw = 0.0;
};

Pose compose(const Pose& p, const SkillOutcome& o);
/// Body-frame outcome taking `from` to `to`.
SkillOutcome relative(const Pose& from, const Pose& to);

class Maze {
public:
    /// Text grid: a header "cell_size <m>", then rows of '#', '.', 'S', 'G'.
    /// The first grid row is the top (largest y).
    static Maze parse(const std::string& text);
    static Maze load(const std::filesystem::path& path);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double cell_size() const noexcept { return cell_; }
    const Pose& start() const noexcept { return start_; }
    double goal_x() const noexcept { return goal_x_; }
    double goal_y() const noexcept { return goal_y_; }

    bool wall_cell(long r, long c) const;
    /// Row/column (row 0 at y = 0) of a world point.
    std::pair<long, long> cell_of(double x, double y) const;
    bool free(double x, double y) const;
    /// True when every cell touched by the straight segment is free.
    bool segment_free(double x0, double y0, double x1, double y1) const;

    /// Shortest 8-connected path length (m) through free cells from the point's
    /// cell to the goal; infinity when disconnected.
    double geodesic(double x, double y) const;
    double distance_to_goal(double x, double y) const;

private:
    void compute_geodesic();

    std::size_t rows_ = 0, cols_ = 0;
    double cell_ = 1.0;
    std::vector<char> wall_; // row-major, row 0 at y = 0
    Pose start_;
    double goal_x_ = 0.0, goal_y_ = 0.0;
    std::vector<double> geo_;
};

// ---------------------------------------------------------------------------
// Planner

struct PlannerConfig {
    std::size_t mcts_iterations = 2000;
    std::size_t rollout_depth = 12;
    double ucb_c = 1.0;
    /// Skills sampled per node; 0 branches over the whole repertoire.
    std::size_t action_set_size = 256;
    std::size_t max_skills = 100;
    double goal_radius = 0.5;
    GpParams gp;

    void validate() const;
};

/// Repertoire skills with their simulated outcomes from rest in the intact env.
struct SkillLibrary {
    std::vector<PolicyParams> policies;
    std::vector<Vector> descriptors;
    std::vector<SkillOutcome> simulated;
    /// Body-frame waypoints of each simulated rollout, ending at the final pose.
    std::vector<std::vector<SkillOutcome>> paths;

    std::size_t size() const noexcept { return policies.size(); }
};

SkillLibrary build_skill_library(const Repertoire& rep, const EnvConfig& intact, std::size_t path_stride = 5);

/// Simulated outcome plus the GP mean residual, for every skill.
std::vector<SkillOutcome> predicted_outcomes(const SkillLibrary& lib, const SkillOutcomeGP& gp);

struct PlanResult {
    std::size_t skill = 0;
    bool blocked = false;
    std::vector<std::size_t> root_actions;
    std::vector<std::size_t> root_visits;
    std::vector<double> root_values;
    std::size_t iterations = 0;
};

PlanResult mcts_plan(const Pose& pose, const SkillLibrary& lib, const std::vector<SkillOutcome>& predicted,
                     const Maze& maze, const PlannerConfig& cfg, const Rng& rng);

/// Convenience overload computing the predicted outcomes from `gp`.
PlanResult mcts_plan(const Pose& pose, const SkillLibrary& lib, const SkillOutcomeGP& gp, const Maze& maze,
                     const PlannerConfig& cfg, const Rng& rng);

struct Execution {
    Pose end;
    bool collided = false;
    std::vector<Pose> path;
};

/// Run a skill from rest at `pose` in `env`; the robot halts before entering a wall.
Execution execute_skill(const PolicyParams& policy, const Pose& pose, const EnvConfig& env, const Maze& maze);

struct RteStep {
    std::size_t skill = 0;
    Vector descriptor;
    Pose start;
    Pose predicted;
    Pose simulated;
    Pose realized;
    SkillOutcome residual;
    bool collided = false;
    bool blocked = false;
};

struct RteReport {
    std::size_t skills_executed = 0;
    bool reached = false;
    std::vector<Pose> trajectory;
    std::vector<RteStep> steps;

    /// Mean position error (m) of the GP-corrected and of the pure simulation
    /// predictions over non-colliding steps after the first `skip` executed skills.
    std::pair<double, double> prediction_errors(std::size_t skip) const;
};

/// Plan, execute in `env` (possibly damaged), learn the residual, repeat.
/// Skills that hit a wall are counted but not added to the GP.
RteReport rte_episode(const Maze& maze, const SkillLibrary& lib, const EnvConfig& env, const PlannerConfig& cfg,
                      const Rng& rng);

void write_rte_csv(const RteReport& report, const std::filesystem::path& path);

} // namespace daqd
