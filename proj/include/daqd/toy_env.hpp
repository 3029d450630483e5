#pragma once

#include "daqd/core_types.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <string>
#include <utility>

namespace daqd {

// Planar rigid body driven by a 36-parameter periodic controller.
//
// State  : x, y, yaw, vx, vy, yaw_rate   (velocities in the body frame)
// Action : forward, lateral, yaw-rate commands, each in [-1, 1]

inline constexpr std::size_t kStateDim = 6;
inline constexpr std::size_t kActionDim = 3;
inline constexpr std::size_t kVirtualJoints = 12;
inline constexpr std::size_t kGenotypeDim = 3 * kVirtualJoints;

namespace state_index {
inline constexpr std::size_t x = 0, y = 1, yaw = 2, vx = 3, vy = 4, yaw_rate = 5;
}

enum class TaskKind { Omni, Uni };

const char* to_string(TaskKind t);
TaskKind task_from_string(const std::string& s);
std::size_t descriptor_dim(TaskKind t);

struct EnvConfig {
    std::size_t episode_steps = 60;
    double dt = 0.05;
    double period = 1.0;
    double gait_gain = 1.0;
    double velocity_lag = 0.2;       // first-order relaxation per step
    double reach_bound = 2.0;        // L: displacement normalization for the omni descriptor
    double uni_threshold_scale = 1.0;
    std::size_t uni_sample_every = 10; // steps per descriptor sampling interval
    std::array<bool, kVirtualJoints> damage_mask{};

    void validate() const;
    bool damaged() const;
};

/// Both joints of one forward-channel pair (2 and 3) disabled.
std::array<bool, kVirtualJoints> leg_damage_mask();

/// Joint j -> command channel j / 4, sign alternating +, -, +, - within a channel.
int mixing_channel(std::size_t joint);
double mixing_weight(std::size_t joint);

/// Duty-cycled square wave with linear edges, `u` is the cycle fraction.
/// Pulse of +1 on [0, duty), -1 elsewhere; edges ramp over kEdgeWidth cycles.
double smoothed_square(double u, double duty);
inline constexpr double kEdgeWidth = 0.05;

struct JointParams {
    double amplitude; // [0, 1]
    double phase;     // [0, 1) cycle fraction
    double duty;      // [0.1, 0.9]
};

class PeriodicController {
public:
    PeriodicController(const PolicyParams& params, double period = 1.0);

    const JointParams& joint(std::size_t j) const { return joints_[j]; }
    double joint_signal(std::size_t j, double t) const;
    Action action(double t, const std::array<bool, kVirtualJoints>& mask = {}) const;

private:
    std::array<JointParams, kVirtualJoints> joints_{};
    double period_;
};

Action controller_action(const PeriodicController& ctrl, double t, const EnvConfig& cfg = {});

/// One Euler step of the planar body. Deterministic and allocation-light.
State step(const State& s, const Action& a, const EnvConfig& cfg);
State initial_state();

struct TaskResult {
    SkillDescriptor descriptor;
    double ret = 0.0;
};

TaskResult descriptor_omni(const Trajectory& traj, const EnvConfig& cfg);
TaskResult descriptor_uni(const Trajectory& traj, const EnvConfig& cfg);
TaskResult evaluate_task(TaskKind task, const Trajectory& traj, const EnvConfig& cfg);

struct EpisodeOutcome {
    Trajectory trajectory;
    SkillDescriptor descriptor;
    double ret = 0.0;
    std::vector<Transition> transitions;
};

/// T steps from rest at the origin.
EpisodeOutcome rollout_env(const PolicyParams& phi, const EnvConfig& cfg, TaskKind task);

/// Environment handle that counts every real rollout it performs.
class Environment {
public:
    Environment(EnvConfig cfg, TaskKind task) : cfg_(std::move(cfg)), task_(task) { cfg_.validate(); }

    EpisodeOutcome evaluate(const PolicyParams& phi)
    {
        ++evaluations_;
        return rollout_env(phi, cfg_, task_);
    }

    const EnvConfig& config() const noexcept { return cfg_; }
    TaskKind task() const noexcept { return task_; }
    std::size_t evaluations() const noexcept { return evaluations_.load(); }

private:
    EnvConfig cfg_;
    TaskKind task_;
    std::atomic<std::size_t> evaluations_{0};
};

} // namespace daqd
