#include "daqd/toy_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace daqd {

const char* to_string(TaskKind t)
{
    return t == TaskKind::Omni ? "omni" : "uni";
}

TaskKind task_from_string(const std::string& s)
{
    if (s == "omni")
        return TaskKind::Omni;
    if (s == "uni")
        return TaskKind::Uni;
    throw ConfigError("unknown task '" + s + "' (expected omni or uni)");
}

std::size_t descriptor_dim(TaskKind t)
{
    return t == TaskKind::Omni ? 2 : 6;
}

void EnvConfig::validate() const
{
    if (episode_steps == 0)
        throw ConfigError("env.episode_steps must be positive");
    if (!(dt > 0.0) || !(period > 0.0))
        throw ConfigError("env.dt and env.period must be positive");
    if (!(velocity_lag > 0.0 && velocity_lag <= 1.0))
        throw ConfigError("env.velocity_lag must be in (0, 1]");
    if (!(reach_bound > 0.0))
        throw ConfigError("env.reach_bound must be positive");
    if (uni_sample_every == 0 || uni_sample_every > episode_steps)
        throw ConfigError("env.uni_sample_every must be in [1, episode_steps]");
    if (!std::isfinite(gait_gain) || !std::isfinite(uni_threshold_scale))
        throw ConfigError("env.gait_gain and env.uni_threshold_scale must be finite");
}

std::array<bool, kVirtualJoints> leg_damage_mask()
{
    std::array<bool, kVirtualJoints> m{};
    m[2] = m[3] = true;
    return m;
}

bool EnvConfig::damaged() const
{
    return std::any_of(damage_mask.begin(), damage_mask.end(), [](bool b) { return b; });
}

int mixing_channel(std::size_t joint)
{
    return static_cast<int>(joint / 4);
}

double mixing_weight(std::size_t joint)
{
    return (joint % 2 == 0) ? 1.0 : -1.0;
}

double smoothed_square(double u, double duty)
{
    u -= std::floor(u);
    const double center = 0.5 * duty;
    // Signed offset from the pulse centre, wrapped into [-0.5, 0.5).
    double off = u - center;
    off -= std::floor(off + 0.5);
    const double v = (center - std::abs(off)) / (0.5 * kEdgeWidth);
    return std::clamp(v, -1.0, 1.0);
}

PeriodicController::PeriodicController(const PolicyParams& params, double period) : period_(period)
{
    if (params.size() != kGenotypeDim)
        throw DimensionError("controller expects " + std::to_string(kGenotypeDim) + " parameters, got "
                             + std::to_string(params.size()));
    require_finite(params.view(), "controller parameters");
    for (std::size_t j = 0; j < kVirtualJoints; ++j) {
        const double amp = std::clamp(params[3 * j], 0.0, 1.0);
        double phase = std::clamp(params[3 * j + 1], 0.0, 1.0);
        if (phase >= 1.0)
            phase = 0.0;
        const double duty = 0.1 + 0.8 * std::clamp(params[3 * j + 2], 0.0, 1.0);
        joints_[j] = JointParams{amp, phase, duty};
    }
}

double PeriodicController::joint_signal(std::size_t j, double t) const
{
    const JointParams& jp = joints_[j];
    if (jp.amplitude == 0.0)
        return 0.0;
    return jp.amplitude * smoothed_square(t / period_ + jp.phase, jp.duty);
}

Action PeriodicController::action(double t, const std::array<bool, kVirtualJoints>& mask) const
{
    Action a(kActionDim);
    for (std::size_t j = 0; j < kVirtualJoints; ++j) {
        if (mask[j])
            continue;
        a[static_cast<std::size_t>(mixing_channel(j))] += mixing_weight(j) * joint_signal(j, t);
    }
    for (auto& v : a.values)
        v = std::clamp(v, -1.0, 1.0);
    return a;
}

Action controller_action(const PeriodicController& ctrl, double t, const EnvConfig& cfg)
{
    return ctrl.action(t, cfg.damage_mask);
}

State initial_state()
{
    return State(kStateDim);
}

State step(const State& s, const Action& a, const EnvConfig& cfg)
{
    using namespace state_index;
    if (s.size() != kStateDim || a.size() != kActionDim)
        throw DimensionError("step: state/action dimension mismatch");
    const double lag = cfg.velocity_lag;
    const double g = cfg.gait_gain;
    State n(kStateDim);
    n[vx] = s[vx] + lag * (g * a[0] - s[vx]);
    n[vy] = s[vy] + lag * (g * a[1] - s[vy]);
    n[yaw_rate] = s[yaw_rate] + lag * (g * a[2] - s[yaw_rate]);
    const double c = std::cos(s[yaw]);
    const double sn = std::sin(s[yaw]);
    n[x] = s[x] + (n[vx] * c - n[vy] * sn) * cfg.dt;
    n[y] = s[y] + (n[vx] * sn + n[vy] * c) * cfg.dt;
    n[yaw] = wrap_angle(s[yaw] + n[yaw_rate] * cfg.dt);
    return n;
}

TaskResult descriptor_omni(const Trajectory& traj, const EnvConfig& cfg)
{
    using namespace state_index;
    if (traj.states.empty())
        throw DimensionError("empty trajectory");
    const State& last = traj.states.back();
    const double L = cfg.reach_bound;
    TaskResult r;
    r.descriptor = SkillDescriptor{(std::clamp(last[x], -L, L) + L) / (2.0 * L),
                                   (std::clamp(last[y], -L, L) + L) / (2.0 * L)};
    // Heading at the end of the circular arc through the origin tangent to the start heading.
    const double desired = 2.0 * std::atan2(last[y], last[x]);
    r.ret = -std::abs(wrap_angle(last[yaw] - desired));
    return r;
}

TaskResult descriptor_uni(const Trajectory& traj, const EnvConfig& cfg)
{
    using namespace state_index;
    if (traj.states.empty())
        throw DimensionError("empty trajectory");
    const double c = 0.005 * std::numbers::pi * cfg.uni_threshold_scale;
    const std::size_t T = traj.states.size() - 1;
    const std::size_t every = std::max<std::size_t>(1, cfg.uni_sample_every);
    const std::size_t K = T / every;
    TaskResult r;
    r.descriptor = SkillDescriptor(6);
    if (K > 0) {
        for (std::size_t m = 1; m <= K; ++m) {
            const State& s = traj.states[m * every];
            const double vals[3] = {s[vx], s[vy], s[yaw_rate]};
            for (std::size_t i = 0; i < 3; ++i) {
                if (vals[i] - c > 0.0)
                    r.descriptor[2 * i] += 1.0;
                if (-vals[i] - c > 0.0)
                    r.descriptor[2 * i + 1] += 1.0;
            }
        }
        for (auto& v : r.descriptor.values)
            v /= static_cast<double>(K);
    }
    r.ret = traj.states.back()[x];
    return r;
}

TaskResult evaluate_task(TaskKind task, const Trajectory& traj, const EnvConfig& cfg)
{
    return task == TaskKind::Omni ? descriptor_omni(traj, cfg) : descriptor_uni(traj, cfg);
}

EpisodeOutcome rollout_env(const PolicyParams& phi, const EnvConfig& cfg, TaskKind task)
{
    const PeriodicController ctrl(phi, cfg.period);
    EpisodeOutcome out;
    Trajectory& traj = out.trajectory;
    traj.states.reserve(cfg.episode_steps + 1);
    traj.actions.reserve(cfg.episode_steps);
    traj.states.push_back(initial_state());
    for (std::size_t t = 0; t < cfg.episode_steps; ++t) {
        Action a = controller_action(ctrl, static_cast<double>(t) * cfg.dt, cfg);
        traj.states.push_back(step(traj.states.back(), a, cfg));
        traj.actions.push_back(std::move(a));
    }
    const TaskResult r = evaluate_task(task, traj, cfg);
    traj.rewards.assign(cfg.episode_steps, 0.0);
    traj.rewards.back() = r.ret;
    out.descriptor = r.descriptor;
    out.ret = r.ret;
    out.transitions.reserve(cfg.episode_steps);
    for (std::size_t t = 0; t < cfg.episode_steps; ++t)
        out.transitions.push_back(Transition{traj.states[t], traj.actions[t], traj.states[t + 1]});
    return out;
}

} // namespace daqd
