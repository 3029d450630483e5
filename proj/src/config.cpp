#include "daqd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#ifndef DAQD_VERSION_STRING
#define DAQD_VERSION_STRING "0.0.0-unknown"
#endif

namespace daqd {

namespace {

struct CommandName {
    Command command;
    const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::RunQd, "run-qd"},
    {Command::RunDaqd, "run-daqd"},
    {Command::RunMqd, "run-mqd"},
    {Command::RunRandom, "run-random"},
    {Command::RunImagination, "run-imagination"},
    {Command::RunFewShot, "run-fewshot"},
    {Command::RunRte, "run-rte"},
};

using DamageMask = std::array<bool, kVirtualJoints>;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ','))
        out.push_back(trim(item));
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected)
{
    throw ConfigError("invalid value '" + value + "' for " + key + ": expected " + expected);
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || p != end)
        bad_value(key, v, "a non-negative integer");
    return out;
}

double parse_real(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || p != end || !std::isfinite(out))
        bad_value(key, v, "a finite real number");
    return out;
}

template <class T>
std::string encode(const T& v)
{
    if constexpr (std::is_same_v<T, bool>) {
        return v ? "true" : "false";
    } else if constexpr (std::is_same_v<T, double>) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    } else if constexpr (std::is_integral_v<T>) {
        return std::to_string(v);
    } else if constexpr (std::is_same_v<T, std::string>) {
        return v;
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
        return v.string();
    } else if constexpr (std::is_same_v<T, TaskKind>) {
        return to_string(v);
    } else if constexpr (std::is_same_v<T, Command>) {
        return to_string(v);
    } else if constexpr (std::is_same_v<T, SelectionStrategy::Kind>) {
        return v == SelectionStrategy::Kind::AllImagined ? "all" : "low_disagreement";
    } else if constexpr (std::is_same_v<T, StopRule::Kind>) {
        switch (v) {
        case StopRule::Kind::BudgetExhausted:
            return "budget";
        case StopRule::Kind::ImaginedAdditionsBelow:
            return "additions";
        case StopRule::Kind::Both:
            return "both";
        }
        return "budget";
    } else if constexpr (std::is_same_v<T, DamageMask>) {
        std::string out;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j])
                out += (out.empty() ? "" : ",") + std::to_string(j);
        return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out += (i ? "," : "") + std::to_string(v[i]);
        return out;
    } else {
        static_assert(sizeof(T) == 0, "no encoder");
    }
}

template <class T>
void decode(const std::string& key, const std::string& v, T& out)
{
    if constexpr (std::is_same_v<T, bool>) {
        if (v == "true" || v == "1" || v == "yes")
            out = true;
        else if (v == "false" || v == "0" || v == "no")
            out = false;
        else
            bad_value(key, v, "true or false");
    } else if constexpr (std::is_same_v<T, double>) {
        out = parse_real(key, v);
    } else if constexpr (std::is_integral_v<T>) {
        out = static_cast<T>(parse_unsigned(key, v));
    } else if constexpr (std::is_same_v<T, std::string>) {
        out = v;
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
        out = v;
    } else if constexpr (std::is_same_v<T, TaskKind>) {
        if (v != "omni" && v != "uni")
            bad_value(key, v, "omni or uni");
        out = task_from_string(v);
    } else if constexpr (std::is_same_v<T, Command>) {
        try {
            out = command_from_string(v);
        } catch (const ConfigError&) {
            bad_value(key, v, "a run-* subcommand name");
        }
    } else if constexpr (std::is_same_v<T, SelectionStrategy::Kind>) {
        if (v == "all")
            out = SelectionStrategy::Kind::AllImagined;
        else if (v == "low_disagreement")
            out = SelectionStrategy::Kind::LowDisagreementTopN;
        else
            bad_value(key, v, "all or low_disagreement");
    } else if constexpr (std::is_same_v<T, StopRule::Kind>) {
        if (v == "budget")
            out = StopRule::Kind::BudgetExhausted;
        else if (v == "additions")
            out = StopRule::Kind::ImaginedAdditionsBelow;
        else if (v == "both")
            out = StopRule::Kind::Both;
        else
            bad_value(key, v, "budget, additions or both");
    } else if constexpr (std::is_same_v<T, DamageMask>) {
        out = DamageMask{};
        if (v == "leg") {
            out = leg_damage_mask();
            return;
        }
        if (v.empty() || v == "none")
            return;
        for (const std::string& item : split_list(v)) {
            const std::uint64_t j = parse_unsigned(key, item);
            if (j >= kVirtualJoints)
                bad_value(key, v, "joint indices below " + std::to_string(kVirtualJoints) + ", 'leg' or empty");
            out[j] = true;
        }
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        out.clear();
        if (v.empty())
            return;
        for (const std::string& item : split_list(v))
            out.push_back(static_cast<std::size_t>(parse_unsigned(key, item)));
    } else {
        static_assert(sizeof(T) == 0, "no decoder");
    }
}

/// The single list of configurable fields, in manifest order.
template <class Cfg, class F>
void for_each_field(Cfg& c, F&& f)
{
    f("run.command", c.command);
    f("run.task", c.task);
    f("run.seed", c.seed);
    f("run.replications", c.replications);
    f("run.workers", c.workers);
    f("run.output_dir", c.output_dir);
    f("run.version", c.version);

    f("env.episode_steps", c.env.episode_steps);
    f("env.dt", c.env.dt);
    f("env.period", c.env.period);
    f("env.gait_gain", c.env.gait_gain);
    f("env.velocity_lag", c.env.velocity_lag);
    f("env.reach_bound", c.env.reach_bound);
    f("env.uni_threshold_scale", c.env.uni_threshold_scale);
    f("env.uni_sample_every", c.env.uni_sample_every);
    f("env.damage_mask", c.env.damage_mask);

    f("loop.eval_budget", c.loop.eval_budget);
    f("loop.imagination_iters_per_cycle", c.loop.imagination_iters_per_cycle);
    f("loop.metrics_every", c.loop.metrics_every);
    f("loop.max_idle_cycles", c.loop.max_idle_cycles);
    f("loop.max_qd_iterations", c.loop.max_qd_iterations);
    f("loop.record_wall_time", c.loop.record_wall_time);

    f("selection.strategy", c.loop.selection.kind);
    f("selection.pool", c.loop.selection.pool);
    f("selection.take", c.loop.selection.take);

    f("stop.rule", c.loop.stop_rule.kind);
    f("stop.threshold", c.loop.stop_rule.threshold);
    f("stop.window", c.loop.stop_rule.window);

    f("variation.sigma1", c.loop.variation.sigma1);
    f("variation.sigma2", c.loop.variation.sigma2);
    f("variation.batch_size", c.loop.variation.batch_size);
    f("variation.init_random_count", c.loop.variation.init_random_count);

    f("repertoire.distance_threshold", c.loop.repertoire.distance_threshold);
    f("repertoire.epsilon", c.loop.repertoire.epsilon);
    f("repertoire.k", c.loop.repertoire.k);

    f("model.members", c.loop.model.members);
    f("model.hidden", c.loop.model.hidden);
    f("model.buffer_capacity", c.loop.model.buffer_capacity);
    f("model.logstd_min", c.loop.model.logstd_min);
    f("model.logstd_max", c.loop.model.logstd_max);
    f("model.sample_imagination", c.loop.model.sample_imagination);

    f("train.learning_rate", c.loop.train.adam.learning_rate);
    f("train.beta1", c.loop.train.adam.beta1);
    f("train.beta2", c.loop.train.adam.beta2);
    f("train.adam_epsilon", c.loop.train.adam.epsilon);
    f("train.batch_size", c.loop.train.batch_size);
    f("train.epochs_per_update", c.loop.train.epochs_per_update);
    f("train.max_steps_per_update", c.loop.train.max_steps_per_update);
    f("train.train_every_n_evals", c.loop.train.train_every_n_evals);
    f("train.holdout_fraction", c.loop.train.holdout_fraction);

    f("imagination.model", c.imagination.model);
    f("imagination.rollouts", c.imagination.rollouts);
    f("imagination.acquire", c.imagination.acquire);
    f("imagination.equivalent_qd", c.imagination.equivalent_qd);

    f("fewshot.input", c.fewshot.input);
    f("fewshot.shots", c.fewshot.shots);
    f("fewshot.pool", c.fewshot.pool);
    f("fewshot.random_reference", c.fewshot.random_reference);

    f("rte.repertoire", c.rte.repertoire);
    f("rte.maze", c.rte.maze);
    f("rte.path_stride", c.rte.path_stride);
    f("rte.mcts_iterations", c.rte.planner.mcts_iterations);
    f("rte.rollout_depth", c.rte.planner.rollout_depth);
    f("rte.ucb_c", c.rte.planner.ucb_c);
    f("rte.action_set_size", c.rte.planner.action_set_size);
    f("rte.max_skills", c.rte.planner.max_skills);
    f("rte.goal_radius", c.rte.planner.goal_radius);
    f("rte.gp_length_scale", c.rte.planner.gp.length_scale);
    f("rte.gp_signal_std", c.rte.planner.gp.signal_std);
    f("rte.gp_noise_std", c.rte.planner.gp.noise_std);
}

LoopMode loop_mode_of(Command c)
{
    switch (c) {
    case Command::RunDaqd:
        return LoopMode::DAQD;
    case Command::RunMqd:
        return LoopMode::DirectSurrogateQD;
    case Command::RunRandom:
        return LoopMode::Random;
    default:
        return LoopMode::VanillaQD;
    }
}

std::vector<std::string> required_keys(Command c)
{
    switch (c) {
    case Command::RunQd:
    case Command::RunDaqd:
    case Command::RunMqd:
    case Command::RunRandom:
        return {"run.task", "run.seed", "loop.eval_budget"};
    case Command::RunImagination:
        return {"run.task", "run.seed", "imagination.model"};
    case Command::RunFewShot:
        return {"run.task", "run.seed", "fewshot.input"};
    case Command::RunRte:
        return {"run.seed", "rte.repertoire", "rte.maze"};
    }
    return {};
}

std::filesystem::path absolute_or_empty(const std::filesystem::path& p)
{
    return p.empty() ? p : std::filesystem::absolute(p).lexically_normal();
}

} // namespace

const char* to_string(Command c)
{
    for (const auto& e : kCommands)
        if (e.command == c)
            return e.name;
    return "run-qd";
}

Command command_from_string(const std::string& s)
{
    for (const auto& e : kCommands)
        if (s == e.name)
            return e.command;
    throw ConfigError("unknown command '" + s + "'");
}

void RunConfig::validate() const
{
    if (replications == 0)
        throw ConfigError("run.replications must be positive");
    if (workers == 0)
        throw ConfigError("run.workers must be positive");
    env.validate();
    loop.validate();
    if (imagination.rollouts == 0)
        throw ConfigError("imagination.rollouts must be positive");
    if (fewshot.pool == 0)
        throw ConfigError("fewshot.pool must be positive");
    if (fewshot.shots.empty())
        throw ConfigError("fewshot.shots must list at least one shot count");
    if (rte.path_stride == 0)
        throw ConfigError("rte.path_stride must be positive");
    rte.planner.validate();
}

std::filesystem::path default_output_dir()
{
    if (const char* env = std::getenv("DAQD_OUTPUT_DIR"); env && *env)
        return env;
    return "daqd_out";
}

const std::vector<std::string>& ConfigStore::known_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        RunConfig c;
        for_each_field(c, [&](const char* key, const auto&) { k.emplace_back(key); });
        return k;
    }();
    return keys;
}

void ConfigStore::set(const std::string& key, const std::string& value)
{
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

void ConfigStore::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigStore::parse(const std::string& text, const std::string& origin)
{
    std::istringstream is(text);
    std::string line, section;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ConfigError(where + ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + t + "'");
        if (section.empty())
            throw ConfigError(where + ": key outside of any [section]");
        const std::string key = section + "." + trim(t.substr(0, eq));
        if (!seen.insert(key).second)
            throw ConfigError(where + ": duplicate key '" + key + "'");
        try {
            set(key, trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

void ConfigStore::read_file(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    parse(ss.str(), path.string());
}

RunConfig ConfigStore::resolve() const
{
    const auto it = values_.find("run.command");
    if (it == values_.end())
        throw ConfigError("missing required field 'run.command'");
    Command c = Command::RunQd;
    decode("run.command", it->second, c);
    return resolve(c);
}

RunConfig ConfigStore::resolve(Command command) const
{
    for (const std::string& key : required_keys(command))
        if (!has(key))
            throw ConfigError("missing required field '" + key + "'");

    RunConfig cfg;
    cfg.output_dir = default_output_dir();
    for_each_field(cfg, [&](const char* key, auto& field) {
        if (const auto it = values_.find(key); it != values_.end())
            decode(key, it->second, field);
    });
    cfg.command = command;
    cfg.loop.mode = loop_mode_of(command);
    cfg.version = library_version();
    cfg.output_dir = absolute_or_empty(cfg.output_dir);
    cfg.imagination.model = absolute_or_empty(cfg.imagination.model);
    cfg.fewshot.input = absolute_or_empty(cfg.fewshot.input);
    cfg.rte.repertoire = absolute_or_empty(cfg.rte.repertoire);
    cfg.rte.maze = absolute_or_empty(cfg.rte.maze);
    if (cfg.output_dir.empty())
        throw ConfigError("run.output_dir must not be empty");
    cfg.validate();
    return cfg;
}

std::string render_config(const RunConfig& cfg)
{
    std::ostringstream os;
    std::string section;
    for_each_field(cfg, [&](const char* key, const auto& field) {
        const std::string k = key;
        const auto dot = k.find('.');
        const std::string sec = k.substr(0, dot);
        if (sec != section) {
            os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
            section = sec;
        }
        os << k.substr(dot + 1) << " = " << encode(field) << '\n';
    });
    return os.str();
}

std::string config_value(const RunConfig& cfg, const std::string& key)
{
    std::string out;
    bool found = false;
    for_each_field(cfg, [&](const char* k, const auto& field) {
        if (key == k) {
            out = encode(field);
            found = true;
        }
    });
    if (!found)
        throw ConfigError("unknown config key '" + key + "'");
    return out;
}

std::string library_version()
{
    return DAQD_VERSION_STRING;
}

} // namespace daqd
