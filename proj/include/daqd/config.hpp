#pragma once

#include "daqd/loop.hpp"
#include "daqd/rte.hpp"
#include "daqd/toy_env.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace daqd {

enum class Command { RunQd, RunDaqd, RunMqd, RunRandom, RunImagination, RunFewShot, RunRte };

const char* to_string(Command c);
Command command_from_string(const std::string& s);

struct ImaginationSpec {
    /// Model checkpoint, or a run directory holding model.ckpt (per replication).
    std::filesystem::path model;
    std::size_t rollouts = 20000;
    /// Evaluate every imagined entry in the env afterwards.
    bool acquire = false;
    /// Also run vanilla QD with as many env evals as the acquisition used.
    bool equivalent_qd = false;
};

struct FewShotSpec {
    /// Imagined repertoire CSV, or a run directory holding imagined_repertoire.csv.
    std::filesystem::path input;
    /// Shot counts to report; 0 evaluates the single top entry.
    std::vector<std::size_t> shots{0, 20};
    std::size_t pool = 20;
    /// Random genotypes evaluated as a reference distribution (0 = none).
    std::size_t random_reference = 0;
};

struct RteSpec {
    /// Repertoire CSV, or a run directory holding repertoire.csv.
    std::filesystem::path repertoire;
    std::filesystem::path maze;
    std::size_t path_stride = 5;
    PlannerConfig planner;
};

struct RunConfig {
    Command command = Command::RunQd;
    TaskKind task = TaskKind::Omni;
    std::uint64_t seed = 0;
    std::size_t replications = 1;
    std::size_t workers = 1;
    std::filesystem::path output_dir;
    std::string version;

    EnvConfig env;
    LoopConfig loop;
    ImaginationSpec imagination;
    FewShotSpec fewshot;
    RteSpec rte;

    void validate() const;
};

/// Output directory used when the config does not name one: $DAQD_OUTPUT_DIR, else "daqd_out".
std::filesystem::path default_output_dir();

/// Flat `section.key = value` store. Every key is checked against the known
/// set when it is assigned; values are type-checked by resolve().
class ConfigStore {
public:
    ConfigStore() = default;

    /// INI-like text: `[section]` headers, `key = value` lines, `#` or `;` comments.
    void parse(const std::string& text, const std::string& origin = "config");
    void read_file(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value);
    /// "section.key=value".
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    /// Defaults, then stored values; checks required fields for `command`
    /// (or run.command when none is given) and validates the result.
    RunConfig resolve() const;
    RunConfig resolve(Command command) const;

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

/// Every key with its resolved value, grouped by section; parseable by ConfigStore.
std::string render_config(const RunConfig& cfg);
/// Resolved value of one key as render_config would print it.
std::string config_value(const RunConfig& cfg, const std::string& key);

std::string library_version();

} // namespace daqd
