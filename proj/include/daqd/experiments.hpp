#pragma once

#include "daqd/config.hpp"

#include <filesystem>
#include <string>

namespace daqd {

inline constexpr const char* kManifestName = "manifest.ini";

/// Write <output_dir>/manifest.ini, then run every replication into
/// <output_dir>/rep_<i>, fanned out over cfg.workers threads.
void execute(const RunConfig& cfg);

/// One replication, seeded with derive_seed(cfg.seed, index).
void run_replication(const RunConfig& cfg, std::size_t index, const std::filesystem::path& dir);

std::filesystem::path replication_dir(const std::filesystem::path& output_dir, std::size_t index);

/// Locate an input for replication `index`: `p` itself when it is a file,
/// otherwise p/rep_<index>/name, p/name, then p/rep_0/name.
std::filesystem::path resolve_input(const std::filesystem::path& p, std::size_t index, const std::string& name);

/// Load a manifest and re-run it, optionally into another output directory.
void replay_manifest(const std::filesystem::path& manifest, const std::filesystem::path& output_dir = {});

} // namespace daqd
