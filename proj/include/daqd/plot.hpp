#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace daqd {

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `p` in [0, 1].
double quantile(std::vector<double> values, double p);

/// Per-x summary of one variant's replications.
struct SeriesSummary {
    std::string label;
    std::size_t replications = 0;
    std::vector<double> x;
    std::vector<double> median;
    std::vector<double> q25;
    std::vector<double> q75;
    bool has_band() const noexcept { return replications >= 3; }
};

inline constexpr const char* kPlotMetrics[] = {"repertoire_size", "qd_score"};

/// Group metrics CSVs into variants (files under <variant>/rep_<i>/ share a
/// series) and summarize `metric` on the union of their evals_used values.
/// Each run contributes its most recent row at or before every x.
std::vector<SeriesSummary> summarize_metrics(const std::vector<std::filesystem::path>& csvs, const std::string& metric);

std::string render_svg(const std::vector<SeriesSummary>& series, const std::string& metric);

/// Writes <out_dir>/<metric>.svg for every plotted metric; returns the paths.
std::vector<std::filesystem::path> plot_metrics(const std::vector<std::filesystem::path>& csvs,
                                                const std::filesystem::path& out_dir);

} // namespace daqd
