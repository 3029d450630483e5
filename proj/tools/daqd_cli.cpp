#include "daqd/daqd.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace {

int fail(daqd_status s)
{
    std::fprintf(stderr, "daqd: %s: %s\n", daqd_status_name(s), daqd_last_error());
    return static_cast<int>(s);
}

struct RunArgs {
    std::string config;
    std::vector<std::string> overrides;
};

int run_command(const std::string& command, const RunArgs& args)
{
    daqd_config* cfg = nullptr;
    daqd_status s = daqd_config_create(command.c_str(), &cfg);
    if (s != DAQD_OK)
        return fail(s);
    if (!args.config.empty())
        s = daqd_config_read_file(cfg, args.config.c_str());
    for (std::size_t i = 0; s == DAQD_OK && i < args.overrides.size(); ++i)
        s = daqd_config_override(cfg, args.overrides[i].c_str());
    std::string out_dir(4096, '\0');
    std::size_t len = 0;
    if (s == DAQD_OK)
        s = daqd_execute(cfg, out_dir.data(), out_dir.size(), &len);
    daqd_config_destroy(cfg);
    if (s != DAQD_OK)
        return fail(s);
    out_dir.resize(std::min(len, out_dir.size() - 1));
    std::printf("%s: wrote %s\n", command.c_str(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamics-aware quality-diversity experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(daqd_version()));

    const char* runs[][2] = {
        {"run-qd", "Vanilla QD with env evaluations only"},
        {"run-daqd", "DA-QD: model-based imagined repertoire screening"},
        {"run-mqd", "QD screened by a direct genotype-to-outcome surrogate"},
        {"run-random", "Random genotypes added to the repertoire"},
        {"run-imagination", "QD purely in imagination from a trained model checkpoint"},
        {"run-fewshot", "Zero/few-shot selection from an imagined repertoire"},
        {"run-rte", "Maze navigation with a repertoire, GP residuals and MCTS"},
    };
    std::vector<RunArgs> run_args(std::size(runs));
    std::vector<CLI::App*> run_apps;
    for (std::size_t i = 0; i < std::size(runs); ++i) {
        CLI::App* sub = app.add_subcommand(runs[i][0], runs[i][1]);
        sub->add_option("-c,--config", run_args[i].config, "Config file")->check(CLI::ExistingFile);
        sub->add_option("overrides", run_args[i].overrides, "section.key=value overrides");
        run_apps.push_back(sub);
    }

    std::vector<std::string> csvs;
    std::string plot_dir = ".";
    CLI::App* plot = app.add_subcommand("plot", "SVG curves (median and IQR band) from metrics CSVs");
    plot->add_option("csvs", csvs, "metrics.csv files; files under <variant>/rep_<i>/ form one series")->required();
    plot->add_option("-o,--output-dir", plot_dir, "Directory for the SVG files");

    std::string manifest, replay_dir;
    CLI::App* replay = app.add_subcommand("replay", "Re-run a run manifest");
    replay->add_option("manifest", manifest, "manifest.ini of an earlier run")->required()->check(CLI::ExistingFile);
    replay->add_option("-o,--output-dir", replay_dir, "Output directory (default: the recorded one)");

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < run_apps.size(); ++i)
        if (run_apps[i]->parsed())
            return run_command(runs[i][0], run_args[i]);

    if (plot->parsed()) {
        std::vector<const char*> paths;
        for (const auto& c : csvs)
            paths.push_back(c.c_str());
        const daqd_status s = daqd_plot(paths.data(), paths.size(), plot_dir.c_str());
        if (s != DAQD_OK)
            return fail(s);
        std::printf("plot: wrote %s/repertoire_size.svg and %s/qd_score.svg\n", plot_dir.c_str(), plot_dir.c_str());
        return 0;
    }
    if (replay->parsed()) {
        const daqd_status s = daqd_replay(manifest.c_str(), replay_dir.empty() ? nullptr : replay_dir.c_str());
        if (s != DAQD_OK)
            return fail(s);
        std::printf("replay: done\n");
        return 0;
    }
    return 0;
}
