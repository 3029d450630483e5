#include "daqd/experiments.hpp"

#include "daqd/variation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

namespace daqd {

namespace {

namespace fs = std::filesystem;

std::ofstream open_csv(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

void close_csv(std::ofstream& os, const fs::path& path)
{
    os.close();
    if (!os)
        throw IoError("write failed for " + path.string());
}

std::string real_or_empty(double v)
{
    return std::isfinite(v) ? format_real(v) : std::string();
}

void run_loop_command(const RunConfig& cfg, const Rng& rng, const fs::path& dir)
{
    Environment env(cfg.env, cfg.task);
    LoopOptions opt;
    opt.metrics_path = dir / "metrics.csv";
    const LoopResult r = run_loop(cfg.loop, env, rng, opt);

    save_repertoire(r.repertoire, dir / "repertoire.csv");
    if (cfg.loop.mode == LoopMode::DAQD || cfg.loop.mode == LoopMode::DirectSurrogateQD)
        save_repertoire(r.imagined, dir / "imagined_repertoire.csv");
    if (r.model)
        r.model->save(dir / "model.ckpt");

    const fs::path path = dir / "summary.csv";
    auto os = open_csv(path);
    os << "mode,env_evals,repertoire_size,qd_score,mean_return,imagined_size,imagined_rollouts,qd_iterations,"
          "train_updates,stop_reason\n";
    os << to_string(cfg.loop.mode) << ',' << r.env_evals << ',' << r.repertoire.size() << ','
       << format_real(r.repertoire.qd_score()) << ',' << format_real(r.repertoire.mean_return()) << ','
       << r.imagined.size() << ',' << r.imagined_rollouts << ',' << r.qd_iterations << ',' << r.train_updates << ','
       << r.stop_reason << '\n';
    close_csv(os, path);
}

void write_repertoire_row(std::ostream& os, const std::string& variant, std::size_t evals, const Repertoire& rep)
{
    os << variant << ',' << evals << ',' << rep.size() << ',' << format_real(rep.mean_return()) << ','
       << format_real(rep.qd_score()) << '\n';
}

void run_imagination_command(const RunConfig& cfg, std::size_t index, const Rng& rng, const fs::path& dir)
{
    const EnsembleDynamicsModel model =
        EnsembleDynamicsModel::load(resolve_input(cfg.imagination.model, index, "model.ckpt"));
    ImaginationConfig ic;
    ic.imagined_rollouts = cfg.imagination.rollouts;
    ic.variation = cfg.loop.variation;
    ic.repertoire = cfg.loop.repertoire;
    ic.stop_rule = cfg.loop.stop_rule;
    const ImaginationResult res = run_imagination_only(ic, model, cfg.env, cfg.task, rng);
    save_repertoire(res.imagined, dir / "imagined_repertoire.csv");

    const fs::path path = dir / "acquisition.csv";
    auto os = open_csv(path);
    os << "variant,env_evals,repertoire_size,mean_return,qd_score\n";
    write_repertoire_row(os, "imagined", 0, res.imagined);
    if (cfg.imagination.acquire || cfg.imagination.equivalent_qd) {
        Environment env(cfg.env, cfg.task);
        const AcquisitionResult acq = acquire_from_imagined(res.imagined, env, cfg.loop.repertoire);
        save_repertoire(acq.repertoire, dir / "acquired_repertoire.csv");
        write_repertoire_row(os, "acquired", acq.env_evals, acq.repertoire);
        if (cfg.imagination.equivalent_qd) {
            LoopConfig lc = cfg.loop;
            lc.mode = LoopMode::VanillaQD;
            lc.eval_budget = std::max<std::size_t>(acq.env_evals, 1);
            Environment qd_env(cfg.env, cfg.task);
            LoopOptions opt;
            opt.metrics_path = dir / "equivalent_metrics.csv";
            const LoopResult eq = run_vanilla_qd(lc, qd_env, rng, opt);
            save_repertoire(eq.repertoire, dir / "equivalent_repertoire.csv");
            write_repertoire_row(os, "equivalent_qd", eq.env_evals, eq.repertoire);
        }
    }
    close_csv(os, path);

    const fs::path ipath = dir / "imagination.csv";
    auto is = open_csv(ipath);
    is << "imagined_rollouts,qd_iterations,imagined_size,stop_reason\n"
       << res.imagined_rollouts << ',' << res.qd_iterations << ',' << res.imagined.size() << ',' << res.stop_reason
       << '\n';
    close_csv(is, ipath);
}

void run_fewshot_command(const RunConfig& cfg, std::size_t index, const Rng& rng, const fs::path& dir)
{
    const Repertoire imagined =
        load_repertoire(resolve_input(cfg.fewshot.input, index, "imagined_repertoire.csv"), cfg.loop.repertoire);
    Environment env(cfg.env, cfg.task);

    const fs::path path = dir / "fewshot.csv";
    const fs::path epath = dir / "fewshot_entries.csv";
    auto os = open_csv(path);
    auto es = open_csv(epath);
    os << "shots,evaluated,pool,best_ret,mean_ret,warning\n";
    es << "shots,rank,entry_id,imagined_ret,realized_ret\n";
    for (std::size_t shots : cfg.fewshot.shots) {
        const FewShotReport r = zero_few_shot_eval(imagined, env, std::max<std::size_t>(shots, 1), cfg.fewshot.pool);
        os << shots << ',' << r.realized_returns.size() << ',' << r.pool << ',' << format_real(r.best_ret) << ','
           << format_real(r.mean_ret) << ',' << r.warning << '\n';
        for (std::size_t i = 0; i < r.entry_ids.size(); ++i)
            es << shots << ',' << i << ',' << r.entry_ids[i] << ',' << format_real(r.imagined_returns[i]) << ','
               << format_real(r.realized_returns[i]) << '\n';
    }
    close_csv(os, path);
    close_csv(es, epath);

    if (cfg.fewshot.random_reference > 0) {
        Rng init = rng.derive(streams::kInit);
        const auto genotypes = random_genotypes(cfg.fewshot.random_reference, kGenotypeDim, init);
        const fs::path rpath = dir / "random_reference.csv";
        auto rs = open_csv(rpath);
        rs << "index,ret\n";
        for (std::size_t i = 0; i < genotypes.size(); ++i)
            rs << i << ',' << format_real(env.evaluate(genotypes[i]).ret) << '\n';
        close_csv(rs, rpath);
    }
}

void run_rte_command(const RunConfig& cfg, std::size_t index, const Rng& rng, const fs::path& dir)
{
    const Repertoire rep =
        load_repertoire(resolve_input(cfg.rte.repertoire, index, "repertoire.csv"), cfg.loop.repertoire);
    const Maze maze = Maze::load(cfg.rte.maze);
    const SkillLibrary lib = build_skill_library(rep, cfg.env, cfg.rte.path_stride);
    const RteReport report = rte_episode(maze, lib, cfg.env, cfg.rte.planner, rng.derive(streams::kPlanner));
    write_rte_csv(report, dir / "rte_steps.csv");

    const auto [gp_err, sim_err] = report.prediction_errors(10);
    const fs::path path = dir / "rte_summary.csv";
    auto os = open_csv(path);
    os << "skills_executed,reached,damaged,gp_error_after_10,sim_error_after_10\n";
    os << report.skills_executed << ',' << (report.reached ? 1 : 0) << ',' << (cfg.env.damaged() ? 1 : 0) << ','
       << real_or_empty(gp_err) << ',' << real_or_empty(sim_err) << '\n';
    close_csv(os, path);
}

} // namespace

fs::path replication_dir(const fs::path& output_dir, std::size_t index)
{
    return output_dir / ("rep_" + std::to_string(index));
}

fs::path resolve_input(const fs::path& p, std::size_t index, const std::string& name)
{
    if (p.empty())
        throw ConfigError("input path for " + name + " is empty");
    if (fs::is_regular_file(p))
        return p;
    if (fs::is_directory(p)) {
        for (const fs::path& c : {replication_dir(p, index) / name, p / name, replication_dir(p, 0) / name})
            if (fs::is_regular_file(c))
                return c;
        throw IoError("no " + name + " under " + p.string());
    }
    throw IoError("input " + p.string() + " does not exist");
}

void run_replication(const RunConfig& cfg, std::size_t index, const fs::path& dir)
{
    fs::create_directories(dir);
    const Rng rng(derive_seed(cfg.seed, index));
    switch (cfg.command) {
    case Command::RunQd:
    case Command::RunDaqd:
    case Command::RunMqd:
    case Command::RunRandom:
        run_loop_command(cfg, rng, dir);
        break;
    case Command::RunImagination:
        run_imagination_command(cfg, index, rng, dir);
        break;
    case Command::RunFewShot:
        run_fewshot_command(cfg, index, rng, dir);
        break;
    case Command::RunRte:
        run_rte_command(cfg, index, rng, dir);
        break;
    }
}

void execute(const RunConfig& cfg)
{
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
    {
        const fs::path path = cfg.output_dir / kManifestName;
        auto os = open_csv(path);
        os << "# daqd " << cfg.version << '\n' << render_config(cfg);
        close_csv(os, path);
    }

    std::vector<std::exception_ptr> errors(cfg.replications);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.replications; i = next++) {
            try {
                run_replication(cfg, i, replication_dir(cfg.output_dir, i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(cfg.workers, cfg.replications);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

void replay_manifest(const fs::path& manifest, const fs::path& output_dir)
{
    ConfigStore store;
    store.read_file(manifest);
    if (!output_dir.empty())
        store.set("run.output_dir", output_dir.string());
    execute(store.resolve());
}

} // namespace daqd
