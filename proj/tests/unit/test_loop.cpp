#include "daqd/direct_model.hpp"
#include "daqd/loop.hpp"

#include "../support/equivalence.hpp"
#include "../support/oracles.hpp"
#include "../support/tmpdir.hpp"

#include <doctest.h>

#include <fstream>

using namespace daqd;

namespace {

LoopConfig small_config(LoopMode mode, std::size_t budget)
{
    LoopConfig cfg;
    cfg.mode = mode;
    cfg.eval_budget = budget;
    cfg.metrics_every = 100;
    cfg.model.hidden = 16;
    cfg.model.members = 2;
    cfg.train.epochs_per_update = 1;
    cfg.train.train_every_n_evals = 200;
    return cfg;
}

bool same_rows(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (format_metrics_row(a[i]) != format_metrics_row(b[i]))
            return false;
    return true;
}

} // namespace

TEST_CASE("vanilla QD")
{
    const Rng rng(derive_seed(0, 0));
    SUBCASE("init-only budget")
    {
        Environment env(EnvConfig{}, TaskKind::Omni);
        const LoopResult r = run_vanilla_qd(small_config(LoopMode::VanillaQD, 128), env, rng);
        CHECK(r.env_evals == 128);
        CHECK(env.evaluations() == 128);
        CHECK(r.repertoire.size() <= 128);
        CHECK(r.qd_iterations == 0);

        Environment env2(EnvConfig{}, TaskKind::Omni);
        const LoopResult big = run_vanilla_qd(small_config(LoopMode::VanillaQD, 2000), env2, rng);
        CHECK(big.env_evals == 2000);
        CHECK(big.repertoire.size() > r.repertoire.size());
        CHECK(big.real_outcomes.size() == 2000);
    }
    SUBCASE("same seed, same metrics")
    {
        Environment e1(EnvConfig{}, TaskKind::Omni), e2(EnvConfig{}, TaskKind::Omni);
        const auto a = run_vanilla_qd(small_config(LoopMode::VanillaQD, 700), e1, rng);
        const auto b = run_vanilla_qd(small_config(LoopMode::VanillaQD, 700), e2, rng);
        CHECK(same_rows(a.metrics, b.metrics));
    }
}

TEST_CASE("metrics log")
{
    testing_util::TempDir tmp("metrics");
    Environment env(EnvConfig{}, TaskKind::Omni);
    LoopOptions opt;
    opt.metrics_path = tmp / "metrics.csv";
    const LoopResult r = run_vanilla_qd(small_config(LoopMode::VanillaQD, 1000), env, Rng(1), opt);
    // One row at start, then one per 100 evals.
    CHECK(r.metrics.size() == 1000 / 100 + 1);
    std::ifstream in(opt.metrics_path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "evals_used,repertoire_size,qd_score,imagined_size,imagined_rollouts,model_nll_heldout,wall_time_s");
    const auto back = read_metrics_csv(opt.metrics_path);
    CHECK(same_rows(back, r.metrics));
    for (std::size_t i = 1; i < back.size(); ++i)
        CHECK(back[i].evals_used >= back[i - 1].evals_used);

    CHECK_THROWS_AS(MetricsLog(tmp / "no_such_dir" / "m.csv"), IoError);
    MetricsLog log;
    log.append(MetricsRow{10});
    CHECK_THROWS_AS(log.append(MetricsRow{5}), StateError);
}

TEST_CASE("metrics csv errors name the column")
{
    testing_util::TempDir tmp("mcsv");
    std::ofstream(tmp / "a.csv") << "evals_used,repertoire_size,qd,imagined_size,imagined_rollouts,model_nll_heldout,"
                                    "wall_time_s\n";
    try {
        read_metrics_csv(tmp / "a.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("'qd'") != std::string::npos);
    }
    std::ofstream(tmp / "b.csv") << kMetricsHeader << "\n1,2,x,0,0,,0\n";
    try {
        read_metrics_csv(tmp / "b.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("qd_score") != std::string::npos);
    }
}

TEST_CASE("DA-QD with a perfect model makes the same decisions as vanilla QD")
{
    const auto e = harness::oracle_equivalence(derive_seed(3, 0), 12);
    CHECK(e.batches == 12);
    CHECK(e.compared == 12 * 64);
    CHECK(e.mismatches == 0);
    CHECK(e.sizes_close());

    const auto multi = harness::oracle_equivalence(derive_seed(4, 0), 20, 5);
    CHECK(multi.batches == 20);
    CHECK(multi.mismatches == 0);
}

TEST_CASE("DA-QD accounting")
{
    const EnvConfig ec;
    const oracle::PerfectModel model(ec);
    LoopOptions opt;
    opt.external_model = &model;

    SUBCASE("env evaluations equal bootstrap plus selected and never exceed the budget")
    {
        LoopConfig cfg = small_config(LoopMode::DAQD, 600);
        Environment env(ec, TaskKind::Omni);
        const LoopResult r = run_daqd(cfg, env, Rng(4), opt);
        CHECK(r.env_evals == env.evaluations());
        CHECK(r.env_evals <= 600);
        CHECK(r.real_outcomes.size() == r.env_evals);
        CHECK(r.imagined_rollouts == 64 * r.qd_iterations);
        CHECK(r.metrics.back().evals_used == r.env_evals);
        // Synced at the end of every cycle.
        CHECK(r.imagined.size() == r.repertoire.size());
    }
    SUBCASE("low-disagreement selection sends at most `take` per cycle")
    {
        LoopConfig cfg = small_config(LoopMode::DAQD, 140);
        cfg.selection.kind = SelectionStrategy::Kind::LowDisagreementTopN;
        cfg.selection.take = 2;
        cfg.max_qd_iterations = 30;
        cfg.imagination_iters_per_cycle = 3;
        Environment env(ec, TaskKind::Omni);
        const LoopResult r = run_daqd(cfg, env, Rng(5), opt);
        CHECK(r.env_evals <= 128 + 2 * 10);
        CHECK(r.env_evals > 128);
    }
    SUBCASE("stop on imagined additions")
    {
        LoopConfig cfg = small_config(LoopMode::DAQD, 100000);
        cfg.stop_rule.kind = StopRule::Kind::ImaginedAdditionsBelow;
        cfg.stop_rule.threshold = 1000.0;
        cfg.stop_rule.window = 3;
        Environment env(ec, TaskKind::Omni);
        const LoopResult r = run_daqd(cfg, env, Rng(6), opt);
        CHECK(r.stop_reason == "imagined additions below threshold");
        CHECK(r.qd_iterations == 3);
    }
}

TEST_CASE("addition window")
{
    AdditionWindow w(3);
    w.push(0);
    w.push(0);
    CHECK_FALSE(w.below(1.0));
    w.push(2);
    CHECK(w.below(1.0));
    w.push(2);
    CHECK_FALSE(w.below(1.0));
    CHECK(w.mean() == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("learned DA-QD and the surrogate baseline run end to end")
{
    for (LoopMode mode : {LoopMode::DAQD, LoopMode::DirectSurrogateQD, LoopMode::Random}) {
        Environment e1(EnvConfig{}, TaskKind::Omni), e2(EnvConfig{}, TaskKind::Omni);
        const LoopConfig cfg = small_config(mode, 400);
        const LoopResult a = run_loop(cfg, e1, Rng(7));
        const LoopResult b = run_loop(cfg, e2, Rng(7));
        CHECK(a.env_evals <= 400);
        CHECK(a.env_evals == e1.evaluations());
        CHECK(same_rows(a.metrics, b.metrics));
        CHECK(a.repertoire.size() == b.repertoire.size());
        if (mode == LoopMode::DAQD)
            CHECK(a.model != nullptr);
    }
}

TEST_CASE("direct surrogate learns the genotype-to-descriptor map")
{
    Rng rng(8);
    const EnvConfig ec;
    DirectSurrogate s(kGenotypeDim, 2, 64, Rng(1));
    std::vector<PolicyParams> test_g;
    std::vector<SkillDescriptor> test_sd;
    for (const auto& g : random_genotypes(200, kGenotypeDim, rng)) {
        test_g.push_back(g);
        test_sd.push_back(rollout_env(g, ec, TaskKind::Omni).descriptor);
    }
    for (const auto& g : random_genotypes(2000, kGenotypeDim, rng)) {
        const auto o = rollout_env(g, ec, TaskKind::Omni);
        s.add(g, o.descriptor, o.ret);
    }
    const double before = s.descriptor_mse(test_g, test_sd);
    TrainConfig tc;
    tc.epochs_per_update = 30;
    Rng tr(2);
    CHECK(s.train(tc, 64, tr).skipped == false);
    CHECK(s.descriptor_mse(test_g, test_sd) < before);

    DirectSurrogate cold(kGenotypeDim, 2, 8, Rng(1));
    CHECK(cold.train(tc, 64, tr).skipped);
}

TEST_CASE("imagination only, few-shot and acquisition")
{
    const EnvConfig ec;
    const oracle::PerfectModel model(ec);
    ImaginationConfig ic;
    ic.imagined_rollouts = 0;
    CHECK(run_imagination_only(ic, model, ec, TaskKind::Uni, Rng(1)).imagined.empty());

    ic.imagined_rollouts = 600;
    const ImaginationResult r = run_imagination_only(ic, model, ec, TaskKind::Uni, Rng(1));
    CHECK(r.imagined_rollouts == 600);
    CHECK(r.imagined.descriptor_dim() == 6);
    CHECK(r.imagined.size() > 0);

    Environment env(ec, TaskKind::Uni);
    const FewShotReport one = zero_few_shot_eval(r.imagined, env, 1);
    CHECK(one.realized_returns.size() == 1);
    CHECK(env.evaluations() == 1);
    const FewShotReport twenty = zero_few_shot_eval(r.imagined, env, 20);
    CHECK(twenty.best_ret >= one.best_ret);
    // Perfect model: imagined and realized returns agree.
    CHECK(one.realized_returns[0] == one.imagined_returns[0]);

    Repertoire tiny(6);
    RepertoireEntry e = r.imagined[0];
    tiny.insert_unchecked(e);
    const FewShotReport shrunk = zero_few_shot_eval(tiny, env, 5);
    CHECK(shrunk.pool == 1);
    CHECK_FALSE(shrunk.warning.empty());

    Environment acq_env(ec, TaskKind::Uni);
    const AcquisitionResult acq = acquire_from_imagined(r.imagined, acq_env, RepertoireParams{});
    CHECK(acq.env_evals == r.imagined.size());
    CHECK(acq_env.evaluations() == r.imagined.size());
    CHECK(acq.repertoire.size() <= r.imagined.size());
    CHECK(acq.repertoire.size() > 0);
}

TEST_CASE("loop config validation")
{
    LoopConfig cfg;
    cfg.eval_budget = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.eval_budget = 10;
    cfg.selection.kind = SelectionStrategy::Kind::LowDisagreementTopN;
    cfg.selection.take = 30;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(loop_mode_from_string("map-elites"), ConfigError);
}
