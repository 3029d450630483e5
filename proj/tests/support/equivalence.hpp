#pragma once

#include "daqd/loop.hpp"

#include <cmath>

#include "oracles.hpp"

namespace harness {

struct Equivalence {
    /// Imagined decisions re-made by vanilla QD from the same container on the same children.
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    std::size_t batches = 0;
    std::size_t vanilla_size = 0;
    std::size_t daqd_size = 0;

    /// Real repertoire sizes of the two full runs within 2% of each other.
    bool sizes_close() const
    {
        const double v = static_cast<double>(vanilla_size), d = static_cast<double>(daqd_size);
        return std::abs(v - d) <= 0.02 * v;
    }
};

/// DA-QD driven by the perfect model. After every imagined batch, vanilla QD
/// takes the same children from the same starting container, with outcomes
/// from the real env, and must reach the same decisions. A full vanilla run on
/// the same seed gives the reference repertoire size.
inline Equivalence oracle_equivalence(std::uint64_t seed, std::size_t qd_iterations,
                                      std::size_t iters_per_cycle = 1)
{
    daqd::LoopConfig cfg;
    cfg.eval_budget = 1000000;
    cfg.max_qd_iterations = qd_iterations;
    cfg.imagination_iters_per_cycle = iters_per_cycle;
    cfg.selection.kind = daqd::SelectionStrategy::Kind::AllImagined;
    cfg.metrics_every = 1000;
    const daqd::EnvConfig ec;
    const daqd::Rng rng(seed);

    Equivalence e;
    const oracle::PerfectModel model(ec);
    daqd::LoopOptions opt;
    opt.external_model = &model;
    opt.on_imagined_batch = [&](const daqd::Repertoire& before, const std::vector<daqd::PolicyParams>& children,
                                const std::vector<daqd::AdditionOutcome>& decisions) {
        daqd::Repertoire vanilla = before;
        for (std::size_t i = 0; i < children.size(); ++i) {
            const auto real = daqd::rollout_env(children[i], ec, daqd::TaskKind::Omni);
            daqd::RepertoireEntry entry;
            entry.policy = children[i];
            entry.descriptor = real.descriptor;
            entry.ret = real.ret;
            ++e.compared;
            if (!daqd::same_decision(vanilla.try_add(entry), decisions.at(i)))
                ++e.mismatches;
        }
        ++e.batches;
    };
    daqd::Environment env_b(ec, daqd::TaskKind::Omni);
    cfg.mode = daqd::LoopMode::DAQD;
    const daqd::LoopResult b = daqd::run_daqd(cfg, env_b, rng, opt);

    daqd::Environment env_a(ec, daqd::TaskKind::Omni);
    cfg.mode = daqd::LoopMode::VanillaQD;
    const daqd::LoopResult a = daqd::run_vanilla_qd(cfg, env_a, rng);

    e.vanilla_size = a.repertoire.size();
    e.daqd_size = b.repertoire.size();
    return e;
}

} // namespace harness
