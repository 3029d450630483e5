#include "daqd/dynamics_model.hpp"
#include "daqd/variation.hpp"

#include "../support/oracles.hpp"
#include "../support/synthetic.hpp"
#include "../support/tmpdir.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

using namespace daqd;

TEST_CASE("replay buffer evicts oldest first")
{
    ReplayBuffer buf(1, 1, 3);
    for (int i = 0; i < 5; ++i)
        buf.push(Transition{State{double(i)}, Action{0.0}, State{double(i + 1)}});
    CHECK(buf.size() == 3);
    CHECK(buf.total_pushed() == 5);
    CHECK(buf.at(0).state[0] == 2.0);
    CHECK(buf.at(2).state[0] == 4.0);
    CHECK_THROWS_AS(buf.push(Transition{State{1.0, 2.0}, Action{0.0}, State{1.0}}), DimensionError);
}

TEST_CASE("normalizer")
{
    Rng rng(1);
    Matrix data(3, 500);
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        data(0, j) = 5.0 + 3.0 * rng.normal();
        data(1, j) = -2.0 + 0.01 * rng.uniform();
        data(2, j) = 7.0;
    }
    const Normalizer n = Normalizer::fit(data);
    const Matrix z = n.apply(data);
    for (Eigen::Index i = 0; i < 2; ++i) {
        const double m = z.row(i).mean();
        const double s = std::sqrt((z.row(i).array() - m).square().mean());
        CHECK(std::abs(m) < 1e-9);
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
    CHECK(n.std[2] == 1.0);
}

TEST_CASE("nll_loss")
{
    const std::vector<double> t{0.3, -1.0}, one{1.0, 1.0};
    CHECK(nll_loss(t, one, t) == 0.0);
    const std::vector<double> off{1.3, -1.0};
    CHECK(nll_loss(off, one, t) == doctest::Approx(0.5));
    const std::vector<double> bad{1.0, 0.0};
    CHECK_THROWS_AS(nll_loss(t, bad, t), NumericError);
}

TEST_CASE("soft clamp stays in bounds with a consistent derivative")
{
    for (double raw = -20; raw <= 20; raw += 0.37) {
        double d = 0.0;
        const double v = soft_clamp(raw, -5.0, 2.0, &d);
        CHECK((v > -5.0 && v < 2.0));
        const double h = 1e-6;
        const double fd = (soft_clamp(raw + h, -5.0, 2.0) - soft_clamp(raw - h, -5.0, 2.0)) / (2 * h);
        CHECK(d == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("nll gradient matches central differences")
{
    Rng rng(7);
    for (int draw = 0; draw < 10; ++draw) {
        ProbNet net(4, 3, 2, -5.0, 2.0, rng);
        // Random biases too: the zero init puts layer-2 units exactly on the ReLU kink.
        // Scale 0.5 keeps the loss small enough for h = 1e-5 differences.
        for (double& w : net.net().parameters())
            w = 0.5 * rng.normal();
        Matrix x(4, 5), y(2, 5);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y.data()[i] = rng.normal();
        ColVector grad;
        net.loss_and_gradient(x, y, &grad);
        ColVector& w = net.net().parameters();
        double worst = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double keep = w[i], h = 1e-5;
            w[i] = keep + h;
            const double up = net.loss_and_gradient(x, y, nullptr);
            w[i] = keep - h;
            const double down = net.loss_and_gradient(x, y, nullptr);
            w[i] = keep;
            const double fd = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd) + std::abs(grad[i])));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("fresh ensemble predictions are finite and clamped")
{
    ModelConfig mc;
    mc.hidden = 16;
    EnsembleDynamicsModel model(kStateDim, kActionDim, {state_index::yaw}, mc, Rng(3));
    CHECK_FALSE(model.ready());
    const auto [delta, sigma] = model.predict(State(kStateDim, 0.3), Action(kActionDim, -0.2), 1);
    for (std::size_t i = 0; i < kStateDim; ++i) {
        CHECK(std::isfinite(delta[i]));
        CHECK(sigma[i] >= std::exp(mc.logstd_min));
        CHECK(sigma[i] <= std::exp(mc.logstd_max));
    }
    CHECK_THROWS_AS(model.predict(State(kStateDim), Action(kActionDim), 4), std::out_of_range);
    CHECK_THROWS_AS(rollout_imagined(model, PolicyParams(kGenotypeDim, 0.1), EnvConfig{}, TaskKind::Omni),
                    StateError);
}

TEST_CASE("training on linear dynamics")
{
    ModelConfig mc;
    mc.members = 2;
    mc.hidden = 32;
    TrainConfig tc;
    tc.epochs_per_update = 4;
    const ReplayBuffer buf = synthetic::linear_buffer(4000, 3, 17);

    EnsembleDynamicsModel a(3, 3, {}, mc, Rng(5));
    Rng ra(9);
    const TrainReport r = a.train(buf, tc, ra);
    CHECK_FALSE(r.skipped);
    CHECK(r.holdout_size == 400);
    CHECK(r.mean_nll_after < r.mean_nll_before);

    SUBCASE("same seed, same weights")
    {
        EnsembleDynamicsModel b(3, 3, {}, mc, Rng(5));
        Rng rb(9);
        b.train(buf, tc, rb);
        for (std::size_t m = 0; m < 2; ++m)
            CHECK(a.members()[m].net().parameters() == b.members()[m].net().parameters());
    }
    SUBCASE("small buffer is skipped")
    {
        const ReplayBuffer tiny = synthetic::linear_buffer(10, 3, 1);
        Rng rt(1);
        const TrainReport s = a.train(tiny, tc, rt);
        CHECK(s.skipped);
        CHECK_FALSE(s.message.empty());
        ReplayBuffer empty(3, 3, 10);
        CHECK(a.train(empty, tc, rt).skipped);
    }
    SUBCASE("checkpoint round trip is bit-exact")
    {
        testing_util::TempDir tmp("ckpt");
        a.save(tmp / "m.ckpt");
        const EnsembleDynamicsModel back = EnsembleDynamicsModel::load(tmp / "m.ckpt");
        CHECK(back.updates() == a.updates());
        CHECK(back.input_normalizer().mean == a.input_normalizer().mean);
        CHECK(back.target_normalizer().std == a.target_normalizer().std);
        for (std::size_t m = 0; m < 2; ++m)
            CHECK(back.members()[m].net().parameters() == a.members()[m].net().parameters());
        const State s{0.1, 0.2, 0.3};
        const Action u{0.3, -0.1, 0.5};
        CHECK(back.predict(s, u, 1).first == a.predict(s, u, 1).first);

        std::ofstream(tmp / "bad.ckpt") << "daqd-ensemble 1\ndims 3\n";
        CHECK_THROWS(EnsembleDynamicsModel::load(tmp / "bad.ckpt"));
    }
}

TEST_CASE("held-out nll keeps falling over the first updates")
{
    ModelConfig mc;
    mc.members = 2;
    mc.hidden = 32;
    TrainConfig tc;
    tc.epochs_per_update = 2;
    const ReplayBuffer buf = synthetic::linear_buffer(3000, 3, 4);
    EnsembleDynamicsModel model(3, 3, {}, mc, Rng(6));
    Rng rng(2);
    double prev = std::numeric_limits<double>::infinity();
    for (int u = 0; u < 5; ++u) {
        Rng r = rng.derive(static_cast<std::uint64_t>(u));
        const TrainReport rep = model.train(buf, tc, r);
        // Fresh hold-out each time; allow 5% of slack.
        CHECK(rep.mean_nll_after <= prev + 0.05 * std::abs(prev));
        prev = rep.mean_nll_after;
    }
}

TEST_CASE("imagined rollouts with test-double models")
{
    const EnvConfig cfg;
    Rng rng(12);
    const auto genotypes = random_genotypes(40, kGenotypeDim, rng);

    SUBCASE("a perfect model reproduces the env exactly with zero disagreement")
    {
        const oracle::PerfectModel model(cfg, 3);
        for (TaskKind task : {TaskKind::Omni, TaskKind::Uni}) {
            const auto outs = rollout_imagined_batch(model, genotypes, cfg, task);
            for (std::size_t i = 0; i < genotypes.size(); ++i) {
                const auto real = rollout_env(genotypes[i], cfg, task);
                CHECK(outs[i].descriptor == real.descriptor);
                CHECK(outs[i].ret == real.ret);
                CHECK(disagreement_score(outs[i]) == 0.0);
            }
        }
    }
    SUBCASE("two members a constant offset apart")
    {
        // Offsets on y of +d and -d: across-member variance d^2 on one of six dims.
        const double d = 0.01;
        const oracle::OffsetModel model(cfg, {d, -d}, state_index::y);
        const auto o = rollout_imagined(model, genotypes[0], cfg, TaskKind::Omni);
        CHECK(o.disagreement == doctest::Approx(d * d / 6.0).epsilon(1e-9));
    }
    SUBCASE("disagreement grows with member spread")
    {
        const oracle::OffsetModel small(cfg, {0.0, 0.01}, state_index::vx);
        const oracle::OffsetModel large(cfg, {0.0, 0.02}, state_index::vx);
        const auto a = rollout_imagined_batch(small, genotypes, cfg, TaskKind::Omni);
        const auto b = rollout_imagined_batch(large, genotypes, cfg, TaskKind::Omni);
        for (std::size_t i = 0; i < genotypes.size(); ++i)
            CHECK(b[i].disagreement > a[i].disagreement);
    }
}

TEST_CASE("model trained on env transitions imagines descriptors close to the real ones")
{
    const EnvConfig ec;
    Rng rng(21);
    ModelConfig mc;
    mc.members = 2;
    EnsembleDynamicsModel model(kStateDim, kActionDim, {state_index::yaw}, mc, Rng(4));
    ReplayBuffer buf(kStateDim, kActionDim, mc.buffer_capacity);
    for (const auto& g : random_genotypes(600, kGenotypeDim, rng))
        buf.push(rollout_env(g, ec, TaskKind::Omni).transitions);
    TrainConfig tc;
    tc.epochs_per_update = 10;
    for (int u = 0; u < 6; ++u) {
        Rng r = rng.derive(static_cast<std::uint64_t>(u));
        model.train(buf, tc, r);
    }
    const auto test = random_genotypes(200, kGenotypeDim, rng);
    const auto imagined = rollout_imagined_batch(model, test, ec, TaskKind::Omni);
    std::size_t close = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto real = rollout_env(test[i], ec, TaskKind::Omni).descriptor;
        double d2 = 0.0;
        for (std::size_t j = 0; j < real.size(); ++j)
            d2 += (imagined[i].descriptor[j] - real[j]) * (imagined[i].descriptor[j] - real[j]);
        close += std::sqrt(d2) <= 0.05;
    }
    MESSAGE("imagined descriptors within 0.05: " << close << "/200");
    CHECK(close >= 180);
}
