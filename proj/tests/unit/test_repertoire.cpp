#include "daqd/repertoire.hpp"
#include "daqd/rng.hpp"

#include "../support/oracles.hpp"
#include "../support/tmpdir.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

using namespace daqd;

namespace {

RepertoireEntry entry(std::initializer_list<double> sd, double ret, std::size_t phi_dim = 3)
{
    RepertoireEntry e;
    e.descriptor = SkillDescriptor(sd);
    e.ret = ret;
    e.policy = PolicyParams(phi_dim, 0.25);
    return e;
}

RepertoireEntry random_entry(Rng& rng, std::size_t dim, double spread)
{
    RepertoireEntry e;
    e.descriptor = SkillDescriptor(dim);
    for (std::size_t i = 0; i < dim; ++i)
        e.descriptor[i] = 0.5 + spread * (rng.uniform() - 0.5);
    e.ret = rng.normal();
    e.policy = PolicyParams(4);
    for (std::size_t i = 0; i < 4; ++i)
        e.policy[i] = rng.uniform();
    return e;
}

} // namespace

TEST_CASE("novelty examples")
{
    RepertoireParams p;
    p.k = 2;
    Repertoire rep(2, p);
    CHECK(std::isinf(rep.novelty(std::vector<double>{0.0, 0.0})));

    rep.insert_unchecked(entry({0, 0}, 0));
    CHECK(rep.novelty(std::vector<double>{0.0, 0.0}) == 0.0);

    rep.insert_unchecked(entry({1, 0}, 0));
    rep.insert_unchecked(entry({0, 1}, 0));
    // Two nearest of [0,0] other than itself are [1,0] and [0,1].
    CHECK(rep.novelty(std::vector<double>{0.0, 0.0}, 0) == doctest::Approx(1.0));
    // With [0,0] in the reference set: distances 0 and 1.
    CHECK(rep.novelty(std::vector<double>{0.0, 0.0}) == doctest::Approx(0.5));
}

TEST_CASE("novelty matches brute force for every k and size")
{
    Rng rng(11);
    for (std::size_t k : {1u, 5u, 15u}) {
        RepertoireParams p;
        p.k = k;
        for (std::size_t n : {0u, 1u, 3u, 14u, 15u, 16u, 120u}) {
            Repertoire rep(3, p);
            for (std::size_t i = 0; i < n; ++i)
                rep.insert_unchecked(random_entry(rng, 3, 1.0));
            const auto pts = oracle::descriptors(rep);
            for (int q = 0; q < 5; ++q) {
                std::vector<double> sd{rng.uniform(), rng.uniform(), rng.uniform()};
                const double got = rep.novelty(sd);
                const double want = oracle::novelty(pts, sd, k);
                if (std::isinf(want))
                    CHECK(std::isinf(got));
                else
                    CHECK(std::abs(got - want) <= 1e-12);
            }
        }
    }
}

TEST_CASE("nearest_two")
{
    Repertoire rep(2);
    CHECK_FALSE(rep.nearest_two(std::vector<double>{0.1, 0.0}).first);

    rep.insert_unchecked(entry({0, 0}, 0));
    auto nn = rep.nearest_two(std::vector<double>{0.1, 0.0});
    REQUIRE(nn.first);
    CHECK_FALSE(nn.second);

    rep.insert_unchecked(entry({0.5, 0}, 0));
    nn = rep.nearest_two(std::vector<double>{0.1, 0.0});
    CHECK(nn.first->slot == 0);
    CHECK(nn.first->distance == doctest::Approx(0.1));
    CHECK(nn.second->slot == 1);
    CHECK(nn.second->distance == doctest::Approx(0.4));

    SUBCASE("older entry wins a tie")
    {
        nn = rep.nearest_two(std::vector<double>{0.25, 0.0});
        CHECK(nn.first->slot == 0);
        CHECK(nn.second->slot == 1);
        CHECK(nn.first->distance == nn.second->distance);
    }
}

TEST_CASE("try_add basic outcomes")
{
    Repertoire rep(2);
    CHECK(rep.try_add(entry({0.5, 0.5}, 1.0)).kind == AdditionOutcome::Kind::AddedNew);
    const auto far = rep.try_add(entry({0.9, 0.5}, 1.0));
    CHECK(far.kind == AdditionOutcome::Kind::AddedNew);
    CHECK(far.d1 == doctest::Approx(0.4));
    CHECK(rep.size() == 2);
}

TEST_CASE("try_add replaces the nearest entry when all four conditions hold")
{
    Repertoire rep(2);
    rep.try_add(entry({0.5, 0.5}, 1.0));
    rep.try_add(entry({0.9, 0.5}, 1.0));
    const Repertoire before = rep;

    const auto out = rep.try_add(entry({0.505, 0.5}, 2.0));
    REQUIRE(out.kind == AdditionOutcome::Kind::Replaced);
    CHECK(out.slot == 0);
    CHECK(out.replaced->descriptor == SkillDescriptor{0.5, 0.5});
    CHECK(out.d1 == doctest::Approx(0.005));
    CHECK(out.d2 == doctest::Approx(0.395));
    // Reference set is {[0.9, 0.5]} for both novelties.
    CHECK(out.novelty_new == doctest::Approx(0.395));
    CHECK(out.novelty_nearest == doctest::Approx(0.4));
    CHECK(oracle::replacement_conditions(before, {0.505, 0.5}, 2.0).all());
    CHECK(rep.size() == 2);
    CHECK(rep[0].ret == 2.0);
}

TEST_CASE("try_add discard reasons")
{
    Repertoire rep(2);
    rep.try_add(entry({0.5, 0.5}, 1.0));
    rep.try_add(entry({0.9, 0.5}, 1.0));

    SUBCASE("return too low")
    {
        const auto out = rep.try_add(entry({0.505, 0.5}, 0.5));
        CHECK(out.kind == AdditionOutcome::Kind::Discarded);
        CHECK(out.reason == DiscardReason::ReturnTooLow);
    }
    SUBCASE("novelty too low")
    {
        RepertoireParams wide;
        wide.distance_threshold = 0.1;
        Repertoire r(2, wide);
        r.try_add(entry({0.5, 0.5}, 1.0));
        r.try_add(entry({0.9, 0.5}, 1.0));
        // nov_new = 0.35 < 0.9 * 0.4
        const auto out = r.try_add(entry({0.55, 0.5}, 5.0));
        CHECK(out.reason == DiscardReason::NoveltyTooLow);
    }
    SUBCASE("second neighbour too close")
    {
        Repertoire tight(2);
        tight.try_add(entry({0.5, 0.5}, 1.0));
        tight.try_add(entry({0.52, 0.5}, 1.0));
        const auto out = tight.try_add(entry({0.51, 0.5}, 9.0));
        CHECK(out.reason == DiscardReason::SecondNeighborTooClose);
    }
    SUBCASE("trade-off between novelty and return")
    {
        // nov_new = 0.39 passes (ii), return 0.95 passes (iii),
        // (0.39 - 0.4) * 1 = -0.01 < -(0.95 - 1) * 0.4 = 0.02 fails (iv).
        const auto out = rep.try_add(entry({0.51, 0.5}, 0.95));
        CHECK(out.kind == AdditionOutcome::Kind::Discarded);
        CHECK(out.reason == DiscardReason::NoveltyReturnTradeoff);
    }
}

TEST_CASE("single-entry container replaces on return alone")
{
    Repertoire rep(2);
    rep.try_add(entry({0.5, 0.5}, 1.0));
    CHECK(rep.try_add(entry({0.505, 0.5}, 0.5)).reason == DiscardReason::ReturnTooLow);
    CHECK(rep.try_add(entry({0.505, 0.5}, 1.0)).kind == AdditionOutcome::Kind::Replaced);
}

TEST_CASE("randomized try_add keeps spacing and every decision is justified")
{
    RepertoireParams p;
    Rng rng(3);
    Repertoire rep(2, p);
    for (int i = 0; i < 3000; ++i) {
        const RepertoireEntry cand = random_entry(rng, 2, 0.3);
        const Repertoire before = rep;
        const auto out = rep.try_add(cand);
        if (out.kind == AdditionOutcome::Kind::AddedNew) {
            CHECK(rep.size() == before.size() + 1);
        } else {
            CHECK(rep.size() == before.size());
            const auto c = oracle::replacement_conditions(before, cand.descriptor.values, cand.ret);
            if (out.kind == AdditionOutcome::Kind::Replaced) {
                CHECK(c.all());
            } else {
                CHECK_FALSE(c.all());
                switch (*out.reason) {
                case DiscardReason::SecondNeighborTooClose: CHECK_FALSE(c.eq3); break;
                case DiscardReason::NoveltyTooLow: CHECK_FALSE(c.eq4); break;
                case DiscardReason::ReturnTooLow: CHECK_FALSE(c.eq5); break;
                case DiscardReason::NoveltyReturnTradeoff: CHECK_FALSE(c.eq6); break;
                }
            }
        }
    }
    const auto pts = oracle::descriptors(rep);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            REQUIRE(oracle::dist(pts[i], pts[j]) >= p.distance_threshold);
}

TEST_CASE("qd_score")
{
    Repertoire rep(2);
    CHECK(rep.qd_score() == 0.0);
    CHECK(rep.mean_return() == 0.0);
    rep.insert_unchecked(entry({0, 0}, 0.2));
    rep.insert_unchecked(entry({1, 1}, 0.3));
    CHECK(rep.qd_score() == doctest::Approx(0.5));
}

TEST_CASE("try_add rejects bad candidates")
{
    Repertoire rep(2);
    CHECK_THROWS_AS(rep.try_add(entry({0.5}, 1.0)), DimensionError);
    CHECK_THROWS_AS(rep.try_add(entry({0.5, 0.5}, std::numeric_limits<double>::quiet_NaN())), NumericError);
    RepertoireParams bad;
    bad.epsilon = 1.0;
    CHECK_THROWS_AS(Repertoire(2, bad), ConfigError);
}

TEST_CASE("repertoire csv round trip")
{
    testing_util::TempDir tmp("rep");
    SUBCASE("empty")
    {
        Repertoire rep(2);
        save_repertoire(rep, tmp / "empty.csv");
        const Repertoire back = load_repertoire(tmp / "empty.csv");
        CHECK(back.empty());
        CHECK(back.descriptor_dim() == 2);
    }
    SUBCASE("entries survive bit-exactly")
    {
        Rng rng(5);
        Repertoire rep(3);
        for (int i = 0; i < 40; ++i)
            rep.try_add(random_entry(rng, 3, 1.0));
        RepertoireEntry im = random_entry(rng, 3, 1.0);
        im.disagreement = 0.1 / 3.0;
        im.evaluated_in_env = false;
        rep.insert_unchecked(im);
        save_repertoire(rep, tmp / "r.csv");
        const Repertoire back = load_repertoire(tmp / "r.csv");
        REQUIRE(back.size() == rep.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < rep.size(); ++i) {
            CHECK(back[i].id == rep[i].id);
            CHECK(back[i].descriptor == rep[i].descriptor);
            CHECK(back[i].policy == rep[i].policy);
            CHECK(back[i].ret == rep[i].ret);
            CHECK(back[i].disagreement == rep[i].disagreement);
            sum += back[i].ret;
        }
        CHECK(back.qd_score() == sum);
        CHECK_FALSE(back[rep.size() - 1].evaluated_in_env);
    }
    SUBCASE("malformed files name the line")
    {
        Repertoire rep(2);
        rep.insert_unchecked(entry({0.1, 0.2}, 1.0));
        rep.insert_unchecked(entry({0.3, 0.4}, 1.0));
        save_repertoire(rep, tmp / "ok.csv");
        std::ifstream in(tmp / "ok.csv");
        std::string text((std::istreambuf_iterator<char>(in)), {});

        std::ofstream(tmp / "cut.csv") << text.substr(0, text.size() - 4);
        try {
            load_repertoire(tmp / "cut.csv");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }

        std::string bad = text;
        bad.replace(bad.find("0.29999"), 3, "x.y");
        std::ofstream(tmp / "bad.csv") << bad;
        try {
            load_repertoire(tmp / "bad.csv");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }

        std::ofstream(tmp / "hdr.csv") << "id,x\n";
        CHECK_THROWS_AS(load_repertoire(tmp / "hdr.csv"), ParseError);
        std::ofstream(tmp / "none.csv") << "";
        CHECK_THROWS_AS(load_repertoire(tmp / "none.csv"), ParseError);
        CHECK_THROWS_AS(load_repertoire(tmp / "missing.csv"), IoError);
    }
}
