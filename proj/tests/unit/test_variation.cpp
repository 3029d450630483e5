#include "daqd/variation.hpp"

#include <doctest.h>

#include <cmath>

using namespace daqd;

namespace {

Repertoire filled(std::size_t n)
{
    Repertoire rep(1, RepertoireParams{1e-9, 0.1, 15});
    for (std::size_t i = 0; i < n; ++i) {
        RepertoireEntry e;
        e.descriptor = SkillDescriptor{static_cast<double>(i) / static_cast<double>(n)};
        e.policy = PolicyParams{static_cast<double>(i)};
        rep.insert_unchecked(e);
    }
    return rep;
}

} // namespace

TEST_CASE("uniform_select")
{
    Rng rng(1);
    SUBCASE("single entry")
    {
        const auto picks = uniform_select(filled(1), 3, rng);
        REQUIRE(picks.size() == 3);
        for (const auto& p : picks)
            CHECK(p == PolicyParams{0.0});
    }
    SUBCASE("frequencies are binomial")
    {
        const std::size_t n = 100000;
        const auto picks = uniform_select(filled(100), n, rng);
        std::vector<std::size_t> counts(100);
        for (const auto& p : picks)
            ++counts[static_cast<std::size_t>(p[0])];
        const double tol = 3.0 * std::sqrt(1e5 * 0.01 * 0.99);
        std::size_t outside = 0;
        for (std::size_t c : counts)
            if (std::abs(static_cast<double>(c) - 1000.0) > tol)
                ++outside;
        // A 3-sigma band leaves about 0.3% of cells outside by chance.
        CHECK(outside <= 2);
    }
    SUBCASE("empty repertoire")
    {
        Repertoire rep(1);
        CHECK_THROWS_AS(uniform_select(rep, 1, rng), StateError);
    }
}

TEST_CASE("directional_variation")
{
    Rng rng(2);
    const std::size_t d = 36;
    VariationConfig cfg;

    SUBCASE("zero scales return the first parent")
    {
        cfg.sigma1 = cfg.sigma2 = 0.0;
        PolicyParams a(d), b(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = rng.uniform();
            b[i] = rng.uniform();
        }
        for (int k = 0; k < 100; ++k)
            CHECK(directional_variation(a, b, cfg, rng) == a);
    }
    SUBCASE("identical parents give isotropic noise around the parent")
    {
        const PolicyParams a(d, 0.5);
        const int n = 100000;
        std::vector<double> mean(d, 0.0);
        for (int k = 0; k < n; ++k) {
            const PolicyParams c = directional_variation(a, a, cfg, rng);
            for (std::size_t i = 0; i < d; ++i)
                mean[i] += c[i] / n;
        }
        for (std::size_t i = 0; i < d; ++i)
            CHECK(std::abs(mean[i] - 0.5) <= 5.0 * cfg.sigma1 / std::sqrt(static_cast<double>(n)));
    }
    SUBCASE("line noise is one scalar per offspring")
    {
        cfg.sigma1 = 0.0;
        const PolicyParams zero(d, 0.0), one(d, 1.0);
        int moved = 0;
        for (int k = 0; k < 2000; ++k) {
            const PolicyParams c = directional_variation(zero, one, cfg, rng);
            for (double v : c.values)
                REQUIRE(v == c[0]);
            moved += c[0] > 0.0;
        }
        CHECK(moved > 800);
    }
    SUBCASE("bounds and errors")
    {
        cfg.sigma1 = 5.0;
        const PolicyParams a(d, 0.0), b(d, 1.0);
        for (int k = 0; k < 200; ++k)
            for (double v : directional_variation(a, b, cfg, rng).values)
                CHECK((v >= 0.0 && v <= 1.0));
        CHECK_THROWS_AS(directional_variation(a, PolicyParams(3), cfg, rng), DimensionError);
    }
}

TEST_CASE("random_genotypes")
{
    Rng rng(3);
    CHECK(random_genotypes(0, 36, rng).empty());
    const auto one = random_genotypes(1, 36, rng);
    REQUIRE(one.size() == 1);
    CHECK(one[0].size() == 36);

    const auto many = random_genotypes(100000, 4, rng);
    for (std::size_t i = 0; i < 4; ++i) {
        double m = 0.0;
        for (const auto& g : many) {
            REQUIRE((g[i] >= 0.0 && g[i] < 1.0));
            m += g[i];
        }
        CHECK(std::abs(m / 1e5 - 0.5) < 0.005);
    }
}

TEST_CASE("generate_offspring is a pure function of the stream")
{
    const Repertoire rep = filled(10);
    VariationConfig cfg;
    const Rng rng(9);
    const auto a = generate_offspring(rep, 64, cfg, rng);
    const auto b = generate_offspring(rep, 64, cfg, rng);
    CHECK(a == b);
    // A child depends only on its own index.
    const auto c = generate_offspring(rep, 8, cfg, rng);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(c[i] == a[i]);
}

TEST_CASE("derived streams")
{
    const Rng root(42);
    Rng a = root.derive(1), b = root.derive(1), c = root.derive(2);
    CHECK(a() == b());
    CHECK(a.key() != c.key());
    CHECK(derive_seed(0, 0) != derive_seed(0, 1));
}
