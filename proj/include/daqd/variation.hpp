#pragma once

#include "daqd/core_types.hpp"
#include "daqd/repertoire.hpp"
#include "daqd/rng.hpp"

#include <vector>

namespace daqd {

struct VariationConfig {
    double sigma1 = 0.01;            // isotropic scale
    double sigma2 = 0.2;             // scale along the parent-to-parent line
    std::size_t batch_size = 64;
    std::size_t init_random_count = 128;

    void validate() const;
};

/// n genotypes drawn uniformly with replacement. Throws StateError on an empty container.
std::vector<PolicyParams> uniform_select(const Repertoire& rep, std::size_t n, Rng& rng);

/// phi1 + sigma1 * N(0, I) + sigma2 * N(0, 1) * (phi2 - phi1), clamped to [0, 1].
/// The line coefficient is a single scalar draw shared by every component.
PolicyParams directional_variation(const PolicyParams& phi1, const PolicyParams& phi2, const VariationConfig& cfg,
                                   Rng& rng);

std::vector<PolicyParams> random_genotypes(std::size_t n, std::size_t dim, Rng& rng);

/// One batch of offspring: each child gets its own stream derived from `rng`,
/// picks two parents uniformly and applies directional variation.
std::vector<PolicyParams> generate_offspring(const Repertoire& rep, std::size_t n, const VariationConfig& cfg,
                                             const Rng& rng);

} // namespace daqd
