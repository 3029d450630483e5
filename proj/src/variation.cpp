#include "daqd/variation.hpp"

namespace daqd {

void VariationConfig::validate() const
{
    if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0))
        throw ConfigError("variation.sigma1 and variation.sigma2 must be non-negative");
    if (batch_size == 0)
        throw ConfigError("variation.batch_size must be positive");
    if (init_random_count == 0)
        throw ConfigError("variation.init_random_count must be positive");
}

std::vector<PolicyParams> uniform_select(const Repertoire& rep, std::size_t n, Rng& rng)
{
    if (rep.empty())
        throw StateError("cannot select from an empty repertoire; initialise it with random genotypes first");
    std::vector<PolicyParams> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(rep[rng.index(rep.size())].policy);
    return out;
}

PolicyParams directional_variation(const PolicyParams& phi1, const PolicyParams& phi2, const VariationConfig& cfg,
                                   Rng& rng)
{
    if (phi1.size() != phi2.size())
        throw DimensionError("parents have different genotype lengths");
    const double line = cfg.sigma2 * rng.normal();
    PolicyParams child = phi1;
    for (std::size_t i = 0; i < child.size(); ++i)
        child[i] += cfg.sigma1 * rng.normal() + line * (phi2[i] - phi1[i]);
    return clamp_genotype(child);
}

std::vector<PolicyParams> random_genotypes(std::size_t n, std::size_t dim, Rng& rng)
{
    std::vector<PolicyParams> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PolicyParams p(dim);
        for (auto& v : p.values)
            v = rng.uniform();
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PolicyParams> generate_offspring(const Repertoire& rep, std::size_t n, const VariationConfig& cfg,
                                             const Rng& rng)
{
    if (rep.empty())
        throw StateError("cannot vary an empty repertoire");
    std::vector<PolicyParams> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng child_rng = rng.derive(i);
        const auto parents = uniform_select(rep, 2, child_rng);
        out.push_back(directional_variation(parents[0], parents[1], cfg, child_rng));
    }
    return out;
}

} // namespace daqd
