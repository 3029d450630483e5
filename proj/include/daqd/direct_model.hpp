#pragma once

#include "daqd/core_types.hpp"
#include "daqd/dynamics_model.hpp"
#include "daqd/mlp.hpp"
#include "daqd/rng.hpp"

#include <vector>

namespace daqd {

struct SurrogatePrediction {
    SkillDescriptor descriptor;
    double ret = 0.0;
};

/// Deterministic regressor from genotype straight to (descriptor, return),
/// trained with squared error on evaluated pairs.
class DirectSurrogate {
public:
    DirectSurrogate(std::size_t genotype_dim, std::size_t descriptor_dim, std::size_t hidden, Rng rng);

    void add(const PolicyParams& phi, const SkillDescriptor& sd, double ret);
    std::size_t size() const noexcept { return n_; }
    bool ready() const noexcept { return updates_ > 0; }
    std::size_t updates() const noexcept { return updates_; }

    /// Skips (report.skipped) when fewer than `min_pairs` pairs are stored.
    TrainReport train(const TrainConfig& cfg, std::size_t min_pairs, Rng& rng);

    std::vector<SurrogatePrediction> predict(const std::vector<PolicyParams>& genotypes) const;

    /// Mean squared descriptor error over the given pairs.
    double descriptor_mse(const std::vector<PolicyParams>& genotypes, const std::vector<SkillDescriptor>& sds) const;

private:
    Matrix targets_of(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) const;
    Matrix inputs_of(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) const;
    double mse(const Matrix& x, const Matrix& y) const;

    std::size_t gd_, sd_;
    Mlp net_;
    Adam adam_;
    Normalizer ret_norm_;
    std::vector<double> phis_, sds_, rets_;
    std::size_t n_ = 0;
    std::size_t updates_ = 0;
};

} // namespace daqd
