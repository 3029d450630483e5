#include "daqd/direct_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace daqd {

DirectSurrogate::DirectSurrogate(std::size_t genotype_dim, std::size_t descriptor_dim, std::size_t hidden, Rng rng)
    : gd_(genotype_dim), sd_(descriptor_dim), net_(genotype_dim, hidden, descriptor_dim + 1, rng),
      adam_(net_.parameter_count()), ret_norm_(Normalizer::identity(1))
{
}

void DirectSurrogate::add(const PolicyParams& phi, const SkillDescriptor& sd, double ret)
{
    if (phi.size() != gd_ || sd.size() != sd_)
        throw DimensionError("surrogate pair does not match model dimensions");
    phis_.insert(phis_.end(), phi.values.begin(), phi.values.end());
    sds_.insert(sds_.end(), sd.values.begin(), sd.values.end());
    rets_.push_back(ret);
    ++n_;
}

Matrix DirectSurrogate::inputs_of(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) const
{
    Matrix x(static_cast<Eigen::Index>(gd_), static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i)
        x.col(static_cast<Eigen::Index>(i - begin)) =
            Eigen::Map<const ColVector>(phis_.data() + idx[i] * gd_, static_cast<Eigen::Index>(gd_));
    return x;
}

Matrix DirectSurrogate::targets_of(const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end) const
{
    Matrix y(static_cast<Eigen::Index>(sd_ + 1), static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i) {
        const auto c = static_cast<Eigen::Index>(i - begin);
        y.col(c).head(static_cast<Eigen::Index>(sd_)) =
            Eigen::Map<const ColVector>(sds_.data() + idx[i] * sd_, static_cast<Eigen::Index>(sd_));
        y(static_cast<Eigen::Index>(sd_), c) = (rets_[idx[i]] - ret_norm_.mean[0]) / ret_norm_.std[0];
    }
    return y;
}

double DirectSurrogate::mse(const Matrix& x, const Matrix& y) const
{
    return (net_.forward(x) - y).array().square().mean();
}

TrainReport DirectSurrogate::train(const TrainConfig& cfg, std::size_t min_pairs, Rng& rng)
{
    TrainReport report;
    if (n_ < std::max<std::size_t>(min_pairs, 2)) {
        report.skipped = true;
        report.message = "surrogate holds " + std::to_string(n_) + " pairs; training skipped";
        return report;
    }
    Matrix r(1, static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        r(0, static_cast<Eigen::Index>(i)) = rets_[i];
    ret_norm_ = Normalizer::fit(r);

    std::vector<std::size_t> perm(n_);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n_hold = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(n_))), 1, n_ - 1);
    const Matrix hx = inputs_of(perm, 0, n_hold);
    const Matrix hy = targets_of(perm, 0, n_hold);
    std::vector<std::size_t> order(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
    report.holdout_size = n_hold;
    report.train_size = order.size();
    report.mean_nll_before = mse(hx, hy);

    const std::size_t batch = std::min(cfg.batch_size, order.size());
    const double scale = 2.0 / static_cast<double>(batch * (sd_ + 1));
    std::size_t steps = 0;
    bool done = false;
    for (std::size_t epoch = 0; epoch < cfg.epochs_per_update && !done; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
            const Matrix bx = inputs_of(order, start, start + batch);
            const Matrix by = targets_of(order, start, start + batch);
            Mlp::Cache cache;
            const Matrix y = net_.forward(bx, &cache);
            const ColVector grad = net_.backward(bx, cache, scale * (y - by));
            adam_.step(net_.parameters(), grad, cfg.adam);
            if (cfg.max_steps_per_update > 0 && ++steps >= cfg.max_steps_per_update) {
                done = true;
                break;
            }
        }
    }
    report.mean_nll_after = mse(hx, hy);
    ++updates_;
    return report;
}

std::vector<SurrogatePrediction> DirectSurrogate::predict(const std::vector<PolicyParams>& genotypes) const
{
    Matrix x(static_cast<Eigen::Index>(gd_), static_cast<Eigen::Index>(genotypes.size()));
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        if (genotypes[i].size() != gd_)
            throw DimensionError("surrogate input dimension mismatch");
        x.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const ColVector>(genotypes[i].values.data(), static_cast<Eigen::Index>(gd_));
    }
    const Matrix y = net_.forward(x);
    std::vector<SurrogatePrediction> out(genotypes.size());
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        out[i].descriptor = SkillDescriptor(sd_);
        for (std::size_t d = 0; d < sd_; ++d)
            out[i].descriptor[d] = std::clamp(y(static_cast<Eigen::Index>(d), c), 0.0, 1.0);
        out[i].ret = y(static_cast<Eigen::Index>(sd_), c) * ret_norm_.std[0] + ret_norm_.mean[0];
    }
    return out;
}

double DirectSurrogate::descriptor_mse(const std::vector<PolicyParams>& genotypes,
                                       const std::vector<SkillDescriptor>& sds) const
{
    if (genotypes.size() != sds.size() || genotypes.empty())
        throw DimensionError("descriptor_mse needs matching, nonempty inputs");
    const auto pred = predict(genotypes);
    double s = 0.0;
    for (std::size_t i = 0; i < sds.size(); ++i)
        s += squared_distance(pred[i].descriptor.view(), sds[i].view());
    return s / static_cast<double>(sds.size() * sd_);
}

} // namespace daqd
