#include "daqd/mlp.hpp"

#include "daqd/core_types.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

namespace daqd {

Mlp::Mlp(std::size_t input, std::size_t hidden, std::size_t output, Rng& rng) : in_(input), hidden_(hidden), out_(output)
{
    if (in_ == 0 || hidden_ == 0 || out_ == 0)
        throw DimensionError("MLP layer sizes must be positive");
    compute_offsets();
    params_ = ColVector::Zero(off_b3_ + static_cast<Eigen::Index>(out_));
    auto fill = [&](Eigen::Index off, std::size_t count, double scale) {
        for (std::size_t i = 0; i < count; ++i)
            params_[off + static_cast<Eigen::Index>(i)] = scale * rng.normal();
    };
    // He initialisation for the ReLU layers, a smaller head.
    fill(0, hidden_ * in_, std::sqrt(2.0 / static_cast<double>(in_)));
    fill(off_w2_, hidden_ * hidden_, std::sqrt(2.0 / static_cast<double>(hidden_)));
    fill(off_w3_, out_ * hidden_, std::sqrt(1.0 / static_cast<double>(hidden_)));
}

void Mlp::compute_offsets()
{
    const auto in = static_cast<Eigen::Index>(in_);
    const auto h = static_cast<Eigen::Index>(hidden_);
    const auto out = static_cast<Eigen::Index>(out_);
    off_b1_ = h * in;
    off_w2_ = off_b1_ + h;
    off_b2_ = off_w2_ + h * h;
    off_w3_ = off_b2_ + h;
    off_b3_ = off_w3_ + out * h;
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const
{
    if (static_cast<std::size_t>(x.rows()) != in_)
        throw DimensionError("MLP input has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(in_));
    Matrix z1 = w1() * x;
    z1.colwise() += b1();
    Matrix h1 = z1.cwiseMax(0.0);
    Matrix z2 = w2() * h1;
    z2.colwise() += b2();
    Matrix h2 = z2.cwiseMax(0.0);
    Matrix y = w3() * h2;
    y.colwise() += b3();
    if (cache) {
        cache->z1 = std::move(z1);
        cache->h1 = std::move(h1);
        cache->z2 = std::move(z2);
        cache->h2 = std::move(h2);
    }
    return y;
}

ColVector Mlp::backward(const Matrix& x, const Cache& cache, const Matrix& d_out) const
{
    ColVector grad(params_.size());
    const auto h = static_cast<Eigen::Index>(hidden_);
    const auto in = static_cast<Eigen::Index>(in_);
    const auto out = static_cast<Eigen::Index>(out_);
    Eigen::Map<Matrix> gw1(grad.data(), h, in);
    Eigen::Map<ColVector> gb1(grad.data() + off_b1_, h);
    Eigen::Map<Matrix> gw2(grad.data() + off_w2_, h, h);
    Eigen::Map<ColVector> gb2(grad.data() + off_b2_, h);
    Eigen::Map<Matrix> gw3(grad.data() + off_w3_, out, h);
    Eigen::Map<ColVector> gb3(grad.data() + off_b3_, out);

    gw3.noalias() = d_out * cache.h2.transpose();
    gb3 = d_out.rowwise().sum();
    Matrix dz2 = w3().transpose() * d_out;
    dz2.array() *= (cache.z2.array() > 0.0).cast<double>();
    gw2.noalias() = dz2 * cache.h1.transpose();
    gb2 = dz2.rowwise().sum();
    Matrix dz1 = w2().transpose() * dz2;
    dz1.array() *= (cache.z1.array() > 0.0).cast<double>();
    gw1.noalias() = dz1 * x.transpose();
    gb1 = dz1.rowwise().sum();
    return grad;
}

void Mlp::write(std::ostream& os) const
{
    os << "mlp " << in_ << ' ' << hidden_ << ' ' << out_ << '\n';
    write_reals(os, params_.data(), static_cast<std::size_t>(params_.size()));
}

Mlp Mlp::read(std::istream& is)
{
    std::string tag;
    Mlp m;
    if (!(is >> tag >> m.in_ >> m.hidden_ >> m.out_) || tag != "mlp")
        throw ParseError("expected mlp block", 0);
    m.compute_offsets();
    m.params_ = ColVector::Zero(m.off_b3_ + static_cast<Eigen::Index>(m.out_));
    read_reals(is, m.params_.data(), static_cast<std::size_t>(m.params_.size()));
    return m;
}

void Adam::step(ColVector& params, const ColVector& grad, const AdamConfig& cfg)
{
    ++t_;
    m_ = cfg.beta1 * m_ + (1.0 - cfg.beta1) * grad;
    v_ = cfg.beta2 * v_ + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    params.array() -= cfg.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg.epsilon);
}

void write_reals(std::ostream& os, const double* data, std::size_t n)
{
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%a", data[i]);
        os << buf << ((i + 1) % 8 == 0 || i + 1 == n ? '\n' : ' ');
    }
}

void read_reals(std::istream& is, double* data, std::size_t n)
{
    std::string tok;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(is >> tok))
            throw ParseError("unexpected end of numeric block", 0);
        char* end = nullptr;
        data[i] = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw ParseError("malformed number '" + tok + "'", 0);
    }
}

} // namespace daqd
