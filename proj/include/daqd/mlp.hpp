#pragma once

#include "daqd/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>

namespace daqd {

using Matrix = Eigen::MatrixXd;
using ColVector = Eigen::VectorXd;

/// Two-hidden-layer ReLU perceptron, samples stored column-wise.
///
/// All weights live in one flat vector (W1, b1, W2, b2, W3, b3) so the
/// optimizer and gradient checks can treat them uniformly.
class Mlp {
public:
    struct Cache {
        Matrix z1, h1, z2, h2;
    };

    Mlp() = default;
    Mlp(std::size_t input, std::size_t hidden, std::size_t output, Rng& rng);

    std::size_t input_dim() const noexcept { return in_; }
    std::size_t hidden_dim() const noexcept { return hidden_; }
    std::size_t output_dim() const noexcept { return out_; }
    std::size_t parameter_count() const noexcept { return static_cast<std::size_t>(params_.size()); }

    ColVector& parameters() noexcept { return params_; }
    const ColVector& parameters() const noexcept { return params_; }

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
    /// Gradient of sum(d_out .* forward(x)) with respect to the flat parameters.
    ColVector backward(const Matrix& x, const Cache& cache, const Matrix& d_out) const;

    void write(std::ostream& os) const;
    static Mlp read(std::istream& is);

private:
    using MapM = Eigen::Map<const Matrix>;
    using MapV = Eigen::Map<const ColVector>;
    MapM w1() const { return MapM(params_.data(), hidden_, in_); }
    MapV b1() const { return MapV(params_.data() + off_b1_, hidden_); }
    MapM w2() const { return MapM(params_.data() + off_w2_, hidden_, hidden_); }
    MapV b2() const { return MapV(params_.data() + off_b2_, hidden_); }
    MapM w3() const { return MapM(params_.data() + off_w3_, out_, hidden_); }
    MapV b3() const { return MapV(params_.data() + off_b3_, out_); }
    void compute_offsets();

    std::size_t in_ = 0, hidden_ = 0, out_ = 0;
    Eigen::Index off_b1_ = 0, off_w2_ = 0, off_b2_ = 0, off_w3_ = 0, off_b3_ = 0;
    ColVector params_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam() = default;
    explicit Adam(std::size_t n) : m_(ColVector::Zero(static_cast<Eigen::Index>(n))), v_(m_) {}

    void step(ColVector& params, const ColVector& grad, const AdamConfig& cfg);
    std::size_t steps() const noexcept { return t_; }

private:
    ColVector m_, v_;
    std::size_t t_ = 0;
};

/// Hex-float text I/O, so checkpoints reload bit-exactly.
void write_reals(std::ostream& os, const double* data, std::size_t n);
void read_reals(std::istream& is, double* data, std::size_t n);

} // namespace daqd
