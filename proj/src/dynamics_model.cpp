#include "daqd/dynamics_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace daqd {

// ---------------------------------------------------------------------------
// ReplayBuffer

ReplayBuffer::ReplayBuffer(std::size_t state_dim, std::size_t action_dim, std::size_t capacity)
    : ds_(state_dim), da_(action_dim), capacity_(capacity)
{
    if (capacity_ == 0)
        throw ConfigError("replay buffer capacity must be positive");
    states_.resize(capacity_ * ds_);
    actions_.resize(capacity_ * da_);
    next_.resize(capacity_ * ds_);
}

void ReplayBuffer::push(const Transition& t)
{
    if (t.state.size() != ds_ || t.next_state.size() != ds_ || t.action.size() != da_)
        throw DimensionError("transition does not match replay buffer dimensions");
    std::size_t pos;
    if (size_ < capacity_) {
        pos = (head_ + size_) % capacity_;
        ++size_;
    } else {
        // Full: overwrite the oldest and advance the head.
        pos = head_;
        head_ = (head_ + 1) % capacity_;
    }
    std::copy(t.state.values.begin(), t.state.values.end(), states_.begin() + static_cast<std::ptrdiff_t>(pos * ds_));
    std::copy(t.action.values.begin(), t.action.values.end(), actions_.begin() + static_cast<std::ptrdiff_t>(pos * da_));
    std::copy(t.next_state.values.begin(), t.next_state.values.end(),
              next_.begin() + static_cast<std::ptrdiff_t>(pos * ds_));
    ++pushed_;
}

void ReplayBuffer::push(const std::vector<Transition>& ts)
{
    for (const auto& t : ts)
        push(t);
}

Transition ReplayBuffer::at(std::size_t i) const
{
    if (i >= size_)
        throw std::out_of_range("replay buffer index");
    Transition t;
    t.state.values.assign(state_ptr(i), state_ptr(i) + ds_);
    t.action.values.assign(action_ptr(i), action_ptr(i) + da_);
    t.next_state.values.assign(next_state_ptr(i), next_state_ptr(i) + ds_);
    return t;
}

// ---------------------------------------------------------------------------
// Normalizer

Normalizer Normalizer::identity(std::size_t dim)
{
    const auto d = static_cast<Eigen::Index>(dim);
    return Normalizer{ColVector::Zero(d), ColVector::Ones(d)};
}

Normalizer Normalizer::fit(const Matrix& data)
{
    const auto n = static_cast<double>(data.cols());
    if (data.cols() == 0)
        return identity(static_cast<std::size_t>(data.rows()));
    Normalizer out;
    out.mean = data.rowwise().sum() / n;
    out.std = ((data.colwise() - out.mean).array().square().rowwise().sum() / n).sqrt();
    for (Eigen::Index i = 0; i < out.std.size(); ++i)
        if (!(out.std[i] > 1e-12))
            out.std[i] = 1.0;
    return out;
}

Matrix Normalizer::apply(const Matrix& x) const
{
    return (x.colwise() - mean).array().colwise() / std.array();
}

// ---------------------------------------------------------------------------
// NLL

double nll_loss(std::span<const double> mu, std::span<const double> sigma, std::span<const double> target)
{
    if (mu.size() != sigma.size() || mu.size() != target.size())
        throw DimensionError("nll_loss: length mismatch");
    double loss = 0.0;
    for (std::size_t d = 0; d < mu.size(); ++d) {
        if (!(sigma[d] > 0.0))
            throw NumericError("nll_loss: sigma must be positive");
        const double diff = target[d] - mu[d];
        loss += diff * diff / (2.0 * sigma[d] * sigma[d]) + std::log(sigma[d]);
    }
    return loss;
}

namespace {

double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

} // namespace

double soft_clamp(double raw, double lo, double hi, double* derivative)
{
    // Outer softplus rescaled so that upper -> hi maps to hi.
    const double upper = hi - softplus(hi - raw);
    const double scale = (hi - lo) / softplus(hi - lo);
    const double out = lo + scale * softplus(upper - lo);
    if (derivative)
        *derivative = scale * sigmoid(hi - raw) * sigmoid(upper - lo);
    return std::min(out, hi);
}

// ---------------------------------------------------------------------------
// ProbNet

ProbNet::ProbNet(std::size_t input, std::size_t hidden, std::size_t output, double logstd_min, double logstd_max,
                 Rng& rng)
    : net_(input, hidden, 2 * output, rng), adam_(net_.parameter_count()), out_(output), lo_(logstd_min),
      hi_(logstd_max)
{
    if (!(lo_ < hi_))
        throw ConfigError("model.logstd_min must be below model.logstd_max");
}

void ProbNet::predict(const Matrix& x, Matrix& mean, Matrix& logstd) const
{
    const Matrix y = net_.forward(x);
    const auto d = static_cast<Eigen::Index>(out_);
    mean = y.topRows(d);
    logstd = y.bottomRows(d).unaryExpr([this](double r) { return soft_clamp(r, lo_, hi_); });
}

double ProbNet::loss_and_gradient(const Matrix& x, const Matrix& target, ColVector* grad) const
{
    Mlp::Cache cache;
    const Matrix y = net_.forward(x, grad ? &cache : nullptr);
    const auto d = static_cast<Eigen::Index>(out_);
    const Eigen::Index b = x.cols();
    const double inv_b = 1.0 / static_cast<double>(b);
    Matrix d_out(grad ? y.rows() : 0, grad ? b : 0);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            double dls = 0.0;
            const double ls = soft_clamp(y(d + i, j), lo_, hi_, &dls);
            const double inv_var = std::exp(-2.0 * ls);
            const double diff = y(i, j) - target(i, j);
            loss += 0.5 * diff * diff * inv_var + ls;
            if (grad) {
                d_out(i, j) = diff * inv_var * inv_b;
                d_out(d + i, j) = (1.0 - diff * diff * inv_var) * dls * inv_b;
            }
        }
    }
    if (grad)
        *grad = net_.backward(x, cache, d_out);
    return loss * inv_b;
}

double ProbNet::mean_nll(const Matrix& x, const Matrix& target) const
{
    return loss_and_gradient(x, target, nullptr) / static_cast<double>(out_) + kHalfLog2Pi;
}

void ProbNet::write(std::ostream& os) const
{
    os << "probnet " << out_ << ' ';
    write_reals(os, &lo_, 1);
    write_reals(os, &hi_, 1);
    net_.write(os);
}

ProbNet ProbNet::read(std::istream& is)
{
    ProbNet p;
    std::string tag;
    if (!(is >> tag >> p.out_) || tag != "probnet")
        throw ParseError("expected probnet block", 0);
    read_reals(is, &p.lo_, 1);
    read_reals(is, &p.hi_, 1);
    p.net_ = Mlp::read(is);
    p.adam_ = Adam(p.net_.parameter_count());
    return p;
}

// ---------------------------------------------------------------------------
// Config validation

void TrainConfig::validate() const
{
    if (!(adam.learning_rate > 0.0))
        throw ConfigError("train.learning_rate must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        throw ConfigError("train.beta1 and train.beta2 must be in [0, 1)");
    if (batch_size == 0)
        throw ConfigError("train.batch_size must be positive");
    if (epochs_per_update == 0)
        throw ConfigError("train.epochs_per_update must be positive");
    if (train_every_n_evals == 0)
        throw ConfigError("train.train_every_n_evals must be positive");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ConfigError("train.holdout_fraction must be in (0, 1)");
}

void ModelConfig::validate() const
{
    if (members < 2)
        throw ConfigError("model.members must be at least 2 (disagreement needs two members)");
    if (hidden == 0)
        throw ConfigError("model.hidden must be positive");
    if (buffer_capacity == 0)
        throw ConfigError("model.buffer_capacity must be positive");
    if (!(logstd_min < logstd_max))
        throw ConfigError("model.logstd_min must be below model.logstd_max");
}

// ---------------------------------------------------------------------------
// EnsembleDynamicsModel

EnsembleDynamicsModel::EnsembleDynamicsModel(std::size_t state_dim, std::size_t action_dim,
                                             std::vector<std::size_t> angular_dims, const ModelConfig& cfg, Rng rng)
    : ds_(state_dim), da_(action_dim), angular_(std::move(angular_dims)), cfg_(cfg),
      in_norm_(Normalizer::identity(state_dim + action_dim)), out_norm_(Normalizer::identity(state_dim))
{
    cfg_.validate();
    for (std::size_t a : angular_)
        if (a >= ds_)
            throw DimensionError("angular dimension out of range");
    for (std::size_t m = 0; m < cfg_.members; ++m) {
        Rng member_rng = rng.derive(m);
        members_.emplace_back(ds_ + da_, cfg_.hidden, ds_, cfg_.logstd_min, cfg_.logstd_max, member_rng);
    }
}

ColVector EnsembleDynamicsModel::disagreement_scale() const
{
    return out_norm_.std.array().square();
}

Matrix EnsembleDynamicsModel::raw_inputs(const Matrix& states, const Matrix& actions) const
{
    if (static_cast<std::size_t>(states.rows()) != ds_ || static_cast<std::size_t>(actions.rows()) != da_
        || states.cols() != actions.cols())
        throw DimensionError("model input dimension mismatch");
    Matrix x(static_cast<Eigen::Index>(ds_ + da_), states.cols());
    x.topRows(static_cast<Eigen::Index>(ds_)) = states;
    x.bottomRows(static_cast<Eigen::Index>(da_)) = actions;
    return x;
}

Matrix EnsembleDynamicsModel::raw_deltas(const Matrix& states, const Matrix& next) const
{
    Matrix d = next - states;
    for (std::size_t a : angular_)
        d.row(static_cast<Eigen::Index>(a)) = d.row(static_cast<Eigen::Index>(a)).unaryExpr(&wrap_angle);
    return d;
}

void EnsembleDynamicsModel::predict_next(const Matrix& states, const Matrix& actions, std::vector<Matrix>& means,
                                         std::vector<Matrix>* stds) const
{
    const Matrix x = in_norm_.apply(raw_inputs(states, actions));
    means.resize(members_.size());
    if (stds)
        stds->resize(members_.size());
    Matrix mu, logstd;
    for (std::size_t m = 0; m < members_.size(); ++m) {
        members_[m].predict(x, mu, logstd);
        Matrix next = states + ((mu.array().colwise() * out_norm_.std.array()).colwise() + out_norm_.mean.array()).matrix();
        for (std::size_t a : angular_)
            next.row(static_cast<Eigen::Index>(a)) = next.row(static_cast<Eigen::Index>(a)).unaryExpr(&wrap_angle);
        means[m] = std::move(next);
        if (stds)
            (*stds)[m] = (logstd.array().exp().colwise() * out_norm_.std.array()).matrix();
    }
}

std::pair<State, Vector> EnsembleDynamicsModel::predict(const State& s, const Action& a, std::size_t member) const
{
    if (member >= members_.size())
        throw std::out_of_range("ensemble member index " + std::to_string(member) + " out of range");
    if (s.size() != ds_ || a.size() != da_)
        throw DimensionError("predict: state/action dimension mismatch");
    const Matrix sm = Eigen::Map<const ColVector>(s.values.data(), static_cast<Eigen::Index>(ds_));
    const Matrix am = Eigen::Map<const ColVector>(a.values.data(), static_cast<Eigen::Index>(da_));
    Matrix mu, logstd;
    members_[member].predict(in_norm_.apply(raw_inputs(sm, am)), mu, logstd);
    State delta(ds_);
    Vector sigma(ds_);
    for (std::size_t d = 0; d < ds_; ++d) {
        const auto i = static_cast<Eigen::Index>(d);
        delta[d] = mu(i, 0) * out_norm_.std[i] + out_norm_.mean[i];
        sigma[d] = std::exp(logstd(i, 0)) * out_norm_.std[i];
    }
    return {delta, sigma};
}

void EnsembleDynamicsModel::refresh_normalizers(const ReplayBuffer& buffer)
{
    const std::size_t n = buffer.size();
    Matrix s(static_cast<Eigen::Index>(ds_), static_cast<Eigen::Index>(n));
    Matrix a(static_cast<Eigen::Index>(da_), static_cast<Eigen::Index>(n));
    Matrix sn(static_cast<Eigen::Index>(ds_), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        s.col(c) = Eigen::Map<const ColVector>(buffer.state_ptr(i), static_cast<Eigen::Index>(ds_));
        a.col(c) = Eigen::Map<const ColVector>(buffer.action_ptr(i), static_cast<Eigen::Index>(da_));
        sn.col(c) = Eigen::Map<const ColVector>(buffer.next_state_ptr(i), static_cast<Eigen::Index>(ds_));
    }
    in_norm_ = Normalizer::fit(raw_inputs(s, a));
    out_norm_ = Normalizer::fit(raw_deltas(s, sn));
}

void EnsembleDynamicsModel::build_dataset(const ReplayBuffer& buffer, Matrix& inputs, Matrix& targets) const
{
    if (buffer.state_dim() != ds_ || buffer.action_dim() != da_)
        throw DimensionError("replay buffer does not match model dimensions");
    const std::size_t n = buffer.size();
    Matrix s(static_cast<Eigen::Index>(ds_), static_cast<Eigen::Index>(n));
    Matrix a(static_cast<Eigen::Index>(da_), static_cast<Eigen::Index>(n));
    Matrix sn(static_cast<Eigen::Index>(ds_), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        s.col(c) = Eigen::Map<const ColVector>(buffer.state_ptr(i), static_cast<Eigen::Index>(ds_));
        a.col(c) = Eigen::Map<const ColVector>(buffer.action_ptr(i), static_cast<Eigen::Index>(da_));
        sn.col(c) = Eigen::Map<const ColVector>(buffer.next_state_ptr(i), static_cast<Eigen::Index>(ds_));
    }
    inputs = in_norm_.apply(raw_inputs(s, a));
    targets = out_norm_.apply(raw_deltas(s, sn));
}

namespace {

Matrix gather(const Matrix& m, const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end)
{
    Matrix out(m.rows(), static_cast<Eigen::Index>(end - begin));
    for (std::size_t i = begin; i < end; ++i)
        out.col(static_cast<Eigen::Index>(i - begin)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

} // namespace

TrainReport EnsembleDynamicsModel::train(const ReplayBuffer& buffer, const TrainConfig& cfg, Rng& rng)
{
    TrainReport report;
    const std::size_t n = buffer.size();
    if (n < cfg.batch_size || n < 2) {
        report.skipped = true;
        report.message = "replay buffer holds " + std::to_string(n) + " transitions, fewer than the batch size "
                         + std::to_string(cfg.batch_size) + "; training skipped";
        return report;
    }

    refresh_normalizers(buffer);
    Matrix inputs, targets;
    build_dataset(buffer, inputs, targets);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t n_hold =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(n))),
                                1, n - 1);
    const Matrix hold_x = gather(inputs, perm, 0, n_hold);
    const Matrix hold_y = gather(targets, perm, 0, n_hold);
    std::vector<std::size_t> train_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
    report.train_size = train_idx.size();
    report.holdout_size = n_hold;

    auto ensemble_nll = [&] {
        double s = 0.0;
        for (const auto& m : members_)
            s += m.mean_nll(hold_x, hold_y);
        return s / static_cast<double>(members_.size());
    };
    report.mean_nll_before = ensemble_nll();

    const std::size_t batch = std::min(cfg.batch_size, train_idx.size());
    for (std::size_t m = 0; m < members_.size(); ++m) {
        Rng member_rng = rng.derive(m);
        std::vector<std::size_t> order = train_idx;
        std::size_t steps = 0;
        bool done = false;
        for (std::size_t epoch = 0; epoch < cfg.epochs_per_update && !done; ++epoch) {
            std::shuffle(order.begin(), order.end(), member_rng);
            for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
                const Matrix bx = gather(inputs, order, start, start + batch);
                const Matrix by = gather(targets, order, start, start + batch);
                ColVector grad;
                members_[m].loss_and_gradient(bx, by, &grad);
                members_[m].optimizer().step(members_[m].net().parameters(), grad, cfg.adam);
                if (cfg.max_steps_per_update > 0 && ++steps >= cfg.max_steps_per_update) {
                    done = true;
                    break;
                }
            }
        }
    }
    report.mean_nll_after = ensemble_nll();
    ++updates_;
    return report;
}

void EnsembleDynamicsModel::save(const std::filesystem::path& path) const
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    os << "daqd-ensemble 1\n";
    os << "dims " << ds_ << ' ' << da_ << '\n';
    os << "angular " << angular_.size();
    for (std::size_t a : angular_)
        os << ' ' << a;
    os << '\n';
    os << "config " << cfg_.members << ' ' << cfg_.hidden << ' ' << cfg_.buffer_capacity << ' '
       << (cfg_.sample_imagination ? 1 : 0) << '\n';
    os << "updates " << updates_ << '\n';
    write_reals(os, in_norm_.mean.data(), in_norm_.dim());
    write_reals(os, in_norm_.std.data(), in_norm_.dim());
    write_reals(os, out_norm_.mean.data(), out_norm_.dim());
    write_reals(os, out_norm_.std.data(), out_norm_.dim());
    for (const auto& m : members_)
        m.write(os);
    if (!os)
        throw IoError("write failed for " + path.string());
}

EnsembleDynamicsModel EnsembleDynamicsModel::load(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open model checkpoint " + path.string());
    EnsembleDynamicsModel m;
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "daqd-ensemble" || version != 1)
        throw ParseError("not a daqd ensemble checkpoint: " + path.string(), 1);
    std::size_t n_ang = 0;
    int sample = 0;
    if (!(is >> tag >> m.ds_ >> m.da_) || tag != "dims")
        throw ParseError("checkpoint: missing dims", 2);
    if (!(is >> tag >> n_ang) || tag != "angular")
        throw ParseError("checkpoint: missing angular", 3);
    m.angular_.resize(n_ang);
    for (auto& a : m.angular_)
        is >> a;
    if (!(is >> tag >> m.cfg_.members >> m.cfg_.hidden >> m.cfg_.buffer_capacity >> sample) || tag != "config")
        throw ParseError("checkpoint: missing config", 4);
    m.cfg_.sample_imagination = sample != 0;
    if (!(is >> tag >> m.updates_) || tag != "updates")
        throw ParseError("checkpoint: missing updates", 5);
    const auto din = static_cast<Eigen::Index>(m.ds_ + m.da_);
    const auto dout = static_cast<Eigen::Index>(m.ds_);
    m.in_norm_ = Normalizer{ColVector(din), ColVector(din)};
    m.out_norm_ = Normalizer{ColVector(dout), ColVector(dout)};
    read_reals(is, m.in_norm_.mean.data(), m.in_norm_.dim());
    read_reals(is, m.in_norm_.std.data(), m.in_norm_.dim());
    read_reals(is, m.out_norm_.mean.data(), m.out_norm_.dim());
    read_reals(is, m.out_norm_.std.data(), m.out_norm_.dim());
    for (std::size_t i = 0; i < m.cfg_.members; ++i)
        m.members_.push_back(ProbNet::read(is));
    if (!m.members_.empty()) {
        m.cfg_.logstd_min = m.members_[0].logstd_min();
        m.cfg_.logstd_max = m.members_[0].logstd_max();
    }
    return m;
}

// ---------------------------------------------------------------------------
// Imagined rollouts

std::vector<ImaginedOutcome> rollout_imagined_batch(const DynamicsPredictor& model,
                                                    const std::vector<PolicyParams>& genotypes, const EnvConfig& cfg,
                                                    TaskKind task, bool sample, Rng* rng)
{
    if (!model.ready())
        throw StateError("dynamics model has not been trained");
    if (sample && !rng)
        throw StateError("sampling imagination needs a random stream");
    const std::size_t ds = model.state_dim();
    const std::size_t da = model.action_dim();
    if (ds != kStateDim || da != kActionDim)
        throw DimensionError("model dimensions do not match the environment");
    const std::size_t batch = genotypes.size();
    const std::size_t members = model.member_count();
    const auto B = static_cast<Eigen::Index>(batch);
    const auto Ds = static_cast<Eigen::Index>(ds);

    std::vector<PeriodicController> ctrls;
    ctrls.reserve(batch);
    for (const auto& g : genotypes)
        ctrls.emplace_back(g, cfg.period);

    std::vector<ImaginedOutcome> out(batch);
    for (auto& o : out) {
        o.trajectory.states.reserve(cfg.episode_steps + 1);
        o.trajectory.actions.reserve(cfg.episode_steps);
        o.trajectory.states.push_back(initial_state());
    }

    const ColVector scale = model.disagreement_scale();
    Matrix states = Matrix::Zero(Ds, B);
    Matrix actions(static_cast<Eigen::Index>(da), B);
    ColVector disagreement = ColVector::Zero(B);
    std::vector<Matrix> means, stds;
    const auto& angular = model.angular_dims();
    auto wrap_rows = [&](Matrix& m) {
        for (std::size_t a : angular)
            m.row(static_cast<Eigen::Index>(a)) = m.row(static_cast<Eigen::Index>(a)).unaryExpr(&wrap_angle);
    };

    for (std::size_t t = 0; t < cfg.episode_steps; ++t) {
        const double time = static_cast<double>(t) * cfg.dt;
        for (std::size_t b = 0; b < batch; ++b) {
            Action a = controller_action(ctrls[b], time, cfg);
            for (std::size_t i = 0; i < da; ++i)
                actions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = a[i];
            out[b].trajectory.actions.push_back(std::move(a));
        }
        model.predict_next(states, actions, means, sample ? &stds : nullptr);

        // Offsets relative to member 0, so identical members give exactly member 0.
        Matrix offset_sum = Matrix::Zero(Ds, B);
        std::vector<Matrix> offsets(members);
        offsets[0] = Matrix::Zero(Ds, B);
        for (std::size_t m = 1; m < members; ++m) {
            offsets[m] = means[m] - means[0];
            wrap_rows(offsets[m]);
            offset_sum += offsets[m];
        }
        const Matrix mean_offset = offset_sum / static_cast<double>(members);
        Matrix var = Matrix::Zero(Ds, B);
        for (std::size_t m = 0; m < members; ++m)
            var.array() += (offsets[m] - mean_offset).array().square();
        var /= static_cast<double>(members);
        disagreement += ((var.array().colwise() / scale.array()).colwise().sum() / static_cast<double>(ds))
                            .matrix()
                            .transpose();

        Matrix next;
        if (!sample) {
            next = means[0] + mean_offset;
        } else {
            next.resize(Ds, B);
            for (Eigen::Index b = 0; b < B; ++b) {
                const std::size_t m = rng->index(members);
                for (Eigen::Index d = 0; d < Ds; ++d)
                    next(d, b) = means[m](d, b) + stds[m](d, b) * rng->normal();
            }
        }
        wrap_rows(next);
        states = std::move(next);
        for (std::size_t b = 0; b < batch; ++b) {
            State s(ds);
            for (std::size_t d = 0; d < ds; ++d)
                s[d] = states(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(b));
            out[b].trajectory.states.push_back(std::move(s));
        }
    }

    for (std::size_t b = 0; b < batch; ++b) {
        ImaginedOutcome& o = out[b];
        for (double v : o.trajectory.states.back().values)
            if (!std::isfinite(v))
                throw NumericError("imagined rollout diverged");
        const TaskResult r = evaluate_task(task, o.trajectory, cfg);
        o.trajectory.rewards.assign(cfg.episode_steps, 0.0);
        o.trajectory.rewards.back() = r.ret;
        o.descriptor = r.descriptor;
        o.ret = r.ret;
        o.disagreement = disagreement[static_cast<Eigen::Index>(b)] / static_cast<double>(cfg.episode_steps);
    }
    return out;
}

ImaginedOutcome rollout_imagined(const DynamicsPredictor& model, const PolicyParams& phi, const EnvConfig& cfg,
                                 TaskKind task, bool sample, Rng* rng)
{
    return std::move(rollout_imagined_batch(model, {phi}, cfg, task, sample, rng).front());
}

} // namespace daqd
