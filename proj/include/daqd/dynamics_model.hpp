#pragma once

#include "daqd/core_types.hpp"
#include "daqd/mlp.hpp"
#include "daqd/rng.hpp"
#include "daqd/toy_env.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace daqd {

// ---------------------------------------------------------------------------
// Replay buffer

/// Fixed-capacity FIFO of transitions stored as flat columns.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t state_dim, std::size_t action_dim, std::size_t capacity);

    void push(const Transition& t);
    void push(const std::vector<Transition>& ts);

    std::size_t size() const noexcept { return size_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t state_dim() const noexcept { return ds_; }
    std::size_t action_dim() const noexcept { return da_; }
    std::size_t total_pushed() const noexcept { return pushed_; }

    /// i-th oldest transition still held.
    Transition at(std::size_t i) const;
    const double* state_ptr(std::size_t i) const { return states_.data() + slot(i) * ds_; }
    const double* action_ptr(std::size_t i) const { return actions_.data() + slot(i) * da_; }
    const double* next_state_ptr(std::size_t i) const { return next_.data() + slot(i) * ds_; }

private:
    std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

    std::size_t ds_, da_, capacity_;
    std::size_t head_ = 0, size_ = 0, pushed_ = 0;
    std::vector<double> states_, actions_, next_;
};

// ---------------------------------------------------------------------------
// Normalization

struct Normalizer {
    ColVector mean;
    ColVector std;

    static Normalizer identity(std::size_t dim);
    /// Column statistics of `data` (dim x n); zero-variance rows keep std = 1.
    static Normalizer fit(const Matrix& data);
    Matrix apply(const Matrix& x) const;
    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
};

// ---------------------------------------------------------------------------
// Gaussian negative log-likelihood

/// Sum over dimensions of (t - mu)^2 / (2 sigma^2) + log sigma, without the
/// 0.5 log(2 pi) constant.
double nll_loss(std::span<const double> mu, std::span<const double> sigma, std::span<const double> target);

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;

/// Smooth bound of raw log-std outputs into (lo, hi); returns the derivative too.
double soft_clamp(double raw, double lo, double hi, double* derivative = nullptr);

/// Probabilistic regressor: outputs mean and log-std of the normalized target.
class ProbNet {
public:
    ProbNet() = default;
    ProbNet(std::size_t input, std::size_t hidden, std::size_t output, double logstd_min, double logstd_max, Rng& rng);

    std::size_t output_dim() const noexcept { return out_; }
    Mlp& net() noexcept { return net_; }
    const Mlp& net() const noexcept { return net_; }
    double logstd_min() const noexcept { return lo_; }
    double logstd_max() const noexcept { return hi_; }

    /// mean and log-std, each output_dim x batch.
    void predict(const Matrix& x, Matrix& mean, Matrix& logstd) const;
    /// Mean per-sample loss (nll_loss) over the batch, and its parameter gradient.
    double loss_and_gradient(const Matrix& x, const Matrix& target, ColVector* grad) const;
    /// Mean per-dimension NLL in nats, constant included.
    double mean_nll(const Matrix& x, const Matrix& target) const;

    Adam& optimizer() noexcept { return adam_; }

    void write(std::ostream& os) const;
    static ProbNet read(std::istream& is);

private:
    Mlp net_;
    Adam adam_;
    std::size_t out_ = 0;
    double lo_ = -5.0, hi_ = 2.0;
};

// ---------------------------------------------------------------------------
// Model interface used by imagined rollouts

/// Anything that maps a batch of (state, action) to per-member next-state means.
class DynamicsPredictor {
public:
    virtual ~DynamicsPredictor() = default;

    virtual std::size_t state_dim() const = 0;
    virtual std::size_t action_dim() const = 0;
    virtual std::size_t member_count() const = 0;
    virtual bool ready() const = 0;
    /// State dimensions holding angles (deltas wrapped into (-pi, pi]).
    virtual const std::vector<std::size_t>& angular_dims() const = 0;
    /// Per-dimension variance used to normalize ensemble disagreement.
    virtual ColVector disagreement_scale() const = 0;

    /// states: Ds x B, actions: Da x B. Fills one Ds x B matrix of next-state
    /// means per member and, when `stds` is given, the matching standard deviations.
    virtual void predict_next(const Matrix& states, const Matrix& actions, std::vector<Matrix>& means,
                              std::vector<Matrix>* stds = nullptr) const = 0;
};

struct TrainConfig {
    AdamConfig adam{};
    std::size_t batch_size = 256;
    std::size_t epochs_per_update = 8;
    /// Cap on optimizer steps per member per update; 0 means no cap.
    std::size_t max_steps_per_update = 0;
    std::size_t train_every_n_evals = 500;
    double holdout_fraction = 0.1;

    void validate() const;
};

struct TrainReport {
    bool skipped = false;
    std::string message;
    double mean_nll_before = 0.0;
    double mean_nll_after = 0.0;
    std::size_t train_size = 0;
    std::size_t holdout_size = 0;
};

struct ModelConfig {
    std::size_t members = 4;
    std::size_t hidden = 64;
    std::size_t buffer_capacity = 100000;
    double logstd_min = -5.0;
    double logstd_max = 2.0;
    /// Propagate samples instead of ensemble means during imagination.
    bool sample_imagination = false;

    void validate() const;
};

/// Ensemble of probabilistic networks predicting normalized state deltas.
class EnsembleDynamicsModel final : public DynamicsPredictor {
public:
    EnsembleDynamicsModel(std::size_t state_dim, std::size_t action_dim, std::vector<std::size_t> angular_dims,
                          const ModelConfig& cfg, Rng rng);

    std::size_t state_dim() const override { return ds_; }
    std::size_t action_dim() const override { return da_; }
    std::size_t member_count() const override { return members_.size(); }
    bool ready() const override { return updates_ > 0; }
    const std::vector<std::size_t>& angular_dims() const override { return angular_; }
    ColVector disagreement_scale() const override;
    void predict_next(const Matrix& states, const Matrix& actions, std::vector<Matrix>& means,
                      std::vector<Matrix>* stds = nullptr) const override;

    /// Raw-unit delta mean and standard deviation of one member.
    std::pair<State, Vector> predict(const State& s, const Action& a, std::size_t member) const;

    TrainReport train(const ReplayBuffer& buffer, const TrainConfig& cfg, Rng& rng);

    /// Normalized inputs (features x n) and delta targets (Ds x n) for the whole buffer.
    void build_dataset(const ReplayBuffer& buffer, Matrix& inputs, Matrix& targets) const;
    void refresh_normalizers(const ReplayBuffer& buffer);

    const Normalizer& input_normalizer() const noexcept { return in_norm_; }
    const Normalizer& target_normalizer() const noexcept { return out_norm_; }
    std::vector<ProbNet>& members() noexcept { return members_; }
    const std::vector<ProbNet>& members() const noexcept { return members_; }
    const ModelConfig& config() const noexcept { return cfg_; }
    std::size_t updates() const noexcept { return updates_; }
    void mark_ready() { updates_ = std::max<std::size_t>(updates_, 1); }

    void save(const std::filesystem::path& path) const;
    static EnsembleDynamicsModel load(const std::filesystem::path& path);

private:
    EnsembleDynamicsModel() = default;
    Matrix raw_inputs(const Matrix& states, const Matrix& actions) const;
    Matrix raw_deltas(const Matrix& states, const Matrix& next) const;

    std::size_t ds_ = 0, da_ = 0;
    std::vector<std::size_t> angular_;
    ModelConfig cfg_;
    std::vector<ProbNet> members_;
    Normalizer in_norm_, out_norm_;
    std::size_t updates_ = 0;
};

// ---------------------------------------------------------------------------
// Imagined rollouts

struct ImaginedOutcome {
    SkillDescriptor descriptor;
    double ret = 0.0;
    double disagreement = 0.0;
    Trajectory trajectory;
};

/// Roll every genotype through the model from rest at the origin. Actions
/// come from the analytic controller; only the dynamics are predicted.
/// `rng` is used only when sampling is enabled.
std::vector<ImaginedOutcome> rollout_imagined_batch(const DynamicsPredictor& model,
                                                    const std::vector<PolicyParams>& genotypes, const EnvConfig& cfg,
                                                    TaskKind task, bool sample = false, Rng* rng = nullptr);

ImaginedOutcome rollout_imagined(const DynamicsPredictor& model, const PolicyParams& phi, const EnvConfig& cfg,
                                 TaskKind task, bool sample = false, Rng* rng = nullptr);

inline double disagreement_score(const ImaginedOutcome& o)
{
    return o.disagreement;
}

} // namespace daqd
