#include "daqd/loop.hpp"

#include "daqd/direct_model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace daqd {

const char* to_string(LoopMode m)
{
    switch (m) {
    case LoopMode::VanillaQD:
        return "qd";
    case LoopMode::DirectSurrogateQD:
        return "mqd";
    case LoopMode::DAQD:
        return "daqd";
    case LoopMode::Random:
        return "random";
    }
    return "?";
}

LoopMode loop_mode_from_string(const std::string& s)
{
    if (s == "qd")
        return LoopMode::VanillaQD;
    if (s == "mqd")
        return LoopMode::DirectSurrogateQD;
    if (s == "daqd")
        return LoopMode::DAQD;
    if (s == "random")
        return LoopMode::Random;
    throw ConfigError("unknown loop mode '" + s + "' (expected qd, mqd, daqd or random)");
}

void SelectionStrategy::validate() const
{
    if (kind == Kind::LowDisagreementTopN && !(pool >= take && take >= 1))
        throw ConfigError("selection.pool must be >= selection.take >= 1");
}

void StopRule::validate() const
{
    if (window < 1)
        throw ConfigError("stop.window must be at least 1");
    if (!std::isfinite(threshold))
        throw ConfigError("stop.threshold must be finite");
}

void AdditionWindow::push(std::size_t additions)
{
    recent_.push_back(additions);
    if (recent_.size() > window_)
        recent_.erase(recent_.begin());
}

double AdditionWindow::mean() const
{
    if (recent_.empty())
        return 0.0;
    return static_cast<double>(std::accumulate(recent_.begin(), recent_.end(), std::size_t{0}))
           / static_cast<double>(recent_.size());
}

bool AdditionWindow::below(double threshold) const
{
    return recent_.size() == window_ && mean() < threshold;
}

void LoopConfig::validate() const
{
    if (eval_budget == 0)
        throw ConfigError("loop.eval_budget must be positive");
    if (metrics_every == 0)
        throw ConfigError("loop.metrics_every must be positive");
    if (mode == LoopMode::DAQD || mode == LoopMode::DirectSurrogateQD) {
        if (imagination_iters_per_cycle == 0)
            throw ConfigError("loop.imagination_iters_per_cycle must be positive");
        if (max_idle_cycles == 0)
            throw ConfigError("loop.max_idle_cycles must be positive");
    }
    selection.validate();
    stop_rule.validate();
    variation.validate();
    repertoire.validate();
    model.validate();
    train.validate();
}

// ---------------------------------------------------------------------------
// Metrics

std::string format_metrics_row(const MetricsRow& r)
{
    std::ostringstream os;
    os << r.evals_used << ',' << r.repertoire_size << ',' << format_real(r.qd_score) << ',' << r.imagined_size << ','
       << r.imagined_rollouts << ',' << (r.model_nll_heldout ? format_real(*r.model_nll_heldout) : std::string())
       << ',' << format_real(r.wall_time_s);
    return os.str();
}

MetricsLog::MetricsLog(const std::filesystem::path& path)
{
    out_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*out_)
        throw IoError("cannot open metrics file " + path.string());
    *out_ << kMetricsHeader << '\n' << std::flush;
}

void MetricsLog::append(const MetricsRow& row)
{
    if (!rows_.empty() && row.evals_used < rows_.back().evals_used)
        throw StateError("metrics rows must have non-decreasing evals_used");
    rows_.push_back(row);
    if (out_) {
        *out_ << format_metrics_row(row) << '\n' << std::flush;
        if (!*out_)
            throw IoError("metrics write failed");
    }
}

namespace {

std::vector<std::string> split_commas(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

template <typename T> T parse_field(const std::string& s, const char* column, std::size_t line)
{
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw ParseError(std::string("bad value '") + s + "' in column " + column, line);
    return v;
}

} // namespace

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open metrics file " + path.string());
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("empty metrics file " + path.string(), 1);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto got = split_commas(line);
    const auto want = split_commas(kMetricsHeader);
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (i >= got.size())
            throw ParseError("missing column '" + want[i] + "' in " + path.string(), 1);
        if (got[i] != want[i])
            throw ParseError("unexpected column '" + got[i] + "' (expected '" + want[i] + "') in " + path.string(), 1);
    }
    if (got.size() != want.size())
        throw ParseError("unexpected column '" + got[want.size()] + "' in " + path.string(), 1);

    std::vector<MetricsRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto f = split_commas(line);
        if (f.size() != want.size())
            throw ParseError("expected " + std::to_string(want.size()) + " fields", lineno);
        MetricsRow r;
        r.evals_used = parse_field<std::size_t>(f[0], "evals_used", lineno);
        r.repertoire_size = parse_field<std::size_t>(f[1], "repertoire_size", lineno);
        r.qd_score = parse_field<double>(f[2], "qd_score", lineno);
        r.imagined_size = parse_field<std::size_t>(f[3], "imagined_size", lineno);
        r.imagined_rollouts = parse_field<std::size_t>(f[4], "imagined_rollouts", lineno);
        if (!f[5].empty())
            r.model_nll_heldout = parse_field<double>(f[5], "model_nll_heldout", lineno);
        r.wall_time_s = parse_field<double>(f[6], "wall_time_s", lineno);
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Shared runner plumbing

namespace {

std::vector<std::size_t> angular_state_dims()
{
    return {state_index::yaw};
}

/// State shared by every runner: the real repertoire, eval accounting and metrics.
class Runner {
public:
    Runner(const LoopConfig& cfg, Environment& env, const LoopOptions& opt)
        : cfg_(cfg), env_(env), start_(std::chrono::steady_clock::now())
    {
        cfg_.validate();
        if (!opt.metrics_path.empty())
            log_ = MetricsLog(opt.metrics_path);
        const std::size_t dim = descriptor_dim(env.task());
        result_.repertoire = Repertoire(dim, cfg.repertoire);
        result_.imagined = Repertoire(dim, cfg.repertoire);
        log_row();
    }

    const LoopConfig& cfg() const { return cfg_; }
    Environment& env() { return env_; }
    LoopResult& result() { return result_; }
    Repertoire& real() { return result_.repertoire; }
    Repertoire& imagined() { return result_.imagined; }
    std::size_t evals() const { return result_.env_evals; }
    std::size_t remaining() const { return cfg_.eval_budget - result_.env_evals; }
    bool budget_left() const { return result_.env_evals < cfg_.eval_budget; }
    bool iteration_cap_reached() const
    {
        return cfg_.max_qd_iterations > 0 && result_.qd_iterations >= cfg_.max_qd_iterations;
    }

    void set_nll(std::optional<double> nll) { nll_ = nll; }
    void set_buffer(ReplayBuffer* b) { buffer_ = b; }
    void set_observer(std::function<void(const PolicyParams&, const EpisodeOutcome&)> f) { observer_ = std::move(f); }

    /// Evaluate in the env, add to the real repertoire, log on metrics boundaries.
    EpisodeOutcome evaluate(const PolicyParams& phi, bool record_as_candidate)
    {
        if (!budget_left())
            throw StateError("evaluation budget exhausted");
        EpisodeOutcome o = env_.evaluate(phi);
        ++result_.env_evals;
        if (buffer_)
            buffer_->push(o.transitions);
        if (observer_)
            observer_(phi, o);
        RepertoireEntry e;
        e.policy = phi;
        e.descriptor = o.descriptor;
        e.ret = o.ret;
        const AdditionOutcome out = real().try_add(std::move(e));
        result_.real_outcomes.push_back(out);
        if (record_as_candidate)
            result_.candidate_outcomes.push_back(out);
        if (result_.env_evals % cfg_.metrics_every == 0)
            log_row();
        return o;
    }

    void bootstrap(const Rng& rng)
    {
        Rng init_rng = rng.derive(streams::kInit);
        const std::size_t n = std::min(cfg_.variation.init_random_count, cfg_.eval_budget);
        for (const auto& phi : random_genotypes(n, kGenotypeDim, init_rng))
            evaluate(phi, true);
    }

    std::vector<PolicyParams> offspring(const Repertoire& from, std::size_t n, const Rng& rng)
    {
        const Rng stream = rng.derive(streams::kVariation).derive(result_.qd_iterations);
        ++result_.qd_iterations;
        if (from.empty()) {
            Rng r = stream;
            return random_genotypes(n, kGenotypeDim, r);
        }
        return generate_offspring(from, n, cfg_.variation, stream);
    }

    void log_row()
    {
        MetricsRow r;
        r.evals_used = result_.env_evals;
        r.repertoire_size = real().size();
        r.qd_score = real().qd_score();
        r.imagined_size = imagined().size();
        r.imagined_rollouts = result_.imagined_rollouts;
        r.model_nll_heldout = nll_;
        if (cfg_.record_wall_time)
            r.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        log_.append(r);
    }

    LoopResult finish(std::string reason)
    {
        if (log_.rows().back().evals_used != result_.env_evals)
            log_row();
        result_.metrics = log_.rows();
        result_.stop_reason = std::move(reason);
        return std::move(result_);
    }

private:
    LoopConfig cfg_;
    Environment& env_;
    std::chrono::steady_clock::time_point start_;
    MetricsLog log_;
    LoopResult result_;
    std::optional<double> nll_;
    ReplayBuffer* buffer_ = nullptr;
    std::function<void(const PolicyParams&, const EpisodeOutcome&)> observer_;
};

/// Slots of not-yet-evaluated imagined entries chosen for env evaluation.
std::vector<std::size_t> select_for_env(const Repertoire& imagined, const SelectionStrategy& sel)
{
    std::vector<std::size_t> fresh;
    for (std::size_t i = 0; i < imagined.size(); ++i)
        if (!imagined[i].evaluated_in_env)
            fresh.push_back(i);
    if (sel.kind == SelectionStrategy::Kind::AllImagined) {
        // Order of insertion, so the env sees candidates in the order they were generated.
        std::sort(fresh.begin(), fresh.end(),
                  [&](std::size_t a, std::size_t b) { return imagined[a].id < imagined[b].id; });
        return fresh;
    }
    std::stable_sort(fresh.begin(), fresh.end(), [&](std::size_t a, std::size_t b) {
        return imagined[a].disagreement.value_or(0.0) < imagined[b].disagreement.value_or(0.0);
    });
    fresh.resize(std::min(fresh.size(), sel.pool));
    std::stable_sort(fresh.begin(), fresh.end(),
                     [&](std::size_t a, std::size_t b) { return imagined[a].ret > imagined[b].ret; });
    fresh.resize(std::min(fresh.size(), sel.take));
    return fresh;
}

/// Imagined outcome as a candidate entry for the imagined repertoire.
RepertoireEntry imagined_entry(PolicyParams phi, SkillDescriptor sd, double ret, std::optional<double> dis)
{
    RepertoireEntry e;
    e.policy = std::move(phi);
    e.descriptor = std::move(sd);
    e.ret = ret;
    e.disagreement = dis;
    e.evaluated_in_env = false;
    return e;
}

/// Shared cycle of the screened modes. `screen` fills the imagined repertoire
/// for one batch and returns the number of additions.
template <typename Screen, typename Retrain, typename Ready>
LoopResult screened_cycles(Runner& run, const Rng& rng, Screen&& screen, Retrain&& retrain, Ready&& screening_ready)
{
    const LoopConfig& cfg = run.cfg();
    AdditionWindow window(cfg.stop_rule.window);
    std::size_t idle = 0;
    std::string reason = "budget exhausted";
    bool addition_stop = false;

    while (run.budget_left()) {
        if (run.iteration_cap_reached()) {
            reason = "iteration cap reached";
            break;
        }
        if (!screening_ready()) {
            // Cold start: plain QD iteration straight in the env.
            const auto children = run.offspring(run.real(), std::min(cfg.variation.batch_size, run.remaining()), rng);
            for (const auto& c : children)
                run.evaluate(c, true);
            run.imagined() = run.real();
            retrain();
            continue;
        }

        for (std::size_t k = 0; k < cfg.imagination_iters_per_cycle; ++k) {
            if (run.iteration_cap_reached())
                break;
            const auto children = run.offspring(run.imagined(), cfg.variation.batch_size, rng);
            const std::size_t added = screen(children, run.result().qd_iterations - 1);
            window.push(added);
            if (cfg.stop_rule.watches_additions() && window.below(cfg.stop_rule.threshold)) {
                addition_stop = true;
                break;
            }
        }

        std::vector<std::size_t> chosen = select_for_env(run.imagined(), cfg.selection);
        if (chosen.size() > run.remaining())
            chosen.resize(run.remaining());
        for (std::size_t slot : chosen) {
            const PolicyParams phi = run.imagined()[slot].policy;
            run.evaluate(phi, false);
        }
        idle = chosen.empty() ? idle + 1 : 0;

        run.imagined() = run.real();
        retrain();

        if (addition_stop && cfg.stop_rule.kind != StopRule::Kind::BudgetExhausted) {
            reason = "imagined additions below threshold";
            break;
        }
        if (idle >= cfg.max_idle_cycles) {
            reason = "no candidates selected for " + std::to_string(idle) + " cycles";
            break;
        }
    }
    return run.finish(run.budget_left() ? reason : "budget exhausted");
}

} // namespace

// ---------------------------------------------------------------------------
// Runners

LoopResult run_vanilla_qd(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt)
{
    Runner run(cfg, env, opt);
    run.bootstrap(rng);
    std::string reason = "budget exhausted";
    while (run.budget_left()) {
        if (run.iteration_cap_reached()) {
            reason = "iteration cap reached";
            break;
        }
        const auto children = run.offspring(run.real(), std::min(cfg.variation.batch_size, run.remaining()), rng);
        for (const auto& c : children)
            run.evaluate(c, true);
    }
    return run.finish(reason);
}

LoopResult run_random(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt)
{
    Runner run(cfg, env, opt);
    Rng r = rng.derive(streams::kInit);
    while (run.budget_left()) {
        const auto batch = random_genotypes(std::min(cfg.variation.batch_size, run.remaining()), kGenotypeDim, r);
        for (const auto& phi : batch)
            run.evaluate(phi, true);
    }
    return run.finish("budget exhausted");
}

LoopResult run_daqd(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt)
{
    Runner run(cfg, env, opt);
    ReplayBuffer buffer(kStateDim, kActionDim, cfg.model.buffer_capacity);
    run.set_buffer(&buffer);

    std::unique_ptr<EnsembleDynamicsModel> learned;
    if (!opt.external_model)
        learned = std::make_unique<EnsembleDynamicsModel>(kStateDim, kActionDim, angular_state_dims(), cfg.model,
                                                          rng.derive(streams::kModelInit));
    const DynamicsPredictor& model = opt.external_model ? *opt.external_model : *learned;
    std::size_t last_train = 0;

    auto retrain = [&](bool force) {
        if (!learned)
            return;
        if (!force && run.evals() - last_train < cfg.train.train_every_n_evals)
            return;
        Rng train_rng = rng.derive(streams::kTraining).derive(run.result().train_updates);
        const TrainReport rep = learned->train(buffer, cfg.train, train_rng);
        last_train = run.evals();
        if (!rep.skipped) {
            ++run.result().train_updates;
            run.set_nll(rep.mean_nll_after);
        }
    };

    run.bootstrap(rng);
    retrain(true);
    run.imagined() = run.real();

    auto screen = [&](const std::vector<PolicyParams>& children, std::size_t iteration) {
        Rng sample_rng = rng.derive(streams::kImagination).derive(iteration);
        const auto outs = rollout_imagined_batch(model, children, env.config(), env.task(),
                                                 cfg.model.sample_imagination, &sample_rng);
        run.result().imagined_rollouts += outs.size();
        std::optional<Repertoire> before;
        std::vector<AdditionOutcome> decisions;
        if (opt.on_imagined_batch)
            before = run.imagined();
        std::size_t added = 0;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            const AdditionOutcome o = run.imagined().try_add(
                imagined_entry(children[i], outs[i].descriptor, outs[i].ret, outs[i].disagreement));
            if (o.accepted())
                ++added;
            run.result().candidate_outcomes.push_back(o);
            if (before)
                decisions.push_back(o);
        }
        if (before)
            opt.on_imagined_batch(*before, children, decisions);
        return added;
    };

    LoopResult res = screened_cycles(
        run, rng, screen, [&] { retrain(false); }, [&] { return model.ready(); });
    res.model = std::move(learned);
    return res;
}

LoopResult run_direct_surrogate_qd(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt)
{
    Runner run(cfg, env, opt);
    DirectSurrogate surrogate(kGenotypeDim, descriptor_dim(env.task()), cfg.model.hidden,
                              rng.derive(streams::kModelInit));
    run.set_observer([&](const PolicyParams& phi, const EpisodeOutcome& o) { surrogate.add(phi, o.descriptor, o.ret); });
    std::size_t last_train = 0;

    auto retrain = [&](bool force) {
        if (!force && run.evals() - last_train < cfg.train.train_every_n_evals && surrogate.ready())
            return;
        Rng train_rng = rng.derive(streams::kTraining).derive(run.result().train_updates);
        const TrainReport rep = surrogate.train(cfg.train, cfg.variation.batch_size, train_rng);
        last_train = run.evals();
        if (!rep.skipped) {
            ++run.result().train_updates;
            run.set_nll(rep.mean_nll_after);
        }
    };

    run.bootstrap(rng);
    retrain(true);
    run.imagined() = run.real();

    auto screen = [&](const std::vector<PolicyParams>& children, std::size_t) {
        const auto preds = surrogate.predict(children);
        run.result().imagined_rollouts += preds.size();
        std::size_t added = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const AdditionOutcome o =
                run.imagined().try_add(imagined_entry(children[i], preds[i].descriptor, preds[i].ret, std::nullopt));
            if (o.accepted())
                ++added;
            run.result().candidate_outcomes.push_back(o);
        }
        return added;
    };

    return screened_cycles(
        run, rng, screen, [&] { retrain(false); }, [&] { return surrogate.ready(); });
}

LoopResult run_loop(const LoopConfig& cfg, Environment& env, const Rng& rng, const LoopOptions& opt)
{
    switch (cfg.mode) {
    case LoopMode::VanillaQD:
        return run_vanilla_qd(cfg, env, rng, opt);
    case LoopMode::DirectSurrogateQD:
        return run_direct_surrogate_qd(cfg, env, rng, opt);
    case LoopMode::DAQD:
        return run_daqd(cfg, env, rng, opt);
    case LoopMode::Random:
        return run_random(cfg, env, rng, opt);
    }
    throw ConfigError("unknown loop mode");
}

// ---------------------------------------------------------------------------
// Imagination only, few-shot and acquisition

ImaginationResult run_imagination_only(const ImaginationConfig& cfg, const DynamicsPredictor& model,
                                       const EnvConfig& env_cfg, TaskKind task, const Rng& rng)
{
    cfg.variation.validate();
    cfg.repertoire.validate();
    cfg.stop_rule.validate();
    if (!model.ready())
        throw StateError("imagination needs a trained model");
    ImaginationResult res;
    res.imagined = Repertoire(descriptor_dim(task), cfg.repertoire);
    AdditionWindow window(cfg.stop_rule.window);
    res.stop_reason = "rollout budget exhausted";

    auto screen = [&](const std::vector<PolicyParams>& children) {
        Rng sample_rng = rng.derive(streams::kImagination).derive(res.qd_iterations);
        const auto outs = rollout_imagined_batch(model, children, env_cfg, task, false, &sample_rng);
        res.imagined_rollouts += outs.size();
        std::size_t added = 0;
        for (std::size_t i = 0; i < outs.size(); ++i)
            if (res.imagined
                    .try_add(imagined_entry(children[i], outs[i].descriptor, outs[i].ret, outs[i].disagreement))
                    .accepted())
                ++added;
        return added;
    };

    Rng init_rng = rng.derive(streams::kInit);
    const std::size_t n_init = std::min(cfg.variation.init_random_count, cfg.imagined_rollouts);
    if (n_init > 0)
        screen(random_genotypes(n_init, kGenotypeDim, init_rng));
    while (res.imagined_rollouts < cfg.imagined_rollouts) {
        const std::size_t n = std::min(cfg.variation.batch_size, cfg.imagined_rollouts - res.imagined_rollouts);
        const Rng stream = rng.derive(streams::kVariation).derive(res.qd_iterations);
        std::vector<PolicyParams> children;
        if (res.imagined.empty()) {
            Rng r = stream;
            children = random_genotypes(n, kGenotypeDim, r);
        } else {
            children = generate_offspring(res.imagined, n, cfg.variation, stream);
        }
        const std::size_t added = screen(children);
        ++res.qd_iterations;
        window.push(added);
        if (cfg.stop_rule.watches_additions() && window.below(cfg.stop_rule.threshold)) {
            res.stop_reason = "imagined additions below threshold";
            break;
        }
    }
    return res;
}

FewShotReport zero_few_shot_eval(const Repertoire& imagined, Environment& env, std::size_t n, std::size_t pool)
{
    if (n == 0)
        throw ConfigError("few-shot evaluation needs n >= 1");
    if (pool == 0)
        throw ConfigError("few-shot pool must be positive");
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < imagined.size(); ++i)
        if (imagined[i].disagreement)
            slots.push_back(i);
    if (slots.empty())
        throw StateError("imagined repertoire has no entries with disagreement scores");

    FewShotReport rep;
    rep.requested = n;
    if (slots.size() < pool) {
        rep.warning = "only " + std::to_string(slots.size()) + " imagined entries; pool shrunk from "
                      + std::to_string(pool);
        pool = slots.size();
    }
    std::stable_sort(slots.begin(), slots.end(),
                     [&](std::size_t a, std::size_t b) { return *imagined[a].disagreement < *imagined[b].disagreement; });
    slots.resize(pool);
    std::stable_sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) { return imagined[a].ret > imagined[b].ret; });
    rep.pool = pool;
    if (n > pool) {
        rep.warning += std::string(rep.warning.empty() ? "" : "; ") + "n reduced to the pool size";
        n = pool;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const RepertoireEntry& e = imagined[slots[i]];
        const EpisodeOutcome o = env.evaluate(e.policy);
        rep.entry_ids.push_back(e.id);
        rep.imagined_returns.push_back(e.ret);
        rep.realized_returns.push_back(o.ret);
    }
    rep.best_ret = *std::max_element(rep.realized_returns.begin(), rep.realized_returns.end());
    rep.mean_ret = std::accumulate(rep.realized_returns.begin(), rep.realized_returns.end(), 0.0)
                   / static_cast<double>(rep.realized_returns.size());
    return rep;
}

AcquisitionResult acquire_from_imagined(const Repertoire& imagined, Environment& env, const RepertoireParams& params)
{
    AcquisitionResult res;
    res.repertoire = Repertoire(imagined.descriptor_dim(), params);
    for (const auto& e : imagined.entries()) {
        const EpisodeOutcome o = env.evaluate(e.policy);
        ++res.env_evals;
        RepertoireEntry r;
        r.policy = e.policy;
        r.descriptor = o.descriptor;
        r.ret = o.ret;
        res.repertoire.try_add(std::move(r));
    }
    return res;
}

} // namespace daqd
