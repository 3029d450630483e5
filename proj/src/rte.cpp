#include "daqd/rte.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

namespace daqd {

// ---------------------------------------------------------------------------
// GP

void GpParams::validate() const
{
    if (!(length_scale > 0.0) || !(signal_std > 0.0) || !(noise_std > 0.0))
        throw ConfigError("rte.gp_length_scale, rte.gp_signal_std and rte.gp_noise_std must be positive");
}

SkillOutcomeGP::SkillOutcomeGP(std::size_t input_dim, GpParams params) : dim_(input_dim), params_(params)
{
    params_.validate();
    if (dim_ == 0)
        throw DimensionError("GP input dimension must be positive");
}

double SkillOutcomeGP::kernel(std::span<const double> a, std::span<const double> b) const
{
    const double l = params_.length_scale;
    return params_.signal_std * params_.signal_std * std::exp(-squared_distance(a, b) / (2.0 * l * l));
}

void SkillOutcomeGP::fit(std::vector<Vector> inputs, std::vector<Output> targets)
{
    if (inputs.size() != targets.size())
        throw DimensionError("GP inputs and targets differ in length");
    for (const auto& x : inputs) {
        if (x.size() != dim_)
            throw DimensionError("GP input dimension mismatch");
        require_finite(x, "GP input");
    }
    for (const auto& t : targets)
        require_finite(t, "GP target");
    inputs_ = std::move(inputs);
    targets_ = std::move(targets);
    refactor();
}

void SkillOutcomeGP::add(const Vector& input, const Output& target)
{
    if (input.size() != dim_)
        throw DimensionError("GP input dimension mismatch");
    require_finite(input, "GP input");
    require_finite(target, "GP target");
    inputs_.push_back(input);
    targets_.push_back(target);
    refactor();
}

void SkillOutcomeGP::refactor()
{
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    jitter_ = 0.0;
    if (n == 0) {
        chol_.resize(0, 0);
        alpha_.resize(0, static_cast<Eigen::Index>(kOutputs));
        return;
    }
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            k(i, j) = k(j, i) = kernel(inputs_[static_cast<std::size_t>(i)], inputs_[static_cast<std::size_t>(j)]);
    Matrix y(n, static_cast<Eigen::Index>(kOutputs));
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t d = 0; d < kOutputs; ++d)
            y(i, static_cast<Eigen::Index>(d)) = targets_[static_cast<std::size_t>(i)][d];

    const double noise = params_.noise_std * params_.noise_std;
    const double sf2 = params_.signal_std * params_.signal_std;
    for (double jitter = 0.0; jitter <= 1e-2 * sf2; jitter = jitter == 0.0 ? 1e-10 * sf2 : jitter * 10.0) {
        Matrix a = k;
        a.diagonal().array() += noise + jitter;
        Eigen::LLT<Matrix> llt(a);
        if (llt.info() == Eigen::Success) {
            chol_ = llt.matrixL();
            alpha_ = llt.solve(y);
            jitter_ = jitter;
            return;
        }
    }
    throw NumericError("GP kernel matrix is not positive definite after jitter escalation");
}

SkillOutcomeGP::Prediction SkillOutcomeGP::predict(std::span<const double> x) const
{
    if (x.size() != dim_)
        throw DimensionError("GP query dimension mismatch");
    const double sf2 = params_.signal_std * params_.signal_std;
    Prediction p;
    if (inputs_.empty()) {
        p.variance.fill(sf2);
        return p;
    }
    const auto n = static_cast<Eigen::Index>(inputs_.size());
    ColVector ks(n);
    for (Eigen::Index i = 0; i < n; ++i)
        ks[i] = kernel(x, inputs_[static_cast<std::size_t>(i)]);
    const ColVector mean = alpha_.transpose() * ks;
    const ColVector v = chol_.triangularView<Eigen::Lower>().solve(ks);
    const double var = std::max(sf2 - v.squaredNorm(), 1e-18 * sf2);
    for (std::size_t d = 0; d < kOutputs; ++d) {
        p.mean[d] = mean[static_cast<Eigen::Index>(d)];
        p.variance[d] = var;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Poses

Pose compose(const Pose& p, const SkillOutcome& o)
{
    const double c = std::cos(p.yaw), s = std::sin(p.yaw);
    return Pose{p.x + c * o.dx - s * o.dy, p.y + s * o.dx + c * o.dy, wrap_angle(p.yaw + o.dyaw)};
}

SkillOutcome relative(const Pose& from, const Pose& to)
{
    const double c = std::cos(from.yaw), s = std::sin(from.yaw);
    const double wx = to.x - from.x, wy = to.y - from.y;
    return SkillOutcome{c * wx + s * wy, -s * wx + c * wy, wrap_angle(to.yaw - from.yaw)};
}

// ---------------------------------------------------------------------------
// Maze

Maze Maze::parse(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    Maze m;
    bool header = false;
    std::vector<std::string> grid;
    std::vector<std::size_t> grid_lines;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!header) {
            std::istringstream hs(line);
            std::string key;
            if (!(hs >> key >> m.cell_) || key != "cell_size")
                throw ParseError("expected 'cell_size <meters>' header", lineno);
            if (!(m.cell_ > 0.0) || !std::isfinite(m.cell_))
                throw ParseError("cell_size must be positive", lineno);
            header = true;
            continue;
        }
        grid.push_back(line);
        grid_lines.push_back(lineno);
    }
    if (!header)
        throw ParseError("empty maze file", 1);
    if (grid.empty())
        throw ParseError("maze has no grid rows", lineno);
    m.rows_ = grid.size();
    m.cols_ = grid.front().size();
    m.wall_.assign(m.rows_ * m.cols_, 1);
    bool have_start = false, have_goal = false;
    for (std::size_t fr = 0; fr < m.rows_; ++fr) {
        if (grid[fr].size() != m.cols_)
            throw ParseError("grid rows differ in width", grid_lines[fr]);
        const std::size_t r = m.rows_ - 1 - fr;
        for (std::size_t c = 0; c < m.cols_; ++c) {
            const char ch = grid[fr][c];
            const double cx = (static_cast<double>(c) + 0.5) * m.cell_;
            const double cy = (static_cast<double>(r) + 0.5) * m.cell_;
            switch (ch) {
            case '#':
                break;
            case '.':
                m.wall_[r * m.cols_ + c] = 0;
                break;
            case 'S':
                if (have_start)
                    throw ParseError("more than one start cell", grid_lines[fr]);
                have_start = true;
                m.wall_[r * m.cols_ + c] = 0;
                m.start_ = Pose{cx, cy, 0.0};
                break;
            case 'G':
                if (have_goal)
                    throw ParseError("more than one goal cell", grid_lines[fr]);
                have_goal = true;
                m.wall_[r * m.cols_ + c] = 0;
                m.goal_x_ = cx;
                m.goal_y_ = cy;
                break;
            default:
                throw ParseError(std::string("unexpected character '") + ch + "' in grid", grid_lines[fr]);
            }
        }
    }
    if (!have_start || !have_goal)
        throw ParseError("maze needs exactly one 'S' and one 'G'", lineno);
    m.compute_geodesic();
    return m;
}

Maze Maze::load(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open maze file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

bool Maze::wall_cell(long r, long c) const
{
    if (r < 0 || c < 0 || r >= static_cast<long>(rows_) || c >= static_cast<long>(cols_))
        return true;
    return wall_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c)] != 0;
}

std::pair<long, long> Maze::cell_of(double x, double y) const
{
    return {static_cast<long>(std::floor(y / cell_)), static_cast<long>(std::floor(x / cell_))};
}

bool Maze::free(double x, double y) const
{
    if (!std::isfinite(x) || !std::isfinite(y))
        return false;
    const auto [r, c] = cell_of(x, y);
    return !wall_cell(r, c);
}

bool Maze::segment_free(double x0, double y0, double x1, double y1) const
{
    if (!free(x0, y0) || !free(x1, y1))
        return false;
    auto [r, c] = cell_of(x0, y0);
    const auto [r1, c1] = cell_of(x1, y1);
    const double dx = x1 - x0, dy = y1 - y0;
    const long step_c = dx > 0 ? 1 : -1;
    const long step_r = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = dx != 0.0 ? ((static_cast<double>(c) + (dx > 0 ? 1.0 : 0.0)) * cell_ - x0) / dx : inf;
    double t_max_y = dy != 0.0 ? ((static_cast<double>(r) + (dy > 0 ? 1.0 : 0.0)) * cell_ - y0) / dy : inf;
    const double t_dx = dx != 0.0 ? cell_ / std::abs(dx) : inf;
    const double t_dy = dy != 0.0 ? cell_ / std::abs(dy) : inf;
    const long guard = static_cast<long>(rows_ + cols_) + 4;
    for (long i = 0; i < guard && (r != r1 || c != c1); ++i) {
        if (t_max_x < t_max_y) {
            c += step_c;
            t_max_x += t_dx;
        } else {
            r += step_r;
            t_max_y += t_dy;
        }
        if (wall_cell(r, c))
            return false;
    }
    return true;
}

void Maze::compute_geodesic()
{
    const double inf = std::numeric_limits<double>::infinity();
    geo_.assign(rows_ * cols_, inf);
    const auto [gr, gc] = cell_of(goal_x_, goal_y_);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    const std::size_t g = static_cast<std::size_t>(gr) * cols_ + static_cast<std::size_t>(gc);
    geo_[g] = 0.0;
    open.push({0.0, g});
    while (!open.empty()) {
        const auto [d, idx] = open.top();
        open.pop();
        if (d > geo_[idx])
            continue;
        const long r = static_cast<long>(idx / cols_), c = static_cast<long>(idx % cols_);
        for (long dr = -1; dr <= 1; ++dr) {
            for (long dc = -1; dc <= 1; ++dc) {
                if ((dr == 0 && dc == 0) || wall_cell(r + dr, c + dc))
                    continue;
                // No corner cutting on diagonal moves.
                if (dr != 0 && dc != 0 && (wall_cell(r + dr, c) || wall_cell(r, c + dc)))
                    continue;
                const double nd = d + cell_ * ((dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0);
                const std::size_t n = static_cast<std::size_t>(r + dr) * cols_ + static_cast<std::size_t>(c + dc);
                if (nd < geo_[n]) {
                    geo_[n] = nd;
                    open.push({nd, n});
                }
            }
        }
    }
}

double Maze::distance_to_goal(double x, double y) const
{
    return std::hypot(x - goal_x_, y - goal_y_);
}

double Maze::geodesic(double x, double y) const
{
    const auto [r, c] = cell_of(x, y);
    if (wall_cell(r, c))
        return std::numeric_limits<double>::infinity();
    const double cell_geo = geo_[static_cast<std::size_t>(r) * cols_ + static_cast<std::size_t>(c)];
    return std::max(distance_to_goal(x, y), cell_geo - std::sqrt(0.5) * cell_);
}

// ---------------------------------------------------------------------------
// Skills

void PlannerConfig::validate() const
{
    if (mcts_iterations == 0 || rollout_depth == 0)
        throw ConfigError("rte.mcts_iterations and rte.rollout_depth must be positive");
    if (!(ucb_c >= 0.0) || !std::isfinite(ucb_c))
        throw ConfigError("rte.ucb_c must be non-negative");
    if (!(goal_radius > 0.0))
        throw ConfigError("rte.goal_radius must be positive");
    gp.validate();
}

SkillLibrary build_skill_library(const Repertoire& rep, const EnvConfig& intact, std::size_t path_stride)
{
    if (path_stride == 0)
        throw ConfigError("rte.path_stride must be positive");
    EnvConfig cfg = intact;
    cfg.damage_mask.fill(false);
    SkillLibrary lib;
    for (const auto& e : rep.entries()) {
        const EpisodeOutcome o = rollout_env(e.policy, cfg, TaskKind::Omni);
        const State& s = o.trajectory.states.back();
        lib.policies.push_back(e.policy);
        lib.descriptors.push_back(e.descriptor.values);
        lib.simulated.push_back(SkillOutcome{s[state_index::x], s[state_index::y], s[state_index::yaw]});
        std::vector<SkillOutcome> path;
        const auto& states = o.trajectory.states;
        for (std::size_t t = path_stride; t < states.size(); t += path_stride)
            path.push_back(SkillOutcome{states[t][state_index::x], states[t][state_index::y], states[t][state_index::yaw]});
        if (path.empty() || (states.size() - 1) % path_stride != 0)
            path.push_back(lib.simulated.back());
        lib.paths.push_back(std::move(path));
    }
    return lib;
}

std::vector<SkillOutcome> predicted_outcomes(const SkillLibrary& lib, const SkillOutcomeGP& gp)
{
    std::vector<SkillOutcome> out(lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const auto p = gp.predict(lib.descriptors[i]);
        out[i] = SkillOutcome{lib.simulated[i].dx + p.mean[0], lib.simulated[i].dy + p.mean[1],
                              wrap_angle(lib.simulated[i].dyaw + p.mean[2])};
    }
    return out;
}

// ---------------------------------------------------------------------------
// MCTS

namespace {

struct Node {
    Pose pose;
    std::size_t depth = 0;
    std::size_t action = 0; // skill that led here
    bool terminal = false;
    std::vector<std::size_t> actions;
    std::size_t next_action = 0;
    std::vector<std::size_t> children;
    std::size_t visits = 0;
    double value_sum = 0.0;

    double mean() const { return visits ? value_sum / static_cast<double>(visits) : 0.0; }
};

std::vector<std::size_t> sample_actions(std::size_t n_skills, std::size_t k, Rng rng)
{
    std::vector<std::size_t> idx(n_skills);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (k == 0 || k >= n_skills)
        return idx;
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.index(n_skills - i)]);
    idx.resize(k);
    return idx;
}

} // namespace

PlanResult mcts_plan(const Pose& pose, const SkillLibrary& lib, const std::vector<SkillOutcome>& predicted,
                     const Maze& maze, const PlannerConfig& cfg, const Rng& rng)
{
    cfg.validate();
    if (lib.size() == 0)
        throw StateError("planning needs a nonempty repertoire");
    if (predicted.size() != lib.size())
        throw DimensionError("predicted outcomes do not match the skill library");

    if (lib.paths.size() != lib.size())
        throw DimensionError("skill library paths are missing");

    // Simulated waypoints shifted by the predicted residual, growing linearly along the path.
    std::vector<std::vector<SkillOutcome>> paths(lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const auto& sim = lib.paths[i];
        const double rx = predicted[i].dx - lib.simulated[i].dx;
        const double ry = predicted[i].dy - lib.simulated[i].dy;
        paths[i].reserve(sim.size());
        for (std::size_t k = 0; k < sim.size(); ++k) {
            const double f = static_cast<double>(k + 1) / static_cast<double>(sim.size());
            paths[i].push_back(SkillOutcome{sim[k].dx + f * rx, sim[k].dy + f * ry, 0.0});
        }
        paths[i].back() = predicted[i];
    }
    auto path_free = [&](const Pose& from, std::size_t skill) {
        double px = from.x, py = from.y;
        for (const auto& w : paths[skill]) {
            const Pose q = compose(from, w);
            if (!maze.segment_free(px, py, q.x, q.y))
                return false;
            px = q.x;
            py = q.y;
        }
        return true;
    };

    PlanResult res;
    double reach = 1e-6;
    for (const auto& o : predicted)
        reach = std::max(reach, std::hypot(o.dx, o.dy));

    auto heuristic = [&](const Node& n) {
        if (n.terminal)
            return -static_cast<double>(n.depth);
        return -(static_cast<double>(n.depth) + maze.geodesic(n.pose.x, n.pose.y) / reach);
    };
    auto least_bad = [&](const std::vector<std::size_t>& actions) {
        std::size_t best = actions.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t a : actions) {
            const Pose p = compose(pose, predicted[a]);
            const double d = maze.distance_to_goal(p.x, p.y);
            if (d < best_d) {
                best_d = d;
                best = a;
            }
        }
        return best;
    };

    std::vector<Node> nodes;
    std::size_t node_streams = 0;
    auto make_node = [&](const Pose& p, std::size_t depth, std::size_t action) {
        Node n;
        n.pose = p;
        n.depth = depth;
        n.action = action;
        n.terminal = maze.distance_to_goal(p.x, p.y) <= cfg.goal_radius;
        n.actions = sample_actions(lib.size(), cfg.action_set_size, rng.derive(node_streams++));
        nodes.push_back(std::move(n));
        return nodes.size() - 1;
    };
    make_node(pose, 0, 0);
    res.root_actions = nodes[0].actions;

    if (!std::isfinite(maze.geodesic(pose.x, pose.y))) {
        res.blocked = true;
        res.skill = least_bad(nodes[0].actions);
        return res;
    }

    std::vector<std::size_t> path;
    for (std::size_t it = 0; it < cfg.mcts_iterations; ++it) {
        path.assign(1, 0);
        std::size_t cur = 0;
        while (true) {
            Node& n = nodes[cur];
            if (n.terminal || n.depth >= cfg.rollout_depth)
                break;
            bool expanded = false;
            while (n.next_action < n.actions.size()) {
                const std::size_t a = n.actions[n.next_action++];
                if (!path_free(n.pose, a))
                    continue;
                const Pose p = compose(n.pose, predicted[a]);
                const std::size_t child = make_node(p, n.depth + 1, a);
                nodes[cur].children.push_back(child);
                path.push_back(child);
                cur = child;
                expanded = true;
                break;
            }
            if (expanded)
                break;
            const Node& m = nodes[cur];
            if (m.children.empty())
                break;
            const double log_n = std::log(static_cast<double>(std::max<std::size_t>(m.visits, 1)));
            std::size_t best = m.children.front();
            double best_u = -std::numeric_limits<double>::infinity();
            for (std::size_t ch : m.children) {
                const Node& c = nodes[ch];
                const double u = c.mean() + cfg.ucb_c * std::sqrt(log_n / static_cast<double>(c.visits));
                if (u > best_u) {
                    best_u = u;
                    best = ch;
                }
            }
            cur = best;
            path.push_back(cur);
        }
        if (cur == 0 && nodes[0].children.empty())
            break; // every root action collides
        const double value = heuristic(nodes[cur]);
        for (std::size_t idx : path) {
            ++nodes[idx].visits;
            nodes[idx].value_sum += value;
        }
        ++res.iterations;
    }

    const Node& root = nodes[0];
    if (root.children.empty()) {
        res.blocked = true;
        res.skill = least_bad(root.actions);
        return res;
    }
    std::size_t best = root.children.front();
    for (std::size_t ch : root.children) {
        const Node& c = nodes[ch];
        const Node& b = nodes[best];
        if (c.visits > b.visits || (c.visits == b.visits && c.mean() > b.mean()))
            best = ch;
    }
    res.skill = nodes[best].action;
    res.root_actions.clear();
    for (std::size_t ch : root.children) {
        res.root_actions.push_back(nodes[ch].action);
        res.root_visits.push_back(nodes[ch].visits);
        res.root_values.push_back(nodes[ch].mean());
    }
    return res;
}

PlanResult mcts_plan(const Pose& pose, const SkillLibrary& lib, const SkillOutcomeGP& gp, const Maze& maze,
                     const PlannerConfig& cfg, const Rng& rng)
{
    return mcts_plan(pose, lib, predicted_outcomes(lib, gp), maze, cfg, rng);
}

// ---------------------------------------------------------------------------
// Execution and episodes

Execution execute_skill(const PolicyParams& policy, const Pose& pose, const EnvConfig& env, const Maze& maze)
{
    const PeriodicController ctrl(policy, env.period);
    State s(kStateDim);
    s[state_index::x] = pose.x;
    s[state_index::y] = pose.y;
    s[state_index::yaw] = pose.yaw;
    Execution ex;
    ex.path.push_back(pose);
    for (std::size_t t = 0; t < env.episode_steps; ++t) {
        const State n = step(s, controller_action(ctrl, static_cast<double>(t) * env.dt, env), env);
        if (!maze.segment_free(s[state_index::x], s[state_index::y], n[state_index::x], n[state_index::y])) {
            ex.collided = true;
            break;
        }
        s = n;
        ex.path.push_back(Pose{s[state_index::x], s[state_index::y], s[state_index::yaw]});
    }
    ex.end = ex.path.back();
    return ex;
}

std::pair<double, double> RteReport::prediction_errors(std::size_t skip) const
{
    double gp_err = 0.0, sim_err = 0.0;
    std::size_t n = 0;
    for (std::size_t i = skip; i < steps.size(); ++i) {
        const RteStep& s = steps[i];
        if (s.collided)
            continue;
        gp_err += std::hypot(s.predicted.x - s.realized.x, s.predicted.y - s.realized.y);
        sim_err += std::hypot(s.simulated.x - s.realized.x, s.simulated.y - s.realized.y);
        ++n;
    }
    if (n == 0)
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return {gp_err / static_cast<double>(n), sim_err / static_cast<double>(n)};
}

RteReport rte_episode(const Maze& maze, const SkillLibrary& lib, const EnvConfig& env, const PlannerConfig& cfg,
                      const Rng& rng)
{
    cfg.validate();
    env.validate();
    if (lib.size() == 0)
        throw StateError("RTE needs a nonempty repertoire");
    SkillOutcomeGP gp(lib.descriptors.front().size(), cfg.gp);
    RteReport report;
    Pose pose = maze.start();
    report.trajectory.push_back(pose);
    auto at_goal = [&] { return maze.distance_to_goal(pose.x, pose.y) <= cfg.goal_radius; };

    for (std::size_t i = 0; i < cfg.max_skills && !at_goal(); ++i) {
        const std::vector<SkillOutcome> predicted = predicted_outcomes(lib, gp);
        const PlanResult plan = mcts_plan(pose, lib, predicted, maze, cfg, rng.derive(i));
        if (plan.blocked && !std::isfinite(maze.geodesic(pose.x, pose.y)))
            break;
        const std::size_t k = plan.skill;
        const Execution ex = execute_skill(lib.policies[k], pose, env, maze);

        RteStep st;
        st.skill = k;
        st.descriptor = lib.descriptors[k];
        st.start = pose;
        st.predicted = compose(pose, predicted[k]);
        st.simulated = compose(pose, lib.simulated[k]);
        st.realized = ex.end;
        const SkillOutcome real = relative(pose, ex.end);
        st.residual = SkillOutcome{real.dx - lib.simulated[k].dx, real.dy - lib.simulated[k].dy,
                                   wrap_angle(real.dyaw - lib.simulated[k].dyaw)};
        st.collided = ex.collided;
        st.blocked = plan.blocked;
        // A wall-truncated outcome says nothing about the skill itself.
        if (!ex.collided)
            gp.add(lib.descriptors[k], {st.residual.dx, st.residual.dy, st.residual.dyaw});

        pose = ex.end;
        report.trajectory.insert(report.trajectory.end(), ex.path.begin() + 1, ex.path.end());
        report.steps.push_back(std::move(st));
        ++report.skills_executed;
    }
    report.reached = at_goal();
    return report;
}

void write_rte_csv(const RteReport& report, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open " + path.string() + " for writing");
    const std::size_t dim = report.steps.empty() ? 0 : report.steps.front().descriptor.size();
    os << "step,skill";
    for (std::size_t d = 0; d < dim; ++d)
        os << ",sd_" << d;
    os << ",start_x,start_y,start_yaw,pred_x,pred_y,pred_yaw,real_x,real_y,real_yaw,res_dx,res_dy,res_dyaw,collided\n";
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const RteStep& s = report.steps[i];
        os << i << ',' << s.skill;
        for (double v : s.descriptor)
            os << ',' << format_real(v);
        for (const Pose* p : {&s.start, &s.predicted, &s.realized})
            os << ',' << format_real(p->x) << ',' << format_real(p->y) << ',' << format_real(p->yaw);
        os << ',' << format_real(s.residual.dx) << ',' << format_real(s.residual.dy) << ','
           << format_real(s.residual.dyaw) << ',' << (s.collided ? 1 : 0) << '\n';
    }
    if (!os)
        throw IoError("write failed for " + path.string());
}

} // namespace daqd
