#pragma once

// Offline shortest-skill-sequence search with true skill outcomes.
//
// Breadth-first over skill counts from the maze start, executing every skill's
// real trajectory from rest (rigid-body composition of the rollout from the
// origin) and rejecting any skill whose trajectory touches a wall cell. Poses
// are merged on a 0.1 m x 0.1 m x 22.5 deg lattice so the frontier stays bounded.

#include "daqd/repertoire.hpp"
#include "daqd/toy_env.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace oracle {

struct Grid {
    double cell = 1.0;
    std::vector<std::string> rows; // rows[0] is the top line of the file
    double sx = 0, sy = 0, gx = 0, gy = 0;

    bool wall(double x, double y) const
    {
        if (x < 0 || y < 0)
            return true;
        const auto c = static_cast<std::size_t>(x / cell);
        const auto r_from_bottom = static_cast<std::size_t>(y / cell);
        if (r_from_bottom >= rows.size() || c >= rows.front().size())
            return true;
        return rows[rows.size() - 1 - r_from_bottom][c] == '#';
    }
};

inline Grid read_grid(const std::string& path)
{
    std::ifstream is(path);
    Grid g;
    std::string line, key;
    std::getline(is, line);
    std::istringstream(line) >> key >> g.cell;
    while (std::getline(is, line))
        if (!line.empty())
            g.rows.push_back(line);
    for (std::size_t fr = 0; fr < g.rows.size(); ++fr)
        for (std::size_t c = 0; c < g.rows[fr].size(); ++c) {
            const double x = (static_cast<double>(c) + 0.5) * g.cell;
            const double y = (static_cast<double>(g.rows.size() - 1 - fr) + 0.5) * g.cell;
            if (g.rows[fr][c] == 'S') {
                g.sx = x;
                g.sy = y;
            } else if (g.rows[fr][c] == 'G') {
                g.gx = x;
                g.gy = y;
            }
        }
    return g;
}

struct PoseXY {
    double x, y, yaw;
};

/// Fewest skills reaching the goal radius, or nullopt when none within max_depth.
inline std::optional<std::size_t> shortest_skill_count(const Grid& grid, const daqd::Repertoire& rep,
                                                       const daqd::EnvConfig& env, double goal_radius,
                                                       std::size_t max_depth)
{
    // Body-frame trajectories of every skill.
    std::vector<std::vector<PoseXY>> traj;
    for (const auto& e : rep.entries()) {
        const auto out = daqd::rollout_env(e.policy, env, daqd::TaskKind::Omni);
        std::vector<PoseXY> t;
        for (std::size_t i = 1; i < out.trajectory.states.size(); ++i) {
            const auto& s = out.trajectory.states[i];
            t.push_back({s[0], s[1], s[2]});
        }
        traj.push_back(std::move(t));
    }
    const double pi = std::acos(-1.0);
    auto key = [&](const PoseXY& p) {
        const long ix = static_cast<long>(std::floor(p.x / 0.1));
        const long iy = static_cast<long>(std::floor(p.y / 0.1));
        double a = std::fmod(p.yaw + pi, 2 * pi);
        if (a < 0)
            a += 2 * pi;
        const long iyaw = static_cast<long>(std::floor(a / (2 * pi / 16))) % 16;
        return (ix * 4096 + iy) * 16 + iyaw;
    };
    auto at_goal = [&](const PoseXY& p) { return std::hypot(p.x - grid.gx, p.y - grid.gy) <= goal_radius; };

    PoseXY start{grid.sx, grid.sy, 0.0};
    if (at_goal(start))
        return 0;
    std::unordered_set<long> seen{key(start)};
    std::vector<PoseXY> frontier{start};
    for (std::size_t depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
        std::vector<PoseXY> next;
        for (const PoseXY& p : frontier) {
            const double c = std::cos(p.yaw), s = std::sin(p.yaw);
            for (const auto& t : traj) {
                const PoseXY& end = t.back();
                PoseXY q{p.x + c * end.x - s * end.y, p.y + s * end.x + c * end.y, p.yaw + end.yaw};
                q.yaw = std::remainder(q.yaw, 2 * pi);
                if (grid.wall(q.x, q.y))
                    continue;
                const long k = key(q);
                if (seen.count(k))
                    continue;
                bool hit = false;
                for (const PoseXY& w : t)
                    if (grid.wall(p.x + c * w.x - s * w.y, p.y + s * w.x + c * w.y)) {
                        hit = true;
                        break;
                    }
                if (hit)
                    continue;
                if (at_goal(q))
                    return depth;
                seen.insert(k);
                next.push_back(q);
            }
        }
        frontier = std::move(next);
    }
    return std::nullopt;
}

} // namespace oracle
