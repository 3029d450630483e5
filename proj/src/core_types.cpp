#include "daqd/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace daqd {

void Trajectory::check() const
{
    if (states.size() != actions.size() + 1)
        throw DimensionError("trajectory needs exactly one more state than actions");
    if (rewards.size() != actions.size())
        throw DimensionError("trajectory rewards/actions length mismatch");
}

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw DimensionError("distance between vectors of length " + std::to_string(a.size()) + " and "
                             + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b)
{
    return std::sqrt(squared_distance(a, b));
}

void require_finite(std::span<const double> v, const char* what)
{
    for (double x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite component in ") + what);
}

PolicyParams clamp_genotype(const PolicyParams& p)
{
    require_finite(p.view(), "genotype");
    PolicyParams out = p;
    for (double& x : out.values)
        x = std::clamp(x, 0.0, 1.0);
    return out;
}

double wrap_angle(double a)
{
    constexpr double pi = std::numbers::pi;
    if (a > -pi && a <= pi)
        return a;
    double r = std::fmod(a + pi, 2.0 * pi);
    if (r <= 0.0)
        r += 2.0 * pi;
    return r - pi;
}

} // namespace daqd
