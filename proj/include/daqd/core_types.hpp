#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace daqd {

using Vector = std::vector<double>;

// Error hierarchy. The C API maps each kind onto a status code.
enum class ErrorKind { Dimension, Numeric, Parse, Io, Config, State };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(ErrorKind::Dimension, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error(ErrorKind::State, what) {}
};

// Tagged real vectors, so a genotype can't be passed where a descriptor is expected.
template <typename Tag>
struct TaggedVector {
    Vector values;

    TaggedVector() = default;
    explicit TaggedVector(Vector v) : values(std::move(v)) {}
    explicit TaggedVector(std::size_t n, double fill = 0.0) : values(n, fill) {}
    TaggedVector(std::initializer_list<double> init) : values(init) {}

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::span<const double> view() const noexcept { return values; }

    friend bool operator==(const TaggedVector&, const TaggedVector&) = default;
};

/// Controller genotype; every component lives in [0, 1].
using PolicyParams = TaggedVector<struct PolicyTag>;
/// Behaviour summary, normalized to [0, 1] per dimension.
using SkillDescriptor = TaggedVector<struct DescriptorTag>;
using State = TaggedVector<struct StateTag>;
using Action = TaggedVector<struct ActionTag>;

struct Transition {
    State state;
    Action action;
    State next_state;
};

/// states.size() == actions.size() + 1 == rewards.size() + 1
struct Trajectory {
    std::vector<State> states;
    std::vector<Action> actions;
    std::vector<double> rewards;

    std::size_t steps() const noexcept { return actions.size(); }
    void check() const;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Clamp every component into [0, 1]. Throws NumericError on non-finite input.
PolicyParams clamp_genotype(const PolicyParams& p);

void require_finite(std::span<const double> v, const char* what);

/// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

} // namespace daqd
