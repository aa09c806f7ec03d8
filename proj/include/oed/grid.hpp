#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

namespace oed {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Model parameters θ. Length must match the owning model's parameter count.
using ParamVector = Eigen::VectorXd;

/// Equally spaced candidate sampling times t_i = t_start + i·(t_end − t_start)/(count − 1).
class TimeGrid {
public:
    TimeGrid(double t_start, double t_end, std::size_t count);

    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    std::size_t count() const noexcept { return count_; }
    double step() const noexcept { return (t_end_ - t_start_) / static_cast<double>(count_ - 1); }

    double point(std::size_t i) const;
    std::vector<double> points() const;

    /// Index of the grid point within `tol` of t, if any.
    std::optional<std::size_t> index_of(double t, double tol = 1e-9) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_start_;
    double t_end_;
    std::size_t count_;
};

/// Axis-aligned parameter box Θ = Π [lower_i, upper_i], finite and non-degenerate.
class ParameterSpace {
public:
    ParameterSpace(Vector lower, Vector upper);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(lower_.size()); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }
    Vector width() const { return upper_ - lower_; }
    Vector center() const { return 0.5 * (lower_ + upper_); }

    bool contains(const Vector& theta) const;
    Vector clamp(const Vector& theta) const;

    /// Independent uniform draw per coordinate.
    Vector sample(std::mt19937_64& rng) const;

    /// Maps u ∈ [0,1]^m onto the box.
    Vector from_unit(const Vector& u) const;
    Vector to_unit(const Vector& theta) const;

private:
    Vector lower_;
    Vector upper_;
};

/// Throws ConfigError unless theta has length m and finite entries.
void check_params(const ParamVector& theta, std::size_t m);

}  // namespace oed
