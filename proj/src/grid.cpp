#include "oed/grid.hpp"

#include "oed/errors.hpp"

#include <cmath>
#include <string>

namespace oed {

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t count)
    : t_start_(t_start), t_end_(t_end), count_(count) {
    if (count < 2) throw ConfigError("time grid needs at least 2 points, got " + std::to_string(count));
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_start < t_end))
        throw ConfigError("time grid requires finite t_start < t_end");
}

double TimeGrid::point(std::size_t i) const {
    if (i >= count_) throw std::out_of_range("time grid index " + std::to_string(i));
    if (i == count_ - 1) return t_end_;
    return t_start_ + static_cast<double>(i) * (t_end_ - t_start_) / static_cast<double>(count_ - 1);
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> out(count_);
    for (std::size_t i = 0; i < count_; ++i) out[i] = point(i);
    return out;
}

std::optional<std::size_t> TimeGrid::index_of(double t, double tol) const {
    const double pos = (t - t_start_) / step();
    const double nearest = std::round(pos);
    if (nearest < 0 || nearest > static_cast<double>(count_ - 1)) return std::nullopt;
    const auto i = static_cast<std::size_t>(nearest);
    if (std::abs(point(i) - t) > tol) return std::nullopt;
    return i;
}

ParameterSpace::ParameterSpace(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0)
        throw ConfigError("parameter space bounds must be non-empty and of equal length");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
            throw ConfigError("parameter space bound " + std::to_string(i) + " is not finite");
        if (!(lower_[i] < upper_[i]))
            throw ConfigError("parameter space bound " + std::to_string(i) + ": lower must be < upper");
    }
}

bool ParameterSpace::contains(const Vector& theta) const {
    if (theta.size() != lower_.size()) return false;
    return (theta.array() >= lower_.array()).all() && (theta.array() <= upper_.array()).all();
}

Vector ParameterSpace::clamp(const Vector& theta) const {
    return theta.cwiseMax(lower_).cwiseMin(upper_);
}

Vector ParameterSpace::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector u(lower_.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unit(rng);
    return from_unit(u);
}

Vector ParameterSpace::from_unit(const Vector& u) const {
    return lower_ + u.cwiseProduct(upper_ - lower_);
}

Vector ParameterSpace::to_unit(const Vector& theta) const {
    return (theta - lower_).cwiseQuotient(upper_ - lower_);
}

void check_params(const ParamVector& theta, std::size_t m) {
    if (static_cast<std::size_t>(theta.size()) != m)
        throw ConfigError("parameter vector has length " + std::to_string(theta.size()) + ", model expects " +
                          std::to_string(m));
    if (!theta.allFinite()) throw ConfigError("parameter vector has non-finite entries");
}

}  // namespace oed
