#include "oed/ode.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

namespace oed {
namespace {

std::string format_theta(const ParamVector& theta) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
    os << ')';
    return os.str();
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Fixed-step RK4 over the grid intervals [t_i, t_{i+1}], i < last_index.
/// `rhs(t, z, dz)`; `on_point(i, z)` is called at every grid point 0..last_index.
template <class Rhs, class OnPoint>
void rk4_grid(Rhs&& rhs, std::vector<double> z, const TimeGrid& grid, std::size_t last_index, int substeps,
              OnPoint&& on_point, const ParamVector& theta) {
    const std::size_t dim = z.size();
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    on_point(0, z);
    for (std::size_t i = 0; i < last_index; ++i) {
        const double t0 = grid.point(i);
        const double h = (grid.point(i + 1) - t0) / substeps;
        for (int s = 0; s < substeps; ++s) {
            const double t = t0 + s * h;
            rhs(t, z, k1);
            for (std::size_t j = 0; j < dim; ++j) tmp[j] = z[j] + 0.5 * h * k1[j];
            rhs(t + 0.5 * h, tmp, k2);
            for (std::size_t j = 0; j < dim; ++j) tmp[j] = z[j] + 0.5 * h * k2[j];
            rhs(t + 0.5 * h, tmp, k3);
            for (std::size_t j = 0; j < dim; ++j) tmp[j] = z[j] + h * k3[j];
            rhs(t + h, tmp, k4);
            for (std::size_t j = 0; j < dim; ++j) z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if (!all_finite(z))
            throw NonFiniteState("non-finite state at t = " + std::to_string(grid.point(i + 1)) + " for theta " +
                                 format_theta(theta));
        on_point(i + 1, z);
    }
}

void check_substeps(int substeps) {
    if (substeps < 1) throw ConfigError("substeps must be >= 1");
}

}  // namespace

void SensitivityRecord::validate() const {
    if (blocks.size() != grid.count()) throw ConfigError("sensitivity record size does not match its grid");
    for (const auto& b : blocks) {
        if (b.rows() != blocks.front().rows() || b.cols() != blocks.front().cols())
            throw ConfigError("sensitivity blocks have inconsistent shapes");
        if (!b.allFinite()) throw ConfigError("sensitivity record contains non-finite entries");
    }
}

void DynamicalModel::validate() const {
    if (dim_state == 0 || dim_param == 0) throw ConfigError("model '" + name + "' has zero dimensions");
    if (!vector_field || !jac_state || !jac_param) throw ConfigError("model '" + name + "' is missing callbacks");
    if (static_cast<std::size_t>(initial_state.size()) != dim_state)
        throw ConfigError("model '" + name + "' initial state has wrong length");
    if (observe_indices.empty()) throw ConfigError("model '" + name + "' observes nothing");
    std::vector<bool> seen(dim_state, false);
    for (std::size_t idx : observe_indices) {
        if (idx >= dim_state) throw ConfigError("model '" + name + "' observes out-of-range state");
        if (seen[idx]) throw ConfigError("model '" + name + "' observes a state twice");
        seen[idx] = true;
    }
    if (!param_names.empty() && param_names.size() != dim_param)
        throw ConfigError("model '" + name + "' parameter names do not match dim_param");
}

Trajectory integrate_until(const DynamicalModel& model, const ParamVector& theta, const TimeGrid& grid,
                           std::size_t last_index, int substeps) {
    check_params(theta, model.dim_param);
    check_substeps(substeps);
    if (last_index >= grid.count()) throw std::out_of_range("integrate_until: last_index beyond grid");
    const std::size_t n = model.dim_state;
    const std::span<const double> th(theta.data(), model.dim_param);

    Trajectory traj{grid, Matrix(last_index + 1, n)};
    std::vector<double> x0(model.initial_state.data(), model.initial_state.data() + n);
    auto rhs = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        model.vector_field(x, th, t, dx);
    };
    auto store = [&](std::size_t i, const std::vector<double>& x) {
        for (std::size_t j = 0; j < n; ++j) traj.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[j];
    };
    rk4_grid(rhs, std::move(x0), grid, last_index, substeps, store, theta);
    return traj;
}

Trajectory integrate(const DynamicalModel& model, const ParamVector& theta, const TimeGrid& grid, int substeps) {
    return integrate_until(model, theta, grid, grid.count() - 1, substeps);
}

AugmentedTrajectory integrate_with_sensitivities(const DynamicalModel& model, const ParamVector& theta,
                                                 const TimeGrid& grid, int substeps) {
    check_params(theta, model.dim_param);
    check_substeps(substeps);
    const std::size_t n = model.dim_state;
    const std::size_t m = model.dim_param;
    const std::span<const double> th(theta.data(), m);

    AugmentedTrajectory aug{Trajectory{grid, Matrix(grid.count(), n)}, std::vector<Matrix>(grid.count())};
    std::vector<double> jx(n * n), jp(n * m);

    // z = [X, vec_rowmajor(S)]
    std::vector<double> z0(n + n * m, 0.0);
    for (std::size_t j = 0; j < n; ++j) z0[j] = model.initial_state[static_cast<Eigen::Index>(j)];

    auto rhs = [&](double t, const std::vector<double>& z, std::vector<double>& dz) {
        const std::span<const double> x(z.data(), n);
        model.vector_field(x, th, t, std::span<double>(dz.data(), n));
        model.jac_state(x, th, t, jx);
        model.jac_param(x, th, t, jp);
        const double* s = z.data() + n;
        double* ds = dz.data() + n;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < m; ++c) {
                double acc = jp[r * m + c];
                for (std::size_t k = 0; k < n; ++k) acc += jx[r * n + k] * s[k * m + c];
                ds[r * m + c] = acc;
            }
        }
    };
    auto store = [&](std::size_t i, const std::vector<double>& z) {
        const auto row = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < n; ++j) aug.trajectory.states(row, static_cast<Eigen::Index>(j)) = z[j];
        Matrix s(n, m);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < m; ++c)
                s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = z[n + r * m + c];
        aug.sensitivities[i] = std::move(s);
    };
    rk4_grid(rhs, std::move(z0), grid, grid.count() - 1, substeps, store, theta);
    return aug;
}

ObservationSeries observe(const Trajectory& traj, const DynamicalModel& model) {
    const auto rows = traj.states.rows();
    ObservationSeries series{traj.grid, Matrix(rows, static_cast<Eigen::Index>(model.dim_output())), 0.0};
    for (std::size_t k = 0; k < model.dim_output(); ++k)
        series.values.col(static_cast<Eigen::Index>(k)) =
            traj.states.col(static_cast<Eigen::Index>(model.observe_indices[k]));
    return series;
}

std::pair<ObservationSeries, SensitivityRecord> observe(const AugmentedTrajectory& aug, const DynamicalModel& model) {
    ObservationSeries series = observe(aug.trajectory, model);
    SensitivityRecord record{aug.trajectory.grid, {}};
    record.blocks.reserve(aug.sensitivities.size());
    const auto q = static_cast<Eigen::Index>(model.dim_output());
    for (const Matrix& s : aug.sensitivities) {
        Matrix block(q, s.cols());
        for (Eigen::Index k = 0; k < q; ++k)
            block.row(k) = s.row(static_cast<Eigen::Index>(model.observe_indices[static_cast<std::size_t>(k)]));
        record.blocks.push_back(std::move(block));
    }
    return {std::move(series), std::move(record)};
}

ObservationSeries add_noise(const ObservationSeries& series, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be finite and >= 0");
    ObservationSeries out = series;
    out.noise_sigma = sigma;
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) out.values(i, j) += normal(rng);
    return out;
}

std::vector<Matrix> finite_difference_sensitivity(const DynamicalModel& model, const ParamVector& theta,
                                                  const TimeGrid& grid, double h_rel, int substeps) {
    if (!(h_rel > 0.0) || !std::isfinite(h_rel)) throw ConfigError("finite-difference step h_rel must be > 0");
    check_params(theta, model.dim_param);
    const auto n = static_cast<Eigen::Index>(model.dim_state);
    const auto m = static_cast<Eigen::Index>(model.dim_param);
    std::vector<Matrix> out(grid.count(), Matrix::Zero(n, m));
    for (Eigen::Index j = 0; j < m; ++j) {
        const double h = h_rel * std::max(std::abs(theta[j]), 1.0);
        ParamVector plus = theta, minus = theta;
        plus[j] += h;
        minus[j] -= h;
        const Trajectory up = integrate(model, plus, grid, substeps);
        const Trajectory down = integrate(model, minus, grid, substeps);
        for (std::size_t i = 0; i < grid.count(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            out[i].col(j) = (up.states.row(row) - down.states.row(row)).transpose() / (2.0 * h);
        }
    }
    return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << 't';
    for (Eigen::Index j = 0; j < traj.states.cols(); ++j) out << ",x" << j;
    out << '\n';
    auto put = [&](double v) { out << format_double(v); };
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
        put(traj.grid.point(static_cast<std::size_t>(i)));
        for (Eigen::Index j = 0; j < traj.states.cols(); ++j) {
            out << ',';
            put(traj.states(i, j));
        }
        out << '\n';
    }
}

}  // namespace oed
