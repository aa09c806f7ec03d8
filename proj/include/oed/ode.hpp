#pragma once

#include "oed/grid.hpp"
#include "oed/sensitivity.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oed {

/// dX/dt = f(X, θ, t), written into `dxdt`.
using VectorField =
    std::function<void(std::span<const double> x, std::span<const double> theta, double t, std::span<double> dxdt)>;

/// A Jacobian of the vector field, written row-major into `out`
/// (n×n for ∂f/∂X, n×m for ∂f/∂θ).
using JacobianFn =
    std::function<void(std::span<const double> x, std::span<const double> theta, double t, std::span<double> out)>;

/// An ODE system with analytic Jacobians and a coordinate-projection observation map.
struct DynamicalModel {
    std::string name;
    std::size_t dim_state = 0;
    std::size_t dim_param = 0;
    VectorField vector_field;
    JacobianFn jac_state;
    JacobianFn jac_param;
    std::vector<std::size_t> observe_indices;
    Vector initial_state;
    std::vector<std::string> param_names;

    std::size_t dim_output() const noexcept { return observe_indices.size(); }

    /// Structural checks (dimensions, observation indices, callbacks present).
    void validate() const;
};

struct Trajectory {
    TimeGrid grid;
    Matrix states;  ///< row i = X(t_i)
};

struct AugmentedTrajectory {
    Trajectory trajectory;
    std::vector<Matrix> sensitivities;  ///< S(t_i) = ∂X(t_i)/∂θ, n×m each
};

struct ObservationSeries {
    TimeGrid grid;
    Matrix values;  ///< N×q
    double noise_sigma = 0.0;
};

inline constexpr int kDefaultSubsteps = 10;

/// Classical RK4 with `substeps` equal steps per grid interval. Throws
/// NonFiniteState if the state leaves the finite range.
Trajectory integrate(const DynamicalModel& model, const ParamVector& theta, const TimeGrid& grid,
                     int substeps = kDefaultSubsteps);

/// As `integrate`, stopping at grid index `last_index` (rows beyond it are absent).
Trajectory integrate_until(const DynamicalModel& model, const ParamVector& theta, const TimeGrid& grid,
                           std::size_t last_index, int substeps = kDefaultSubsteps);

/// Integrates the state together with the forward sensitivities dS/dt = J S + P, S(t_0) = 0.
AugmentedTrajectory integrate_with_sensitivities(const DynamicalModel& model, const ParamVector& theta,
                                                 const TimeGrid& grid, int substeps = kDefaultSubsteps);

/// Restricts states and sensitivities to the model's observed coordinates.
std::pair<ObservationSeries, SensitivityRecord> observe(const AugmentedTrajectory& aug, const DynamicalModel& model);
ObservationSeries observe(const Trajectory& traj, const DynamicalModel& model);

/// Adds i.i.d. N(0, sigma²) noise; deterministic in `seed`.
ObservationSeries add_noise(const ObservationSeries& series, double sigma, std::uint64_t seed);

/// Central-difference ∂X(t_i)/∂θ with step h_j = h_rel·max(|θ_j|, 1). Test oracle for
/// `integrate_with_sensitivities`.
std::vector<Matrix> finite_difference_sensitivity(const DynamicalModel& model, const ParamVector& theta,
                                                  const TimeGrid& grid, double h_rel,
                                                  int substeps = kDefaultSubsteps);

/// CSV with header `t,x0,...,x{n-1}`, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace oed
