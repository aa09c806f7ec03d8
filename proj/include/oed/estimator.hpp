#pragma once

#include "oed/ode.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace oed {

/// Observations at a subset of grid points, plus the generating truth when known.
struct Dataset {
    TimeGrid grid;                     ///< candidate grid the sample times come from
    std::vector<std::size_t> indices;  ///< strictly increasing grid indices
    Matrix observations;               ///< one row per index, q columns
    ParamVector truth;                 ///< empty when unknown
    std::string model_name;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    std::vector<double> times() const;
    void validate() const;

    /// Keeps only the listed grid indices (each must be present in `indices`).
    Dataset restrict_to(const std::vector<std::size_t>& keep) const;
};

/// Full-grid dataset from an observation series.
Dataset make_dataset(const ObservationSeries& series, ParamVector truth, std::string model_name,
                     std::uint64_t seed = 0);

/// CSV `t,y1..yq` plus a key-value sidecar manifest (`<path>.manifest`).
void write_dataset(const Dataset& data, const std::filesystem::path& csv_path);
Dataset read_dataset(const std::filesystem::path& csv_path);

/// Σ_i ‖y(t_i) − g(X_θ(t_i))‖², integrating on the dataset's grid up to its
/// last sample time. Returns +∞ if the integration blows up.
double sse_objective(const DynamicalModel& model, const ParamVector& theta, const Dataset& data,
                     int substeps = kDefaultSubsteps);

struct NelderMeadOptions {
    int max_iter = 2000;
    double xtol = 1e-8;  ///< simplex diameter in unit-box coordinates
};

struct NelderMeadResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Nelder–Mead on the unit box [0,1]^m; trial points are projected onto the box.
NelderMeadResult nelder_mead_box(const std::function<double(const Vector&)>& f, Vector start,
                                 const NelderMeadOptions& options = {});

/// Start point k in [0,1]^m: blocks of 20 consecutive starts form a Latin
/// hypercube, so point k never depends on how many starts are requested.
Vector latin_start(std::uint64_t seed, std::size_t k, std::size_t dim);

struct EstimatorOptions {
    std::size_t starts = 20;
    std::uint64_t seed = 0;
    int substeps = kDefaultSubsteps;
    NelderMeadOptions local{};
    int threads = 1;
};

struct EstimationResult {
    ParamVector theta_hat;
    double sse = 0.0;
    std::size_t starts_used = 0;
    bool converged = false;
    int evaluations = 0;
};

/// Bounded multi-start least squares. Throws AllStartsFailed when every start
/// ends at +∞.
EstimationResult least_squares_estimate(const DynamicalModel& model, const ParameterSpace& space,
                                        const Dataset& data, const EstimatorOptions& options = {});

enum class ErrorMetric {
    Euclidean,  ///< ‖θ̂ − θ‖₂
    Relative,   ///< ‖(θ̂ − θ) ⊘ |θ|‖₂
};

double estimation_error(const ParamVector& theta_hat, const ParamVector& truth,
                        ErrorMetric metric = ErrorMetric::Euclidean);

}  // namespace oed
