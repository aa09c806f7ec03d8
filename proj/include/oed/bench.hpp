#pragma once

#include "oed/design.hpp"
#include "oed/estimator.hpp"
#include "oed/grid.hpp"
#include "oed/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace oed {

enum class MethodKind { Random, EOptimalOracle, Eor, ExternalPoints };

const char* method_kind_name(MethodKind kind) noexcept;

/// n distinct grid indices drawn uniformly without replacement, time order.
std::vector<std::size_t> random_points(std::uint64_t seed, std::size_t count, std::size_t n);

struct MethodSpec {
    std::string name;
    MethodKind kind = MethodKind::Random;
    std::vector<std::size_t> points;  ///< fixed grid indices for Eor / ExternalPoints
};

struct BenchConfig {
    BenchConfig(std::string model, ParameterSpace theta_space, TimeGrid time_grid)
        : model_name(std::move(model)), space(std::move(theta_space)), grid(time_grid) {}

    std::string model_name;
    ParameterSpace space;
    TimeGrid grid;
    std::size_t n_points = 5;
    std::size_t n_datasets = 1000;
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;
    EstimatorOptions estimator{};
    DesignOptions design{};
    ErrorMetric metric = ErrorMetric::Euclidean;
    double alpha = 0.05;
    double max_missing_fraction = 0.01;
    int threads = 1;

    void validate() const;
};

struct BenchReport {
    BenchConfig config;
    std::vector<MethodSpec> methods;
    std::vector<ParamVector> truths;
    /// errors[method][dataset]; NaN marks a missing cell (every start failed).
    std::vector<std::vector<double>> errors;
    /// selections[method][dataset]: grid indices used, time order.
    std::vector<std::vector<std::vector<std::size_t>>> selections;
    std::vector<SummaryStats> summary;
    std::vector<TukeyRecord> tukey;
    std::size_t missing_cells = 0;

    /// Non-missing errors of one method, dataset order.
    std::vector<double> observed_errors(std::size_t method) const;
};

/// Simulates n_datasets ground truths, applies every method, estimates θ from
/// each method's points, and compares the errors. Deterministic in the config
/// and seed; the thread count does not affect the result.
BenchReport run_benchmark(const BenchConfig& config, const std::vector<MethodSpec>& methods);

/// Summary statistics and Tukey HSD over the observed errors of a report.
void compute_statistics(BenchReport& report);

/// Writes summary.csv, tukey.csv, errors_long.csv, selections.csv and
/// manifest.txt into `out_dir`. Files already written are removed on failure.
void emit_report(const BenchReport& report, const std::filesystem::path& out_dir);

void write_summary_csv(const std::vector<std::string>& methods, const std::vector<SummaryStats>& stats,
                       std::ostream& out);
void write_tukey_csv(const std::vector<TukeyRecord>& records, std::ostream& out);

}  // namespace oed
