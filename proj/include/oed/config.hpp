#pragma once

#include "oed/bench.hpp"
#include "oed/eor.hpp"
#include "oed/models.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oed {

/// One `[bench] methods` entry: `name:kind`, kind ∈ {eor, random, e-optimal, external}.
struct MethodEntry {
    std::string name;
    MethodKind kind;
};

/// Parsed INI run configuration. Every field is validated at load time.
/// Omitted [space] / [grid] keys fall back to the model's case study.
struct RunConfig {
    explicit RunConfig(const CaseStudy& defaults);

    std::filesystem::path base_dir;  ///< relative paths resolve against this

    // [model]
    std::string model_name;
    // [space]
    ParameterSpace space;
    // [grid]
    TimeGrid grid;
    // [simulation]
    double sigma = 1.0;
    int substeps = kDefaultSubsteps;
    std::optional<ParamVector> theta;  ///< empty = sample from Θ
    // [design]
    std::string design_method = "eor";
    std::optional<ParamVector> design_theta;
    std::size_t draws = 1000;
    std::size_t n_points = 5;
    DesignOptions design{};
    RankAggregation aggregation = RankAggregation::Mean;
    // [estimator]
    std::size_t starts = 20;
    NelderMeadOptions local{};
    ErrorMetric metric = ErrorMetric::Euclidean;
    std::optional<std::filesystem::path> data_file;
    // [bench]
    std::size_t n_datasets = 1000;
    std::vector<MethodEntry> methods;
    double alpha = 0.05;
    double max_missing_fraction = 0.01;
    // [external]: method name -> points or attention file
    std::map<std::string, std::filesystem::path> external;
    // [export]
    std::size_t export_count = 1000;
    bool export_noisy = false;
    // [output]
    std::filesystem::path output_dir = "out";
    // [run]
    std::uint64_t seed = 0;
    int threads = 1;

    std::filesystem::path resolve(const std::filesystem::path& p) const;
    BenchConfig bench_config() const;
    EorConfig eor_config() const;
    EstimatorOptions estimator_options() const;
};

/// Throws ConfigError naming `section.key` for unknown keys or bad values.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Re-checks cross-field invariants (called by the parsers and after CLI overrides).
void validate(const RunConfig& config);

}  // namespace oed
