#pragma once

#include "oed/bench.hpp"
#include "oed/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace oed {

/// Grid indices of a `t` column file (selected_points.csv). Throws GridMismatch
/// for times that are not grid points.
std::vector<std::size_t> read_points_file(const std::filesystem::path& path, const TimeGrid& grid);
void write_points_file(const TimeGrid& grid, const std::vector<std::size_t>& indices,
                       const std::filesystem::path& path);

/// Reads a `t,weight` attention file. Every grid point must appear exactly once.
Vector read_attention(const std::filesystem::path& path, const TimeGrid& grid);

/// Top-n weights, ties broken by the earlier time; returned in time order.
std::vector<std::size_t> select_by_weight(const Vector& weights, std::size_t n);

/// Re-loadable INI echo of a configuration (seed included).
std::string config_ini(const RunConfig& config);

// Each command writes into config.output_dir, including run.ini.
void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_design(const RunConfig& config, std::ostream& log);
void cmd_estimate(const RunConfig& config, std::ostream& log);
void cmd_bench(const RunConfig& config, std::ostream& log);
void cmd_export_train_data(const RunConfig& config, std::ostream& log);
MethodSpec cmd_import_attention(const RunConfig& config, const std::filesystem::path& weights_file,
                                const std::string& method_name, std::ostream& log);

/// Method list for a benchmark: EOR points are designed here, external
/// methods are loaded from their points or attention files.
std::vector<MethodSpec> resolve_methods(const RunConfig& config, std::ostream& log);

}  // namespace oed
