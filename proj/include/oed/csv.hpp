#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace oed {

/// Shortest round-trippable form at 17 significant digits (printf "%.17g").
std::string format_double(double v);

/// Parses a full token as a double; throws ConfigError naming `context`.
double parse_double(std::string_view token, std::string_view context);

std::vector<std::string> split_fields(std::string_view line, char sep = ',');

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index for a header name; throws ConfigError if absent.
    std::size_t column(std::string_view name) const;
};

/// Reads a comma-separated file. `has_header = false` leaves `header` empty.
/// Throws IoError if the file cannot be read, ConfigError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path, bool has_header = true);

/// Opens a file for writing or throws IoError with the path.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace oed
