#pragma once

#include "oed/grid.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oed {

/// Ordered `key = value` text records used for run manifests and dataset sidecars.
class Manifest {
public:
    void set(std::string key, std::string value);
    void set(std::string key, double value);
    void set(std::string key, const Vector& values);

    std::optional<std::string> get(std::string_view key) const;
    /// Throws ConfigError naming the key if it is absent.
    const std::string& require(std::string_view key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

    std::string str() const;
    void write(const std::filesystem::path& path) const;
    static Manifest read(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// "a, b, c" with 17 significant digits.
std::string format_vector(const Vector& v);
Vector parse_vector(std::string_view text, std::string_view context);

}  // namespace oed
