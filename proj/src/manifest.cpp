#include "oed/manifest.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"

#include <fstream>
#include <sstream>

namespace oed {

void Manifest::set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

void Manifest::set(std::string key, double value) { set(std::move(key), format_double(value)); }

void Manifest::set(std::string key, const Vector& values) { set(std::move(key), format_vector(values)); }

std::optional<std::string> Manifest::get(std::string_view key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

const std::string& Manifest::require(std::string_view key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw ConfigError("manifest is missing key '" + std::string(key) + "'");
}

std::string Manifest::str() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
    return os.str();
}

void Manifest::write(const std::filesystem::path& path) const {
    auto out = open_output(path);
    out << str();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Manifest Manifest::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    Manifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto fields = split_fields(line.substr(0, eq), '\n');
        std::string key = fields.front();
        std::string value = split_fields(line.substr(eq + 1), '\n').front();
        m.set(std::move(key), std::move(value));
    }
    return m;
}

std::string format_vector(const Vector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

Vector parse_vector(std::string_view text, std::string_view context) {
    const auto fields = split_fields(text, ',');
    if (fields.size() == 1 && fields.front().empty()) return Vector();
    Vector v(static_cast<Eigen::Index>(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(fields[i], context);
    return v;
}

}  // namespace oed
