#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "popowicz/grid.hpp"

namespace popowicz {

/// Formats a double with 17 significant digits (round-trips exactly).
std::string format_number(double value);

/// Writes `x,value` rows after a header line.
void write_field_csv(std::ostream& out, const Field& f);
void write_field_csv(const std::filesystem::path& path, const Field& f);

/// Reads a field CSV. The grid is recovered from the node spacing, which must
/// be uniform and start at x = 0.
Field read_field_csv(std::istream& in);
Field read_field_csv(const std::filesystem::path& path);

/// {grid: {n, period}, values: [...]}
nlohmann::json field_to_json(const Field& f);
Field field_from_json(const nlohmann::json& j);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace popowicz
