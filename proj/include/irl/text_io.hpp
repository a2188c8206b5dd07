#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace irl::text_io {

// Shortest decimal that round-trips; used by all CSV writers.
std::string format_double(double value);
// Fixed 17 significant digits (dataset files).
std::string format_double17(double value);

double parse_double(std::string_view field);
long long parse_int(std::string_view field);

std::vector<std::string> split_csv_line(std::string_view line);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// Writes through a temporary sibling and renames, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace irl::text_io
