#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace homsim::csv {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);
void append_number(std::string& line, double v);

/// Joins values as one CSV row terminated by '\n'.
std::string row(std::initializer_list<double> values);

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// reader never observes a partially written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace homsim::csv
