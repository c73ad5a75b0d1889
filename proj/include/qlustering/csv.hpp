#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qlustering::csv {

/// Shortest decimal string that round-trips to the same double ('.' decimal).
std::string format_double(double v);

/// Parses a full-string double; accepts Mathematica-style "1.5*^-6".
bool parse_double(std::string_view text, double& out);

/// Quotes a field per RFC 4180 when it contains ',', '"' or a line break.
std::string escape(std::string_view field);

/// Splits one record. Quoted fields may contain commas and doubled quotes;
/// embedded line breaks are not supported.
std::vector<std::string> split(std::string_view line);

std::string join(const std::vector<std::string>& fields);

/// Reads all non-empty records; throws IoError when the file cannot be opened.
std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path);

/// Writes records with CRLF-free '\n' line endings; throws IoError on failure.
void write_file(const std::filesystem::path& path,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace qlustering::csv
