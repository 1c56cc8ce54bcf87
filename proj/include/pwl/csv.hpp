#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pwl {

namespace csv {

using Row = std::vector<std::string>;

/// RFC 4180 records: comma separated, double-quoted fields may contain
/// commas, quotes ("") and line breaks; CRLF or LF line endings. A
/// trailing newline does not produce an empty record. A UTF-8 byte order
/// mark at the start is skipped.
std::vector<Row> parse(std::string_view text);

/// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const Row& fields);

}  // namespace csv

/// Shortest decimal text that reads back to the same double.
std::string format_exact(double value);
/// `digits` significant digits, %g style.
std::string format_significant(double value, int digits);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failed write never leaves a partial artifact. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace pwl
