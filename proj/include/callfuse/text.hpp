#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse {

/// RFC 4180 table: first record is the header. Quoted fields may contain
/// commas, doubled quotes and newlines. A trailing newline is optional.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based physical line on which each row starts.
    std::vector<std::size_t> row_lines;

    std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);
/// Fixed-point with `digits` decimals (used for human-facing reports).
std::string format_fixed(double value, int digits);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char separator);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace callfuse
