#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace socnet::csv {

// A header-indexed CSV table. Rows keep their 1-based source line number so
// validation errors can point at the offending line.
struct Table {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    std::optional<std::size_t> column(const std::string& name) const;
    std::size_t require_column(const std::string& name) const;
    std::string where(std::size_t row) const;
};

Table read(const std::filesystem::path& path);
Table parse(const std::string& text, const std::string& source);

std::vector<std::string> split_line(const std::string& line);
std::string escape(const std::string& field);
// Shortest round-trip decimal form; NaN prints as an empty field.
std::string format_number(double v);

// Strict numeric field parsing; throws DataError naming file:line.
double parse_double(const Table& t, std::size_t row, std::size_t col);
long parse_int(const Table& t, std::size_t row, std::size_t col);
bool parse_flag(const Table& t, std::size_t row, std::size_t col);

} // namespace socnet::csv
