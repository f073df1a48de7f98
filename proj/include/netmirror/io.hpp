#pragma once

#include <string>
#include <vector>

namespace netmirror {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_number(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Parses a comma-separated table with a header row and numeric cells.
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");
CsvTable read_csv(const std::string& path);

/// Hex SHA-256 digest.
std::string sha256_hex(const std::string& content);

}  // namespace netmirror
