#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace taskagg::detail {

struct CsvRecord {
    std::size_t line = 0;  // 1-based line number in the file
    std::vector<std::string> fields;
};

struct CsvDocument {
    std::string file;
    std::size_t header_line = 0;
    std::vector<std::string> header;
    std::vector<CsvRecord> records;
};

/// Minimal RFC-4180 reader: double-quoted fields, '#' comment lines, blank
/// lines skipped, surrounding whitespace trimmed from unquoted fields.
CsvDocument read_csv(const std::filesystem::path& path);

/// Column index of `name` in the header; throws ParseError if absent.
std::size_t require_column(const CsvDocument& doc, const std::string& name);

std::string csv_escape(const std::string& field);

}  // namespace taskagg::detail
