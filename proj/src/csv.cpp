#include "csv.hpp"

#include <fstream>
#include <sstream>

#include "taskagg/error.hpp"

namespace taskagg::detail {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& file, std::size_t lineno, const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && trim(cur).empty()) {
            quoted = true;
            was_quoted = true;
            cur.clear();
        } else if (c == ',') {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw ParseError(file, lineno, std::to_string(out.size() + 1), "unterminated quoted field");
    }
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

}  // namespace

CsvDocument read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::usage, "cannot open file: " + path.string());
    CsvDocument doc;
    doc.file = path.string();
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split_line(doc.file, lineno, line);
        if (!have_header) {
            doc.header = std::move(fields);
            doc.header_line = lineno;
            have_header = true;
            continue;
        }
        if (fields.size() != doc.header.size()) {
            throw ParseError(doc.file, lineno, "*",
                             "expected " + std::to_string(doc.header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        doc.records.push_back({lineno, std::move(fields)});
    }
    if (!have_header) throw ParseError(doc.file, 0, "*", "missing header row");
    return doc;
}

std::size_t require_column(const CsvDocument& doc, const std::string& name) {
    for (std::size_t i = 0; i < doc.header.size(); ++i) {
        if (doc.header[i] == name) return i;
    }
    throw ParseError(doc.file, doc.header_line, name, "missing required column '" + name + "'");
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace taskagg::detail
