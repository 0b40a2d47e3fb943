#include "cli/report.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"

namespace taskagg::cli {
namespace {

std::string display(const Cell& c) {
    switch (c.kind) {
        case Cell::Kind::text:
            return c.text;
        case Cell::Kind::number:
            return fixed(c.number, c.decimals);
        case Cell::Kind::interval:
            return fmt::format("{} ({}, {})", fixed(c.interval.point, c.decimals), fixed(c.interval.lower, c.decimals),
                               fixed(c.interval.upper, c.decimals));
    }
    return {};
}

std::string md_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '|') out += '\\';
        out += ch;
    }
    return out;
}

std::string raw(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.6f}", v);
}

}  // namespace

std::string fixed(double v, int decimals) {
    std::string s = fmt::format("{:.{}f}", v, decimals);
    if (!s.empty() && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

void write_markdown(const Document& doc, std::ostream& out) {
    out << "# taskagg " << doc.command << "\n\n";
    if (!doc.settings.empty()) {
        out << "Settings: ";
        for (std::size_t k = 0; k < doc.settings.size(); ++k) {
            if (k) out << ", ";
            out << doc.settings[k].first << " = " << doc.settings[k].second;
        }
        out << "\n\n";
    }
    for (const auto& t : doc.tables) {
        out << "## " << t.title << "\n\n|";
        for (const auto& c : t.columns) out << ' ' << md_escape(c) << " |";
        out << "\n|";
        for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k == 0 ? " --- |" : " ---: |");
        out << '\n';
        for (const auto& row : t.rows) {
            out << '|';
            for (const auto& cell : row) out << ' ' << md_escape(display(cell)) << " |";
            out << '\n';
        }
        out << '\n';
        for (const auto& n : t.notes) out << n << "\n\n";
    }
    for (const auto& m : doc.messages) out << m << '\n';
}

void write_csv(const Table& table, std::ostream& out) {
    // Interval columns expand to point, lower and upper.
    std::vector<bool> interval(table.columns.size(), false);
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k].kind == Cell::Kind::interval) interval[k] = true;
        }
    }
    std::vector<std::string> header;
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
        header.push_back(table.columns[k]);
        if (interval[k]) {
            header.push_back(table.columns[k] + " lower");
            header.push_back(table.columns[k] + " upper");
        }
    }
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << detail::csv_escape(header[k]);
    out << '\n';
    for (const auto& row : table.rows) {
        std::vector<std::string> fields;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const auto& c = row[k];
            switch (c.kind) {
                case Cell::Kind::text: fields.push_back(c.text); break;
                case Cell::Kind::number: fields.push_back(raw(c.number)); break;
                case Cell::Kind::interval:
                    fields.push_back(raw(c.interval.point));
                    fields.push_back(raw(c.interval.lower));
                    fields.push_back(raw(c.interval.upper));
                    continue;
            }
            if (interval[k]) {
                fields.emplace_back();
                fields.emplace_back();
            }
        }
        for (std::size_t k = 0; k < fields.size(); ++k) out << (k ? "," : "") << detail::csv_escape(fields[k]);
        out << '\n';
    }
}

void write_json(const Document& doc, std::ostream& out) {
    using json = nlohmann::ordered_json;
    json root;
    root["command"] = doc.command;
    json settings = json::object();
    for (const auto& [k, v] : doc.settings) settings[k] = v;
    root["settings"] = settings;
    json tables = json::array();
    for (const auto& t : doc.tables) {
        json jt;
        jt["id"] = t.id;
        jt["title"] = t.title;
        jt["columns"] = t.columns;
        json rows = json::array();
        for (const auto& row : t.rows) {
            json jr = json::object();
            for (std::size_t k = 0; k < row.size() && k < t.columns.size(); ++k) {
                const auto& c = row[k];
                switch (c.kind) {
                    case Cell::Kind::text: jr[t.columns[k]] = c.text; break;
                    case Cell::Kind::number:
                        jr[t.columns[k]] = std::isfinite(c.number) ? json(c.number) : json(raw(c.number));
                        break;
                    case Cell::Kind::interval:
                        jr[t.columns[k]] = json{{"point", c.interval.point},
                                                {"lower", c.interval.lower},
                                                {"upper", c.interval.upper},
                                                {"level", c.interval.level},
                                                {"method", std::string(to_string(c.interval.method))}};
                        break;
                }
            }
            rows.push_back(std::move(jr));
        }
        jt["rows"] = std::move(rows);
        jt["notes"] = t.notes;
        tables.push_back(std::move(jt));
    }
    root["tables"] = std::move(tables);
    root["messages"] = doc.messages;
    out << root.dump(2) << '\n';
}

}  // namespace taskagg::cli
