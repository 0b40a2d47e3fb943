#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "taskagg/stats.hpp"

namespace taskagg::cli {

struct Cell {
    enum class Kind { text, number, interval };
    Kind kind = Kind::text;
    std::string text;
    double number = 0.0;
    IntervalEstimate interval;
    int decimals = 1;

    static Cell of_text(std::string s) {
        Cell c;
        c.text = std::move(s);
        return c;
    }
    static Cell of_number(double v, int decimals) {
        Cell c;
        c.kind = Kind::number;
        c.number = v;
        c.decimals = decimals;
        return c;
    }
    static Cell of_interval(const IntervalEstimate& e, int decimals) {
        Cell c;
        c.kind = Kind::interval;
        c.interval = e;
        c.decimals = decimals;
        return c;
    }
};

struct Table {
    std::string id;     ///< file stem for CSV output
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> notes;
};

struct Document {
    std::string command;
    std::vector<std::pair<std::string, std::string>> settings;
    std::vector<Table> tables;
    std::vector<std::string> messages;  ///< warnings and check results
};

/// Fixed-point text without a "-0.0" artefact.
std::string fixed(double v, int decimals);

void write_markdown(const Document& doc, std::ostream& out);
void write_csv(const Table& table, std::ostream& out);
void write_json(const Document& doc, std::ostream& out);

}  // namespace taskagg::cli
