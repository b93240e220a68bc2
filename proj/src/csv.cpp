#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace silc::csv {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_int(long long v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Writer::Writer(std::vector<std::string> header) : header_(std::move(header)) {}

void Writer::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(cells));
}

void Writer::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("csv: cannot open " + path + " for writing");
    for (size_t i = 0; i < header_.size(); ++i) {
        if (i) out << ',';
        out << header_[i];
    }
    out << '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("csv: write to " + path + " failed");
}

namespace {

double parse_cell(const std::string& cell) {
    if (cell == "nan" || cell.empty())
        return std::nan("");
    if (cell == "inf") return HUGE_VAL;
    if (cell == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        return std::nan("");
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

Table read_numeric(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("csv: cannot open " + path);
    Table table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("csv: " + path + " is empty");
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw std::runtime_error("csv: ragged row in " + path);
        std::vector<double> row(cells.size());
        for (size_t i = 0; i < cells.size(); ++i) row[i] = parse_cell(cells[i]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace silc::csv
