#include "rtopk/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rtopk/errors.hpp"

namespace rtopk {

std::string fmt_num(double x) {
    if (x == 0.0) return "0";  // folds -0 into 0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw SchemaError("csv: missing column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (c >= rows[r].size()) throw SchemaError("csv: short row " + std::to_string(r + 2));
        try {
            out.push_back(std::stod(rows[r][c]));
        } catch (const std::exception&) {
            throw SchemaError("csv: non-numeric value in column '" + name + "'");
        }
    }
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("csv: cannot open " + path);
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("csv: empty file " + path);
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split(line));
    }
    return t;
}

}  // namespace rtopk
