#pragma once

#include <string>
#include <vector>

namespace rtopk {

// Shortest-stable decimal text for CSV output ("%.12g"); locale independent.
std::string fmt_num(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or throws SchemaError.
    std::size_t column(const std::string& name) const;
    std::vector<double> numeric_column(const std::string& name) const;
};

// Reads a simple comma-separated file with a header row (no quoting).
CsvTable read_csv(const std::string& path);

}  // namespace rtopk
