#pragma once
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatterlab::io {

inline constexpr const char* csv_version_line = "# scatterlab-csv v1";

/// Fixed %.12g formatting; identical inputs give byte-identical files.
inline std::string format_number(double x) {
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// One CSV cell: a number, or text (empty text for blank cells).
struct Cell {
    Cell(double v) : text(format_number(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long v) : text(std::to_string(v)) {}
    Cell(std::size_t v) : text(std::to_string(v)) {}
    Cell(std::string s) : text(std::move(s)) {}
    Cell(const char* s) : text(s) {}
    std::string text;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
        if (!out_)
            throw std::runtime_error("cannot open " + path + " for writing");
        out_ << csv_version_line << '\n';
        row_strings(columns);
    }

    void row(const std::vector<Cell>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i].text;
        out_ << '\n';
    }

private:
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    std::ofstream out_;
};

} // namespace scatterlab::io
