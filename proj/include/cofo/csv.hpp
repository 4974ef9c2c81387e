#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/matrices.hpp"
#include "cofo/training.hpp"
#include "cofo/window.hpp"

namespace cofo {

namespace csv {

inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// Writer with the metadata comment line up front.
class Writer {
public:
    Writer(const std::filesystem::path& path, const ArtifactMeta& meta) {
        out_.open(path);
        if (!out_) throw ConfigError("cannot write " + path.string());
        out_ << meta.comment() << '\n';
    }

    void row(std::span<const std::string> fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << escape(fields[i]);
        }
        out_ << '\n';
    }
    void row(std::initializer_list<std::string> fields) {
        row(std::span<const std::string>(fields.begin(), fields.size()));
    }

private:
    std::ofstream out_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

/// Read a CSV artifact, skipping '#' comment lines. The first data line is
/// the header.
inline Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path.string());
    Table table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_line(line);
        if (table.header.empty())
            table.header = std::move(fields);
        else
            table.rows.push_back(std::move(fields));
    }
    if (table.header.empty())
        throw ParseError(path.string() + ": no header row");
    return table;
}

inline double to_double(const std::string& s, const std::string& context) {
    try {
        return std::stod(s);
    } catch (...) {
        throw ParseError(context + ": bad number '" + s + "'");
    }
}

inline long to_long(const std::string& s, const std::string& context) {
    try {
        return std::stol(s);
    } catch (...) {
        throw ParseError(context + ": bad integer '" + s + "'");
    }
}

}  // namespace csv

// ---------------------------------------------------------------------------
// Matrix round trips. Layout: first column the group index under a
// "label/interval" corner header, one column per interval year; empty cells
// mark undefined entries.

inline void write_mean_matrix(const std::filesystem::path& values_path,
                              const std::filesystem::path& counts_path,
                              const GroupMeanMatrix& matrix, const WindowSpec& w,
                              const ArtifactMeta& meta) {
    csv::Writer values(values_path, meta);
    csv::Writer counts(counts_path, meta);
    std::vector<std::string> header{matrix.row_label() + "/j"};
    for (int j = 1; j <= matrix.cols(); ++j)
        header.push_back(std::to_string(w.year(j)));
    values.row(header);
    counts.row(header);
    for (int g = 1; g <= matrix.rows(); ++g) {
        std::vector<std::string> vrow{std::to_string(g)}, crow{std::to_string(g)};
        for (int j = 1; j <= matrix.cols(); ++j) {
            vrow.push_back(matrix.defined(g, j) ? format_double(matrix.value(g, j))
                                                : std::string());
            crow.push_back(std::to_string(matrix.count(g, j)));
        }
        values.row(vrow);
        counts.row(crow);
    }
}

inline GroupMeanMatrix read_mean_matrix(const std::filesystem::path& values_path,
                                        const std::filesystem::path& counts_path,
                                        const std::string& row_label) {
    const csv::Table values = csv::read(values_path);
    const csv::Table counts = csv::read(counts_path);
    const int cols = static_cast<int>(values.header.size()) - 1;
    const int rows = static_cast<int>(values.rows.size());
    if (rows < 1 || cols < 1)
        throw ParseError(values_path.string() + ": empty matrix");
    GroupMeanMatrix matrix(rows, cols, row_label);
    for (int g = 0; g < rows; ++g) {
        const auto& vrow = values.rows[static_cast<std::size_t>(g)];
        const auto& crow = counts.rows[static_cast<std::size_t>(g)];
        for (int j = 0; j < cols; ++j) {
            const std::string& cell = vrow.at(static_cast<std::size_t>(j) + 1);
            const long n =
                csv::to_long(crow.at(static_cast<std::size_t>(j) + 1), "counts");
            if (n <= 0 || cell.empty()) continue;
            const double mean = csv::to_double(cell, "matrix value");
            matrix.restore(g + 1, j + 1, mean, n);
        }
    }
    return matrix;
}

inline void write_rate_grid(const std::filesystem::path& path, const Grid<double>& grid,
                            const std::string& row_label, const WindowSpec& w,
                            const ArtifactMeta& meta) {
    csv::Writer out(path, meta);
    std::vector<std::string> header{row_label + "/j"};
    for (int j = 1; j <= grid.cols(); ++j) header.push_back(std::to_string(w.year(j)));
    out.row(header);
    for (int r = 0; r < grid.rows(); ++r) {
        std::vector<std::string> row{std::to_string(r + 1)};
        for (int j = 0; j < grid.cols(); ++j) row.push_back(format_double(grid(r, j)));
        out.row(row);
    }
}

inline Grid<double> read_rate_grid(const std::filesystem::path& path) {
    const csv::Table table = csv::read(path);
    const int cols = static_cast<int>(table.header.size()) - 1;
    const int rows = static_cast<int>(table.rows.size());
    if (rows < 1 || cols < 1) throw ParseError(path.string() + ": empty grid");
    Grid<double> grid(rows, cols, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int j = 0; j < cols; ++j)
            grid(r, j) = csv::to_double(
                table.rows[static_cast<std::size_t>(r)].at(static_cast<std::size_t>(j) + 1),
                path.string());
    return grid;
}

inline void write_provenance_grid(const std::filesystem::path& path,
                                  const Grid<CellSource>& grid, const WindowSpec& w,
                                  const ArtifactMeta& meta) {
    csv::Writer out(path, meta);
    std::vector<std::string> header{"i/j"};
    for (int j = 1; j <= grid.cols(); ++j) header.push_back(std::to_string(w.year(j)));
    out.row(header);
    for (int r = 0; r < grid.rows(); ++r) {
        std::vector<std::string> row{std::to_string(r + 1)};
        for (int j = 0; j < grid.cols(); ++j)
            row.push_back(std::string(1, to_char(grid(r, j))));
        out.row(row);
    }
}

}  // namespace cofo
