#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortion/config.hpp"
#include "vortion/version.hpp"

// CSV emission with a '#'-prefixed JSON metadata header. One file per run;
// numeric formatting is fixed so identical configs produce byte-identical
// data sections.

namespace vortion {

struct ScanResult {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json metadata;  // resolved config, hash, version, wall time
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
}

inline nlohmann::json scan_metadata(const ExperimentConfig& cfg, const std::string& kind,
                                    double walltime_ms) {
    nlohmann::json meta;
    meta["kind"] = kind;
    meta["version"] = version_string;
    meta["config_hash"] = config_hash(cfg);
    meta["walltime_ms"] = walltime_ms;
    nlohmann::json config;
    for (const auto& [k, v] : cfg.resolved) config[k] = v;
    meta["config"] = config;
    return meta;
}

inline void write_scan(std::ostream& out, const ScanResult& result) {
    out << "# " << result.metadata.dump() << "\n";
    for (std::size_t c = 0; c < result.columns.size(); ++c)
        out << (c ? "," : "") << result.columns[c];
    out << "\n";
    for (const auto& row : result.rows) {
        if (row.size() != result.columns.size())
            throw std::logic_error("scan result: row width differs from column count");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << "\n";
    }
}

inline void write_scan_file(const std::string& path, const ScanResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_scan(out, result);
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
    bool has_column(const std::string& name) const { return column_index(name) >= 0; }
    std::vector<double> column(const std::string& name) const {
        const int idx = column_index(name);
        if (idx < 0) throw std::runtime_error("csv: missing column '" + name + "'");
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[idx]);
        return out;
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool header_done = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(detail::trim(cell));
        if (!header_done) {
            table.columns = cells;
            header_done = true;
            continue;
        }
        if (cells.size() != table.columns.size())
            throw std::runtime_error("csv: line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(table.columns.size()) +
                                     " cells");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                row.push_back(std::stod(c));
            } catch (...) {
                throw std::runtime_error("csv: line " + std::to_string(line_no) +
                                         ": not a number: '" + c + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (!header_done) throw std::runtime_error("csv: empty input");
    return table;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    return read_csv(in);
}

}  // namespace vortion
