#ifndef PCS_CSV_HPP
#define PCS_CSV_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcs {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericCsv {
    Eigen::MatrixXd values;
    bool had_header = false;
    std::vector<std::string> header;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

}  // namespace detail

// Comma-separated numeric file with an optional header row (detected by a
// non-numeric first row). Errors carry 1-based row/column locations.
inline NumericCsv read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    NumericCsv result;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        std::vector<double> vals(fields.size());
        bool numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!detail::parse_double(fields[c], vals[c])) {
                numeric = false;
                bad_col = c + 1;
                break;
            }
        }
        if (!numeric) {
            if (rows.empty() && !result.had_header) {
                result.had_header = true;
                result.header = fields;
                width = fields.size();
                continue;
            }
            throw CsvError("non-numeric cell at row " + std::to_string(lineno) +
                           ", column " + std::to_string(bad_col) + " of " + path);
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            throw CsvError("ragged row " + std::to_string(lineno) + " in " + path +
                           ": expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()));
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw CsvError("no data rows in " + path);

    result.values.resize(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            result.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
        }
    }
    return result;
}

// 17 significant digits round-trips doubles exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CsvError("cannot write " + tmp);
        out << content;
        if (!out) throw CsvError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace pcs

#endif
