#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lcp/errors.hpp"
#include "lcp/series.hpp"

namespace lcp {

enum class SeriesKind { prices, returns };

[[nodiscard]] inline std::string to_string(SeriesKind kind) {
    return kind == SeriesKind::prices ? "prices" : "returns";
}

/// One rejected input row with its 1-based line number and the reason.
struct MalformedRow {
    std::int64_t line;
    std::string text;
    std::string reason;
};

struct IngestResult {
    ReturnSeries series;
    std::vector<std::string> dates;  // dates of the return observations
    SeriesKind kind;
    std::vector<MalformedRow> rejected;
};

namespace csv_detail {

inline bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline bool valid_date(const std::string& s, int& y, int& m, int& d) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return false;
    }
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    y = std::stoi(s.substr(0, 4));
    m = std::stoi(s.substr(5, 2));
    d = std::stoi(s.substr(8, 2));
    if (m < 1 || m > 12 || d < 1) {
        return false;
    }
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days[m - 1];
    if (m == 2 && is_leap(y)) {
        dim = 29;
    }
    return d <= dim;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

inline bool parse_value(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == s.size() && std::isfinite(out);
}

}  // namespace csv_detail

/// Reads a two-column CSV (date,value) with a mandatory header row. Dates
/// must be ISO-8601 calendar dates in strictly increasing order. Rows that
/// fail to parse are collected with their line numbers rather than aborting
/// the ingest; date-order violations abort because silently dropping one
/// side of the comparison would hide data corruption.
inline IngestResult ingest_csv(std::istream& in, SeriesKind kind) {
    std::string line;
    std::int64_t line_no = 0;
    // the header is the first line that is neither blank nor a '#' comment
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = csv_detail::trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        have_header = true;
        break;
    }
    if (!have_header) {
        throw DataError("empty input: expected a header row");
    }
    std::vector<std::string> dates;
    std::vector<double> values;
    std::vector<MalformedRow> rejected;
    std::string prev_date;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const std::string trimmed = csv_detail::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            rejected.push_back({line_no, line, "expected exactly two comma-separated fields"});
            continue;
        }
        const std::string date = csv_detail::trim(line.substr(0, comma));
        const std::string val_str = csv_detail::trim(line.substr(comma + 1));
        int y = 0, m = 0, d = 0;
        if (!csv_detail::valid_date(date, y, m, d)) {
            rejected.push_back({line_no, line, "invalid calendar date '" + date + "'"});
            continue;
        }
        double value = 0.0;
        if (!csv_detail::parse_value(val_str, value)) {
            rejected.push_back({line_no, line, "unparseable value '" + val_str + "'"});
            continue;
        }
        if (kind == SeriesKind::prices && !(value > 0.0)) {
            throw DataError("line " + std::to_string(line_no) + ": non-positive price " +
                            val_str);
        }
        if (!prev_date.empty() && !(prev_date < date)) {
            throw DataError("line " + std::to_string(line_no) + ": date '" + date +
                            "' does not increase past '" + prev_date + "'");
        }
        prev_date = date;
        dates.push_back(date);
        values.push_back(value);
    }
    if (kind == SeriesKind::prices) {
        if (values.size() < 2) {
            throw DataError("need at least two valid price rows, got " +
                            std::to_string(values.size()));
        }
        ReturnSeries series = log_returns(values);
        dates.erase(dates.begin());  // return i belongs to the later date
        return IngestResult{std::move(series), std::move(dates), kind, std::move(rejected)};
    }
    if (values.empty()) {
        throw DataError("no valid return rows");
    }
    return IngestResult{ReturnSeries(std::move(values)), std::move(dates), kind,
                        std::move(rejected)};
}

inline IngestResult ingest_csv(const std::filesystem::path& path, SeriesKind kind) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return ingest_csv(in, kind);
}

/// Writes date,return rows with full round-trip precision. Reading the file
/// back with ingest_csv reproduces the series bit for bit.
inline void export_returns_csv(std::ostream& out, const ReturnSeries& series,
                               const std::vector<std::string>& dates) {
    if (dates.size() != static_cast<std::size_t>(series.size())) {
        throw ValueError("date column length " + std::to_string(dates.size()) +
                         " does not match series length " + std::to_string(series.size()));
    }
    out << "date,return\n";
    char buf[64];
    for (std::int64_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", series.ret(i));
        out << dates[static_cast<std::size_t>(i)] << ',' << buf << '\n';
    }
    if (!out) {
        throw IoError("write failed while exporting returns");
    }
}

inline void export_returns_csv(const std::filesystem::path& path, const ReturnSeries& series,
                               const std::vector<std::string>& dates) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    export_returns_csv(out, series, dates);
}

}  // namespace lcp
