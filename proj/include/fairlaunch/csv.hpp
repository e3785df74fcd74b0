#pragma once

// Small CSV and calendar helpers shared by the loaders and the result
// writers. The file formats here are plain comma-separated numerics, so
// no quoting support is needed.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairlaunch {

/// Load/parse failure that names the offending row and column.
class LoadError : public std::runtime_error {
public:
    LoadError(const std::string& path, long row, const std::string& column,
              const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(row) + " column '" + column +
                             "': " + what),
          row_(row) {}

    long row() const { return row_; }

private:
    long row_;
};

namespace csv {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

inline std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError(path, 0, "-", "cannot open file");
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(split_line(line));
    }
    return rows;
}

inline double parse_double(const std::string& s, const std::string& path, long row,
                           const std::string& column) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw LoadError(path, row, column, "not a number: '" + s + "'");
    }
    return value;
}

inline long parse_long(const std::string& s, const std::string& path, long row,
                       const std::string& column) {
    long value = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw LoadError(path, row, column, "not an integer: '" + s + "'");
    }
    return value;
}

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) {
            break;
        }
    }
    return buf;
}

} // namespace csv

// ---- calendar dates -----------------------------------------------------------
// Proleptic Gregorian day counts (Howard Hinnant's civil algorithms).

namespace dates {

inline long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

inline void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

/// Parses strict "YYYY-MM-DD"; returns days since 1970-01-01.
inline long parse_iso_date(const std::string& s, const std::string& path, long row) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw LoadError(path, row, "date", "expected YYYY-MM-DD, got '" + s + "'");
    }
    const int y = static_cast<int>(csv::parse_long(s.substr(0, 4), path, row, "date"));
    const int m = static_cast<int>(csv::parse_long(s.substr(5, 2), path, row, "date"));
    const int d = static_cast<int>(csv::parse_long(s.substr(8, 2), path, row, "date"));
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw LoadError(path, row, "date", "invalid calendar date '" + s + "'");
    }
    return days_from_civil(y, m, d);
}

inline std::string format_iso_date(long days_since_epoch) {
    int y = 0, m = 0, d = 0;
    civil_from_days(days_since_epoch, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

} // namespace dates

} // namespace fairlaunch
