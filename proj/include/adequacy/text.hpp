#pragma once

// Small CSV and number-formatting helpers shared by the file readers and
// writers. Numbers are written in shortest round-trip form.

#include <adequacy/errors.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace adequacy::text {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string format(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::string format(std::int64_t v) { return std::to_string(v); }
inline std::string format(std::size_t v) { return std::to_string(v); }
inline std::string format(int v) { return std::to_string(v); }

/// A parsed CSV file: header columns plus data rows. Each row carries its
/// 1-based data-row number (header excluded) and its physical line number.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    struct Row {
        std::size_t number = 0;
        std::size_t line = 0;
        std::vector<std::string> fields;
    };
    std::vector<Row> rows;

    /// Column index, or -1 when absent.
    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(std::string_view name) const {
        const int c = column(name);
        if (c < 0) throw ValidationError(source + ": missing column '" + std::string(name) + "'");
        return c;
    }

    [[noreturn]] void fail(const Row& row, const std::string& msg) const {
        throw ValidationError(source + ": row " + std::to_string(row.number) + " (line " + std::to_string(row.line) + "): " + msg);
    }

    double number(const Row& row, int col) const {
        const std::string& s = row.fields.at(static_cast<std::size_t>(col));
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
            fail(row, "column '" + header[static_cast<std::size_t>(col)] + "' is not a finite number: '" + s + "'");
        return v;
    }

    std::int64_t integer(const Row& row, int col) const {
        const std::string& s = row.fields.at(static_cast<std::size_t>(col));
        std::int64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail(row, "column '" + header[static_cast<std::size_t>(col)] + "' is not an integer: '" + s + "'");
        return v;
    }
};

inline CsvTable parse_csv(std::istream& in, std::string source) {
    CsvTable t;
    t.source = std::move(source);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (lineno == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        if (trim(view).empty()) continue;
        auto fields = split(view);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        CsvTable::Row row{t.rows.size() + 1, lineno, std::move(fields)};
        if (row.fields.size() != t.header.size())
            t.fail(row, "expected " + std::to_string(t.header.size()) + " fields, found " +
                            std::to_string(row.fields.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return parse_csv(in, path);
}

}  // namespace adequacy::text
