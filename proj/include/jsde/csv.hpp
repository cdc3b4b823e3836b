#pragma once

// Deterministic CSV output: fixed column order, shortest round-trip
// float formatting, newline-terminated rows.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "jsde/mark_measure.hpp"

namespace jsde {

inline std::string format_double(double x) {
    char buf[32];
    if (x == std::floor(x) && std::fabs(x) < 1e15) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::fixed, 0);
        return std::string(buf, res.ptr);
    }
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns) : out_(path) {
        if (!out_) throw ConfigError("cannot open CSV output file: " + path);
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_double(values[i]);
        out_ << "\n";
    }

    void row_mixed(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

} // namespace jsde
