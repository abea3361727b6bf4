#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "nldisp/error.hpp"

namespace nldisp::io {

/// 17 significant digits, so a value survives a text round trip. NaN becomes an empty field.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Accumulates a CSV document in memory; LF line endings.
class CsvWriter {
public:
    void row(const std::vector<std::string>& fields) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k > 0) text_ += ',';
            text_ += csv_field(fields[k]);
        }
        text_ += '\n';
    }

    void row(std::initializer_list<std::string> fields) { row(std::vector<std::string>(fields)); }

    const std::string& str() const noexcept { return text_; }

private:
    std::string text_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed for " + path);
}

}  // namespace nldisp::io
