//  Copyright 2026 The perivec Authors.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "perivec/error.hpp"

namespace perivec {

inline std::vector<std::string_view> split_fields(std::string_view line, char delim = '\t') {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

inline std::uint64_t parse_u64(std::string_view s, const char* what, std::size_t line_no) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(std::string("invalid ") + what + ": '" + std::string(s) + "'", line_no);
    return value;
}

inline double parse_double(std::string_view s, const char* what, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(std::string("invalid ") + what + ": '" + std::string(s) + "'", line_no);
    return value;
}

// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Line-oriented reader for the tab-separated inputs. Blank lines are skipped;
// a trailing '\r' is stripped so CRLF files load too.
class LineReader {
public:
    explicit LineReader(const std::string& path) : in_(path), path_(path) {
        if (!in_) throw IoError("cannot open file: " + path);
    }

    bool next(std::string_view& line) {
        while (std::getline(in_, buf_)) {
            ++line_no_;
            if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
            if (buf_.empty()) continue;
            line = buf_;
            return true;
        }
        return false;
    }

    std::size_t line_no() const { return line_no_; }
    const std::string& path() const { return path_; }

private:
    std::ifstream in_;
    std::string path_;
    std::string buf_;
    std::size_t line_no_ = 0;
};

}  // namespace perivec
