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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace perivec {

// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Structurally inconsistent data (dangling ids, mismatched universes, ...).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters or an unsatisfiable configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An id that is not present in the queried structure.
class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Degenerate geometry or a numerical procedure that failed to converge.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File that cannot be opened or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace perivec
