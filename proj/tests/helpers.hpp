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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "perivec/perivec.hpp"

namespace testutil {

// Scratch directory unique per test run.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        static std::atomic<int> counter{0};
        dir_ = base / ("perivec_test_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
    std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Upper chi-square quantile via the Wilson-Hilferty approximation; accurate
// to a fraction of a percent for the large dof used here.
inline double chi_square_quantile(double dof, double z_upper) {
    double a = 2.0 / (9.0 * dof);
    double t = 1.0 - a + z_upper * std::sqrt(a);
    return dof * t * t * t;
}

// Dense power-iteration PageRank oracle, independent of the sparse
// implementation. `counts[i][j]` holds citations i -> j.
inline std::vector<double> dense_pagerank(const std::vector<std::vector<double>>& counts,
                                          double damping, std::size_t iterations) {
    const std::size_t n = counts.size();
    std::vector<double> x(n, 1.0 / double(n));
    std::vector<double> row_sum(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) row_sum[i] += counts[i][j];
    for (std::size_t it = 0; it < iterations; ++it) {
        std::vector<double> next(n, 0.0);
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (row_sum[i] == 0.0) dangling += x[i];
        for (std::size_t j = 0; j < n; ++j)
            next[j] = (1.0 - damping + damping * dangling) / double(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (row_sum[i] == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j)
                next[j] += damping * x[i] * counts[i][j] / row_sum[i];
        }
        x.swap(next);
    }
    return x;
}

// Builds a graph where every paper of venue v cites only (earlier) papers.
inline perivec::PaperGraph chain_graph(std::size_t papers, perivec::PeriodicalId venue = 0) {
    std::vector<std::pair<perivec::PaperId, perivec::PeriodicalId>> rows;
    std::vector<std::pair<perivec::PaperId, perivec::PaperId>> edges;
    for (std::size_t i = 0; i < papers; ++i) {
        rows.emplace_back(i, venue);
        if (i > 0) edges.emplace_back(i, i - 1);
    }
    return perivec::PaperGraph::build(rows, edges);
}

// Unit vectors at the given planar angles, as raw store rows.
inline perivec::VectorStore angle_store(const std::vector<std::pair<perivec::PeriodicalId, double>>& angles) {
    std::vector<perivec::PeriodicalId> ids;
    std::vector<double> rows;
    for (const auto& [id, theta] : angles) {
        ids.push_back(id);
        rows.push_back(std::cos(theta));
        rows.push_back(std::sin(theta));
    }
    return perivec::VectorStore::from_rows(std::move(ids), std::move(rows), 2);
}

}  // namespace testutil
