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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "perivec/corpus.hpp"
#include "perivec/error.hpp"
#include "perivec/tsv.hpp"

namespace perivec {

// Periodical-level citation counts aggregated from the paper graph. Rows and
// columns are kept as sorted sparse adjacency so both citation directions are
// cheap to read. Within-periodical citations stay on the diagonal.
class PeriodicalCitationMatrix {
public:
    using Entry = std::pair<std::uint32_t, std::uint64_t>;  // (dense index, count)

    // Parallel reduce over the paper edges with per-worker tallies merged once.
    static PeriodicalCitationMatrix build(const PaperGraph& g, unsigned workers = 1) {
        if (workers < 1) workers = 1;
        PeriodicalCitationMatrix m;
        m.ids_ = g.periodical_ids();
        for (std::size_t i = 0; i < m.ids_.size(); ++i)
            m.index_.emplace(m.ids_[i], static_cast<std::uint32_t>(i));

        const std::size_t n_papers = g.paper_count();
        std::vector<std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t>> tallies(workers);
        auto run_worker = [&](unsigned w) {
            auto& tally = tallies[w];
            std::size_t lo = n_papers * w / workers;
            std::size_t hi = n_papers * (w + 1) / workers;
            for (std::size_t p = lo; p < hi; ++p) {
                std::uint32_t src = g.venue_index(static_cast<std::uint32_t>(p));
                for (std::uint32_t cited : g.out_edges(static_cast<std::uint32_t>(p)))
                    ++tally[{src, g.venue_index(cited)}];
            }
        };
        if (workers == 1) {
            run_worker(0);
        } else {
            std::vector<std::thread> threads;
            for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
            for (auto& t : threads) t.join();
        }
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> merged;
        for (auto& tally : tallies)
            for (const auto& [key, count] : tally) merged[key] += count;

        m.assign_entries(merged);
        return m;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write matrix file: " + path);
        // coordinate format sorted by (i, j), external ids
        std::vector<std::pair<PeriodicalId, std::size_t>> order(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) order[i] = {ids_[i], i};
        std::sort(order.begin(), order.end());
        for (const auto& [id, row] : order) {
            std::vector<std::pair<PeriodicalId, std::uint64_t>> cols;
            cols.reserve(rows_[row].size());
            for (const auto& [j, c] : rows_[row]) cols.emplace_back(ids_[j], c);
            std::sort(cols.begin(), cols.end());
            for (const auto& [jid, c] : cols) out << id << '\t' << jid << '\t' << c << '\n';
        }
    }

    std::size_t size() const { return ids_.size(); }
    const std::vector<PeriodicalId>& ids() const { return ids_; }
    std::uint64_t total() const { return total_; }

    bool contains(PeriodicalId id) const { return index_.contains(id); }
    std::uint32_t index_of(PeriodicalId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw LookupError("periodical " + std::to_string(id) + " not in matrix");
        return it->second;
    }

    std::uint64_t count(std::uint32_t i, std::uint32_t j) const {
        const auto& row = rows_[i];
        auto it = std::lower_bound(row.begin(), row.end(), j,
                                   [](const Entry& e, std::uint32_t key) { return e.first < key; });
        return it != row.end() && it->first == j ? it->second : 0;
    }

    const std::vector<Entry>& row(std::uint32_t i) const { return rows_[i]; }
    const std::vector<Entry>& col(std::uint32_t j) const { return cols_[j]; }

    // undirected neighbor weights c_ij = C[i][j] + C[j][i], sorted by index
    std::vector<Entry> undirected_row(std::uint32_t i) const {
        std::map<std::uint32_t, std::uint64_t> acc;
        for (const auto& [j, c] : rows_[i]) acc[j] += c;
        for (const auto& [j, c] : cols_[i]) acc[j] += c;
        return {acc.begin(), acc.end()};
    }

    // total undirected citation volume of i; the diagonal counts twice
    std::uint64_t undirected_total(std::uint32_t i, bool include_diagonal = true) const {
        std::uint64_t t = 0;
        for (const auto& [j, c] : rows_[i])
            if (include_diagonal || j != i) t += c;
        for (const auto& [j, c] : cols_[i])
            if (include_diagonal || j != i) t += c;
        return t;
    }

private:
    void assign_entries(const std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t>& entries) {
        rows_.assign(ids_.size(), {});
        cols_.assign(ids_.size(), {});
        total_ = 0;
        for (const auto& [key, count] : entries) {
            rows_[key.first].emplace_back(key.second, count);
            cols_[key.second].emplace_back(key.first, count);
            total_ += count;
        }
        for (auto& col : cols_) std::sort(col.begin(), col.end());
    }

    std::vector<PeriodicalId> ids_;
    std::unordered_map<PeriodicalId, std::uint32_t> index_;
    std::vector<std::vector<Entry>> rows_;
    std::vector<std::vector<Entry>> cols_;
    std::uint64_t total_ = 0;

    friend PeriodicalCitationMatrix load_citation_matrix(const std::string&);
};

inline PeriodicalCitationMatrix build_periodical_citation_matrix(const PaperGraph& g,
                                                                 unsigned workers = 1) {
    return PeriodicalCitationMatrix::build(g, workers);
}

inline PeriodicalCitationMatrix load_citation_matrix(const std::string& path) {
    PeriodicalCitationMatrix m;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> entries;
    LineReader reader(path);
    std::string_view line;
    while (reader.next(line)) {
        auto fields = split_fields(line);
        if (fields.size() != 3) throw ParseError("expected 3 tab-separated fields in matrix file", reader.line_no());
        PeriodicalId i = parse_u64(fields[0], "periodical id", reader.line_no());
        PeriodicalId j = parse_u64(fields[1], "periodical id", reader.line_no());
        std::uint64_t c = parse_u64(fields[2], "citation count", reader.line_no());
        auto row = m.index_.try_emplace(i, static_cast<std::uint32_t>(m.ids_.size()));
        if (row.second) m.ids_.push_back(i);
        auto col = m.index_.try_emplace(j, static_cast<std::uint32_t>(m.ids_.size()));
        if (col.second) m.ids_.push_back(j);
        entries[{row.first->second, col.first->second}] += c;
    }
    m.assign_entries(entries);
    return m;
}

// Sparse vector with a fixed logical dimension.
struct SparseVec {
    std::uint64_t dim = 0;
    std::vector<std::pair<std::uint64_t, double>> entries;  // sorted by index

    double norm() const {
        double n = 0.0;
        for (const auto& [i, v] : entries) n += v * v;
        return std::sqrt(n);
    }
};

inline double cosine_sparse(const SparseVec& a, const SparseVec& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() && ib != b.entries.end()) {
        if (ia->first < ib->first)
            ++ia;
        else if (ib->first < ia->first)
            ++ib;
        else {
            dot += ia->second * ib->second;
            ++ia;
            ++ib;
        }
    }
    return dot / (na * nb);
}

// Citation vector model: the unit-normalized in-citation profile concatenated
// with the unit-normalized out-citation profile, dimension 2|P|. A side with
// no citations stays all-zero.
inline SparseVec citation_vector(const PeriodicalCitationMatrix& m, PeriodicalId p) {
    std::uint32_t idx = m.index_of(p);
    const std::uint64_t n = m.size();
    SparseVec v;
    v.dim = 2 * n;

    auto push_half = [&](const std::vector<PeriodicalCitationMatrix::Entry>& half, std::uint64_t base) {
        double norm = 0.0;
        for (const auto& [j, c] : half) norm += static_cast<double>(c) * static_cast<double>(c);
        norm = std::sqrt(norm);
        if (norm == 0.0) return;
        for (const auto& [j, c] : half) v.entries.emplace_back(base + j, static_cast<double>(c) / norm);
    };
    push_half(m.col(idx), 0);   // in-profile first
    push_half(m.row(idx), n);   // then out-profile
    return v;
}

// jac(i, j) on undirected counts: c_ij / (T_i + T_j - c_ij). The diagonal is
// included in the totals by default; jac(i, i) is 1 whenever i cites or is
// cited at all.
inline double jaccard_similarity(const PeriodicalCitationMatrix& m, PeriodicalId i, PeriodicalId j,
                                 bool include_diagonal_totals = true) {
    std::uint32_t a = m.index_of(i);
    std::uint32_t b = m.index_of(j);
    std::uint64_t ta = m.undirected_total(a, include_diagonal_totals);
    std::uint64_t tb = m.undirected_total(b, include_diagonal_totals);
    if (a == b) return ta > 0 ? 1.0 : 0.0;
    if (ta == 0 && tb == 0) return 0.0;
    std::uint64_t cij = m.count(a, b) + m.count(b, a);
    double denom = static_cast<double>(ta) + static_cast<double>(tb) - static_cast<double>(cij);
    if (denom <= 0.0) return 0.0;
    return static_cast<double>(cij) / denom;
}

// Row of the Jaccard similarity matrix; the periodical's representation for
// cosine-based protocols. The diagonal entry is jac(i, i).
inline SparseVec jaccard_row(const PeriodicalCitationMatrix& m, PeriodicalId p,
                             bool include_diagonal_totals = true) {
    std::uint32_t i = m.index_of(p);
    SparseVec v;
    v.dim = m.size();
    for (const auto& [j, w] : m.undirected_row(i)) {
        double score = j == i ? (m.undirected_total(i, include_diagonal_totals) > 0 ? 1.0 : 0.0)
                              : jaccard_similarity(m, p, m.ids()[j], include_diagonal_totals);
        if (score > 0.0) v.entries.emplace_back(j, score);
    }
    if (v.entries.empty() && m.undirected_total(i, include_diagonal_totals) > 0)
        v.entries.emplace_back(i, 1.0);
    return v;
}

// PageRank by power iteration on the column-stochastic weighted transition
// matrix with uniform teleport; dangling periodicals redistribute uniformly.
// Scores are indexed like the matrix ids.
inline std::vector<double> pagerank_scores(const PeriodicalCitationMatrix& m, double damping = 0.85,
                                           double tol = 1e-10, std::size_t max_iterations = 200) {
    if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("pagerank damping must lie in (0, 1)");
    const std::size_t n = m.size();
    if (n == 0) return {};

    std::vector<double> out_weight(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, c] : m.row(static_cast<std::uint32_t>(i))) out_weight[i] += static_cast<double>(c);

    std::vector<double> x(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (out_weight[i] == 0.0) dangling += x[i];
        double base = (1.0 - damping + damping * dangling) / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::size_t i = 0; i < n; ++i) {
            if (out_weight[i] == 0.0) continue;
            double share = damping * x[i] / out_weight[i];
            for (const auto& [j, c] : m.row(static_cast<std::uint32_t>(i)))
                next[j] += share * static_cast<double>(c);
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - x[i]);
        x.swap(next);
        if (diff < tol) return x;
    }
    throw NumericError("pagerank did not converge within " + std::to_string(max_iterations) + " iterations");
}

// Discipline of the highest-strength undirected neighbor; ties by ascending
// id. Returns nothing when no labeled neighbor with positive weight exists.
inline std::optional<std::string> predict_discipline_citation_weight(
    const PeriodicalCitationMatrix& m, const std::unordered_map<PeriodicalId, std::string>& labels,
    PeriodicalId p) {
    std::uint32_t i = m.index_of(p);
    std::uint64_t best_weight = 0;
    PeriodicalId best_id = 0;
    const std::string* best_label = nullptr;
    for (const auto& [j, w] : m.undirected_row(i)) {
        if (j == i || w == 0) continue;
        PeriodicalId qid = m.ids()[j];
        auto it = labels.find(qid);
        if (it == labels.end()) continue;
        if (w > best_weight || (w == best_weight && best_label && qid < best_id)) {
            best_weight = w;
            best_id = qid;
            best_label = &it->second;
        }
    }
    if (!best_label) return std::nullopt;
    return *best_label;
}

inline std::vector<PeriodicalId> cited_venues(const PaperGraph& g, std::uint32_t paper) {
    std::vector<PeriodicalId> refs;
    for (std::uint32_t cited : g.out_edges(paper)) refs.push_back(g.paper_venue(cited));
    return refs;
}

// Modal periodical of the reference list; ties by ascending id.
inline std::optional<PeriodicalId> predict_venue_majority(std::span<const PeriodicalId> refs) {
    if (refs.empty()) return std::nullopt;
    std::map<PeriodicalId, std::size_t> counts;
    for (PeriodicalId r : refs) ++counts[r];
    PeriodicalId best = 0;
    std::size_t best_count = 0;
    for (const auto& [id, c] : counts) {
        if (c > best_count) {  // map iterates ascending, so ties keep the smaller id
            best = id;
            best_count = c;
        }
    }
    return best;
}

}  // namespace perivec
