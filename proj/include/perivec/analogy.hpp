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
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "perivec/baselines.hpp"
#include "perivec/error.hpp"
#include "perivec/evaluation.hpp"
#include "perivec/rng.hpp"
#include "perivec/stats.hpp"
#include "perivec/tsv.hpp"
#include "perivec/vectorspace.hpp"

namespace perivec {

enum class AnalogyDirection { toward_b, toward_a };

struct AnalogyEdge {
    PeriodicalId src;
    PeriodicalId dst;
    AnalogyDirection dir;
};

// Directed graph grown by iterated two-pole analogies. Every expanded node
// carries at most one edge per direction; the poles never become nodes.
struct AnalogyGraph {
    PeriodicalId pole_a = 0;
    PeriodicalId pole_b = 0;
    PeriodicalId seed = 0;
    std::uint32_t max_depth = 0;
    std::vector<PeriodicalId> nodes;  // breadth-first discovery order, seed first
    std::vector<AnalogyEdge> edges;
};

// Memo of one-step analogy targets, shared across seeds of the same pole
// pair to keep the 1,800-graph suite cheap.
using AnalogyStepCache = std::map<std::pair<PeriodicalId, AnalogyDirection>, std::optional<PeriodicalId>>;

// Breadth-first expansion from the seed. At node X the two composites
// v(X) - v(away) + v(toward) are ranked and the top candidate outside
// {X, poles} becomes the edge target; already-known targets gain the edge but
// are not expanded again. With `same_discipline_only` the candidates are
// restricted to the seed's discipline.
inline AnalogyGraph build_analogy_graph(const VectorStore& store, PeriodicalId pole_a,
                                        PeriodicalId pole_b, PeriodicalId seed,
                                        std::uint32_t max_depth, bool same_discipline_only = false,
                                        AnalogyStepCache* cache = nullptr) {
    if (store.size() < 4)
        throw ConfigError("analogy graphs need a store with at least 4 periodicals");
    if (pole_a == pole_b || seed == pole_a || seed == pole_b)
        throw ConfigError("poles and seed must be three distinct periodicals");
    store.vector(pole_a);
    store.vector(pole_b);
    store.vector(seed);

    const std::string seed_discipline = same_discipline_only ? store.discipline(seed) : std::string();

    auto step = [&](PeriodicalId x, AnalogyDirection dir) -> std::optional<PeriodicalId> {
        if (cache) {
            auto it = cache->find({x, dir});
            if (it != cache->end()) return it->second;
        }
        PeriodicalId away = dir == AnalogyDirection::toward_b ? pole_a : pole_b;
        PeriodicalId toward = dir == AnalogyDirection::toward_b ? pole_b : pole_a;
        auto vx = store.vector(x);
        auto va = store.vector(away);
        auto vt = store.vector(toward);
        std::vector<double> composite(store.dim());
        for (std::uint32_t j = 0; j < store.dim(); ++j) composite[j] = vx[j] - va[j] + vt[j];

        std::optional<PeriodicalId> best;
        double best_score = -std::numeric_limits<double>::infinity();
        double cnorm = 0.0;
        for (double v : composite) cnorm += v * v;
        if (cnorm == 0.0) return std::nullopt;
        cnorm = std::sqrt(cnorm);
        for (PeriodicalId cand : store.ids()) {
            if (cand == x || cand == pole_a || cand == pole_b) continue;
            if (same_discipline_only && store.discipline(cand) != seed_discipline) continue;
            auto v = store.vector(cand);
            double dot = 0.0;
            for (std::uint32_t j = 0; j < store.dim(); ++j) dot += v[j] * composite[j];
            double score = dot / cnorm;
            if (score > best_score || (score == best_score && best && cand < *best)) {
                best_score = score;
                best = cand;
            }
        }
        if (cache) cache->emplace(std::pair{x, dir}, best);
        return best;
    };

    AnalogyGraph graph;
    graph.pole_a = pole_a;
    graph.pole_b = pole_b;
    graph.seed = seed;
    graph.max_depth = max_depth;
    graph.nodes.push_back(seed);
    std::unordered_set<PeriodicalId> known{seed};

    std::deque<std::pair<PeriodicalId, std::uint32_t>> queue{{seed, 0}};
    while (!queue.empty()) {
        auto [node, depth] = queue.front();
        queue.pop_front();
        if (depth >= max_depth) continue;
        for (AnalogyDirection dir : {AnalogyDirection::toward_b, AnalogyDirection::toward_a}) {
            auto target = step(node, dir);
            if (!target) continue;
            graph.edges.push_back({node, *target, dir});
            if (known.insert(*target).second) {
                graph.nodes.push_back(*target);
                queue.emplace_back(*target, depth + 1);
            }
        }
    }
    return graph;
}

// Authors who published in each periodical, deduplicated.
class AuthorIndex {
public:
    // authorship.tsv: `<paper_id>\t<author_id>`; venues come from the graph.
    // Rows whose paper id is absent from the graph are skipped and counted.
    static AuthorIndex load(const std::string& path, const PaperGraph& g) {
        AuthorIndex idx;
        LineReader reader(path);
        std::string_view line;
        std::unordered_map<PaperId, std::uint32_t> papers;
        for (std::size_t p = 0; p < g.paper_count(); ++p)
            papers.emplace(g.paper_ids()[p], static_cast<std::uint32_t>(p));
        while (reader.next(line)) {
            auto fields = split_fields(line);
            if (fields.size() != 2)
                throw ParseError("expected 2 tab-separated fields in authorship file", reader.line_no());
            PaperId paper = parse_u64(fields[0], "paper id", reader.line_no());
            std::uint64_t author = parse_u64(fields[1], "author id", reader.line_no());
            auto it = papers.find(paper);
            if (it == papers.end()) {
                ++idx.skipped_rows_;
                continue;
            }
            idx.sets_[g.paper_venue(it->second)].push_back(author);
        }
        idx.finalize();
        return idx;
    }

    static AuthorIndex from_map(std::unordered_map<PeriodicalId, std::vector<std::uint64_t>> sets) {
        AuthorIndex idx;
        idx.sets_ = std::move(sets);
        idx.finalize();
        return idx;
    }

    bool contains(PeriodicalId id) const { return sets_.contains(id); }
    std::size_t skipped_rows() const { return skipped_rows_; }

    const std::vector<std::uint64_t>& authors(PeriodicalId id) const {
        auto it = sets_.find(id);
        if (it == sets_.end()) throw LookupError("periodical " + std::to_string(id) + " not in author index");
        return it->second;
    }

    // |authors(p1) ∩ authors(p2)|
    std::uint64_t overlap(PeriodicalId p1, PeriodicalId p2) const {
        const auto& a = authors(p1);
        const auto& b = authors(p2);
        std::uint64_t count = 0;
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (*ia < *ib)
                ++ia;
            else if (*ib < *ia)
                ++ib;
            else {
                ++count;
                ++ia;
                ++ib;
            }
        }
        return count;
    }

private:
    void finalize() {
        for (auto& [id, authors] : sets_) {
            std::sort(authors.begin(), authors.end());
            authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
        }
    }

    std::unordered_map<PeriodicalId, std::vector<std::uint64_t>> sets_;
    std::size_t skipped_rows_ = 0;
};

inline std::uint64_t author_overlap(const AuthorIndex& idx, PeriodicalId p1, PeriodicalId p2) {
    return idx.overlap(p1, p2);
}

enum class CyclePolicy { strongly_connected, two_cycles_only };

namespace detail {

// Marks edges that lie on a directed cycle. Under the SCC policy those are
// exactly the edges whose endpoints share a strongly connected component;
// the alternative flags only mutual 2-cycles.
inline std::vector<bool> cyclic_edge_mask(const AnalogyGraph& g, CyclePolicy policy) {
    std::vector<bool> cyclic(g.edges.size(), false);
    if (policy == CyclePolicy::two_cycles_only) {
        std::set<std::pair<PeriodicalId, PeriodicalId>> present;
        for (const auto& e : g.edges) present.emplace(e.src, e.dst);
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            cyclic[i] = present.contains({g.edges[i].dst, g.edges[i].src});
        return cyclic;
    }

    // iterative Tarjan
    std::unordered_map<PeriodicalId, std::uint32_t> node_index;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        node_index.emplace(g.nodes[i], static_cast<std::uint32_t>(i));
    // edges may point at poles? never: targets exclude poles, all dst are nodes
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (const auto& e : g.edges) adj[node_index.at(e.src)].push_back(node_index.at(e.dst));

    std::vector<std::uint32_t> comp(n, UINT32_MAX), low(n), disc(n, UINT32_MAX);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    std::uint32_t timer = 0, comp_count = 0;

    struct Frame {
        std::uint32_t v;
        std::size_t child;
    };
    for (std::uint32_t root = 0; root < n; ++root) {
        if (disc[root] != UINT32_MAX) continue;
        std::vector<Frame> frames{{root, 0}};
        while (!frames.empty()) {
            auto& f = frames.back();
            if (f.child == 0) {
                disc[f.v] = low[f.v] = timer++;
                stack.push_back(f.v);
                on_stack[f.v] = true;
            }
            if (f.child < adj[f.v].size()) {
                std::uint32_t w = adj[f.v][f.child++];
                if (disc[w] == UINT32_MAX) {
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
            } else {
                if (low[f.v] == disc[f.v]) {
                    while (true) {
                        std::uint32_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if (w == f.v) break;
                    }
                    ++comp_count;
                }
                std::uint32_t v = f.v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        std::uint32_t s = node_index.at(g.edges[i].src);
        std::uint32_t d = node_index.at(g.edges[i].dst);
        cyclic[i] = comp[s] == comp[d];
    }
    return cyclic;
}

// Overlap ratio with the zero-denominator convention: x/0 with x > 0 is
// +infinity, 0/0 is undefined.
inline std::optional<double> overlap_ratio(std::uint64_t num, std::uint64_t den) {
    if (den > 0) return static_cast<double>(num) / static_cast<double>(den);
    if (num > 0) return std::numeric_limits<double>::infinity();
    return std::nullopt;
}

}  // namespace detail

// Fraction of acyclic edges (C -> D) whose author overlaps satisfy
// O(C, away) / O(C, toward) > O(D, away) / O(D, toward). Edges on directed
// cycles and edges with an undefined 0/0 ratio are excluded; the result is
// empty when no edge remains.
inline std::optional<double> analogy_graph_overlap_fraction(
    const AnalogyGraph& g, const AuthorIndex& idx,
    CyclePolicy policy = CyclePolicy::strongly_connected) {
    auto cyclic = detail::cyclic_edge_mask(g, policy);
    std::uint64_t considered = 0, satisfied = 0;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        if (cyclic[i]) continue;
        const auto& e = g.edges[i];
        PeriodicalId away = e.dir == AnalogyDirection::toward_b ? g.pole_a : g.pole_b;
        PeriodicalId toward = e.dir == AnalogyDirection::toward_b ? g.pole_b : g.pole_a;
        auto rc = detail::overlap_ratio(idx.overlap(e.src, away), idx.overlap(e.src, toward));
        auto rd = detail::overlap_ratio(idx.overlap(e.dst, away), idx.overlap(e.dst, toward));
        if (!rc || !rd) continue;
        ++considered;
        if (*rc > *rd) ++satisfied;
    }
    if (considered == 0) return std::nullopt;
    return static_cast<double>(satisfied) / static_cast<double>(considered);
}

struct AnalogySuiteReport {
    double mean_fraction = 0.0;
    std::vector<double> fractions;   // one per graph with a defined fraction
    std::uint64_t graph_count = 0;   // all generated graphs
    std::uint64_t undefined_count = 0;
};

// Top journals of a discipline by PageRank score, ties by ascending id.
inline std::vector<PeriodicalId> top_journals_by_pagerank(
    const DisciplineCatalog& catalog, const VectorStore& store,
    const std::unordered_map<PeriodicalId, double>& pagerank, const std::string& discipline,
    std::size_t top_n) {
    std::vector<std::pair<double, PeriodicalId>> ranked;
    for (PeriodicalId id : catalog.labeled_ids()) {
        if (catalog.discipline(id) != discipline || !store.contains(id)) continue;
        auto it = pagerank.find(id);
        if (it == pagerank.end()) continue;
        ranked.emplace_back(it->second, id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (ranked.size() < top_n)
        throw ConfigError("discipline '" + discipline + "' has fewer than " + std::to_string(top_n) +
                          " ranked periodicals");
    std::vector<PeriodicalId> out;
    out.reserve(top_n);
    for (std::size_t i = 0; i < top_n; ++i) out.push_back(ranked[i].second);
    return out;
}

// All pole pairs from the top-10 journals of two disciplines, with every
// remaining top journal as a seed: 10 x 10 pole pairs x 18 seeds = 1,800
// graphs per discipline pair.
inline AnalogySuiteReport discipline_pair_analogy_suite(
    const VectorStore& store, const DisciplineCatalog& catalog, const AuthorIndex& idx,
    const std::string& d1, const std::string& d2,
    const std::unordered_map<PeriodicalId, double>& pagerank, std::uint32_t max_depth = 5,
    CyclePolicy policy = CyclePolicy::strongly_connected) {
    auto top1 = top_journals_by_pagerank(catalog, store, pagerank, d1, 10);
    auto top2 = top_journals_by_pagerank(catalog, store, pagerank, d2, 10);

    AnalogySuiteReport report;
    for (PeriodicalId pole_a : top1) {
        for (PeriodicalId pole_b : top2) {
            if (pole_a == pole_b) continue;
            AnalogyStepCache cache;
            for (PeriodicalId seed : top1) {
                if (seed == pole_a || seed == pole_b) continue;
                auto g = build_analogy_graph(store, pole_a, pole_b, seed, max_depth, false, &cache);
                ++report.graph_count;
                if (auto f = analogy_graph_overlap_fraction(g, idx, policy))
                    report.fractions.push_back(*f);
                else
                    ++report.undefined_count;
            }
            for (PeriodicalId seed : top2) {
                if (seed == pole_a || seed == pole_b) continue;
                auto g = build_analogy_graph(store, pole_a, pole_b, seed, max_depth, false, &cache);
                ++report.graph_count;
                if (auto f = analogy_graph_overlap_fraction(g, idx, policy))
                    report.fractions.push_back(*f);
                else
                    ++report.undefined_count;
            }
        }
    }
    report.mean_fraction = mean_of(report.fractions);
    return report;
}

// Projection of every stored periodical on a discipline-anchored axis.
struct SpectrumReport {
    Axis axis;
    std::vector<std::pair<PeriodicalId, double>> projections;      // ascending projection
    std::vector<std::pair<std::string, double>> discipline_means;  // ascending mean
    std::vector<PeriodicalId> lowest;
    std::vector<PeriodicalId> highest;
};

inline std::vector<PeriodicalId> discipline_pole(const VectorStore& store,
                                                 const DisciplineCatalog& catalog,
                                                 const std::set<std::string>& disciplines) {
    std::vector<PeriodicalId> pole;
    for (PeriodicalId id : catalog.labeled_ids())
        if (store.contains(id) && disciplines.contains(catalog.discipline(id))) pole.push_back(id);
    if (pole.empty()) throw ConfigError("axis pole disciplines match no stored periodical");
    return pole;
}

inline SpectrumReport axis_spectrum(const VectorStore& store, const DisciplineCatalog& catalog,
                                    const std::set<std::string>& pos_disciplines,
                                    const std::set<std::string>& neg_disciplines,
                                    std::size_t extremes = 5) {
    SpectrumReport report;
    report.axis = build_axis(store, discipline_pole(store, catalog, pos_disciplines),
                             discipline_pole(store, catalog, neg_disciplines));

    std::map<std::string, std::pair<double, std::size_t>> disc_acc;
    report.projections.reserve(store.size());
    for (PeriodicalId id : store.ids()) {
        double s = project_on_axis(store, id, report.axis);
        report.projections.emplace_back(id, s);
        if (catalog.has(id)) {
            auto& acc = disc_acc[catalog.discipline(id)];
            acc.first += s;
            acc.second += 1;
        }
    }
    std::sort(report.projections.begin(), report.projections.end(),
              [](const auto& a, const auto& b) {
                  return a.second != b.second ? a.second < b.second : a.first < b.first;
              });
    for (const auto& [disc, acc] : disc_acc)
        report.discipline_means.emplace_back(disc, acc.first / static_cast<double>(acc.second));
    std::sort(report.discipline_means.begin(), report.discipline_means.end(),
              [](const auto& a, const auto& b) {
                  return a.second != b.second ? a.second < b.second : a.first < b.first;
              });
    for (std::size_t i = 0; i < std::min(extremes, report.projections.size()); ++i) {
        report.lowest.push_back(report.projections[i].first);
        report.highest.push_back(report.projections[report.projections.size() - 1 - i].first);
    }
    return report;
}

namespace detail {

inline std::vector<double> projection_vector(const VectorStore& store, const Axis& axis) {
    std::vector<double> out;
    out.reserve(store.size());
    for (PeriodicalId id : store.ids()) out.push_back(project_on_axis(store, id, axis));
    return out;
}

}  // namespace detail

// Spearman correlation between the ordering induced by an axis rebuilt from
// the given pole subsets and the full-axis ordering.
inline double axis_subset_rho(const VectorStore& store, const std::vector<PeriodicalId>& pos_subset,
                              const std::vector<PeriodicalId>& neg_subset,
                              std::span<const double> full_projections) {
    Axis axis = build_axis(store, pos_subset, neg_subset);
    auto proj = detail::projection_vector(store, axis);
    return spearman_rho(proj, full_projections);
}

struct StabilityRow {
    std::size_t subset_size = 0;
    MeanCi rho;
    std::vector<double> samples;
};

// Axis robustness: rebuild the axis from random pole subsets of each size and
// correlate the induced ordering with the full-axis ordering.
inline std::vector<StabilityRow> axis_stability(const VectorStore& store,
                                                const DisciplineCatalog& catalog,
                                                const std::set<std::string>& pos_disciplines,
                                                const std::set<std::string>& neg_disciplines,
                                                std::span<const std::size_t> subset_sizes,
                                                std::size_t repeats, std::uint64_t seed) {
    auto pos = discipline_pole(store, catalog, pos_disciplines);
    auto neg = discipline_pole(store, catalog, neg_disciplines);
    Axis full = build_axis(store, pos, neg);
    auto full_proj = detail::projection_vector(store, full);

    std::vector<StabilityRow> rows;
    for (std::size_t size : subset_sizes) {
        if (size < 1) throw ConfigError("axis subset size must be >= 1");
        if (size > pos.size() || size > neg.size())
            throw ConfigError("axis subset size exceeds a pole size");
        StabilityRow row;
        row.subset_size = size;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            Rng rng = derive_rng(seed, "axis-stability", size * 1000003ULL + rep);
            auto sample_subset = [&](const std::vector<PeriodicalId>& pool) {
                std::vector<PeriodicalId> copy = pool;
                for (std::size_t i = 0; i < size; ++i)
                    std::swap(copy[i], copy[i + rng.index(copy.size() - i)]);
                copy.resize(size);
                return copy;
            };
            row.samples.push_back(
                axis_subset_rho(store, sample_subset(pos), sample_subset(neg), full_proj));
        }
        row.rho = mean_ci95(row.samples);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Spearman correlation between a sub-discipline-anchored axis ordering and a
// reference axis ordering.
inline double subdiscipline_axis_correlation(const VectorStore& store, const DisciplineCatalog& catalog,
                                             const std::string& soft_sub, const std::string& hard_sub,
                                             const Axis& reference_axis) {
    std::vector<PeriodicalId> neg, pos;
    for (PeriodicalId id : catalog.labeled_ids()) {
        if (!store.contains(id)) continue;
        if (catalog.sub_discipline(id) == soft_sub) neg.push_back(id);
        if (catalog.sub_discipline(id) == hard_sub) pos.push_back(id);
    }
    if (pos.empty() || neg.empty()) throw ConfigError("sub-discipline poles match no stored periodical");
    Axis axis = build_axis(store, pos, neg);
    auto proj = detail::projection_vector(store, axis);
    auto ref = detail::projection_vector(store, reference_axis);
    return spearman_rho(proj, ref);
}

// Materializes the citation-vector model as a dense store so the analogy
// machinery can run on the sparse baseline. Periodicals without any citation
// are dropped (their cv vector is zero).
inline VectorStore citation_vector_store(const PeriodicalCitationMatrix& matrix) {
    std::vector<PeriodicalId> ids;
    std::vector<double> rows;
    const std::uint64_t dim = 2 * matrix.size();
    for (PeriodicalId id : matrix.ids()) {
        SparseVec v = citation_vector(matrix, id);
        if (v.entries.empty()) continue;
        ids.push_back(id);
        std::vector<double> dense(dim, 0.0);
        for (const auto& [idx, val] : v.entries) dense[idx] = val;
        rows.insert(rows.end(), dense.begin(), dense.end());
    }
    if (ids.empty()) throw ConfigError("citation matrix has no nonzero citation vectors");
    return VectorStore::from_rows(std::move(ids), std::move(rows), static_cast<std::uint32_t>(dim));
}

}  // namespace perivec
