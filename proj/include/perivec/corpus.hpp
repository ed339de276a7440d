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

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "perivec/error.hpp"
#include "perivec/rng.hpp"
#include "perivec/tsv.hpp"

namespace perivec {

using PaperId = std::uint64_t;       // external paper id (as in the input files)
using PeriodicalId = std::uint64_t;  // external periodical id

// Paper-level citation network in compressed adjacency form. Papers and
// periodicals are mapped to dense indices at load, in first-seen order; the
// id tables map back to the external ids. Self-citations are dropped at load,
// duplicate citation rows are kept and weight the uniform step choice.
class PaperGraph {
public:
    std::size_t paper_count() const { return venue_.size(); }
    std::size_t edge_count() const { return targets_.size(); }
    std::size_t periodical_count() const { return periodical_ids_.size(); }
    std::size_t self_loops_dropped() const { return self_loops_dropped_; }

    std::span<const std::uint32_t> out_edges(std::uint32_t paper) const {
        return {targets_.data() + offsets_[paper], targets_.data() + offsets_[paper + 1]};
    }
    std::uint32_t out_degree(std::uint32_t paper) const {
        return static_cast<std::uint32_t>(offsets_[paper + 1] - offsets_[paper]);
    }
    std::vector<std::uint64_t> in_degrees() const {
        std::vector<std::uint64_t> deg(paper_count(), 0);
        for (std::uint32_t t : targets_) ++deg[t];
        return deg;
    }

    std::uint32_t venue_index(std::uint32_t paper) const { return venue_[paper]; }
    PeriodicalId periodical_id(std::uint32_t venue_idx) const { return periodical_ids_[venue_idx]; }
    PeriodicalId paper_venue(std::uint32_t paper) const { return periodical_ids_[venue_[paper]]; }
    const std::vector<PeriodicalId>& periodical_ids() const { return periodical_ids_; }
    const std::vector<PaperId>& paper_ids() const { return paper_ids_; }

    std::uint32_t paper_index(PaperId id) const {
        auto it = paper_index_.find(id);
        if (it == paper_index_.end()) throw LookupError("unknown paper id " + std::to_string(id));
        return it->second;
    }

    // Builds a graph from (paper id, venue id) rows and external-id edges.
    // Used by the file loader and the synthetic generator.
    static PaperGraph build(const std::vector<std::pair<PaperId, PeriodicalId>>& papers,
                            const std::vector<std::pair<PaperId, PaperId>>& edges) {
        PaperGraph g;
        g.paper_ids_.reserve(papers.size());
        g.venue_.reserve(papers.size());
        std::unordered_map<PeriodicalId, std::uint32_t> venue_index;
        for (const auto& [pid, vid] : papers) {
            if (!g.paper_index_.emplace(pid, static_cast<std::uint32_t>(g.paper_ids_.size())).second)
                throw IntegrityError("duplicate paper id " + std::to_string(pid));
            g.paper_ids_.push_back(pid);
            auto [it, inserted] =
                venue_index.emplace(vid, static_cast<std::uint32_t>(g.periodical_ids_.size()));
            if (inserted) g.periodical_ids_.push_back(vid);
            g.venue_.push_back(it->second);
        }

        std::vector<std::uint64_t> degree(g.paper_count(), 0);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> dense_edges;
        dense_edges.reserve(edges.size());
        for (const auto& [src, dst] : edges) {
            auto si = g.paper_index_.find(src);
            if (si == g.paper_index_.end())
                throw IntegrityError("citing paper " + std::to_string(src) + " has no venue row");
            auto di = g.paper_index_.find(dst);
            if (di == g.paper_index_.end())
                throw IntegrityError("cited paper " + std::to_string(dst) + " has no venue row");
            if (si->second == di->second) {
                ++g.self_loops_dropped_;
                continue;
            }
            dense_edges.emplace_back(si->second, di->second);
            ++degree[si->second];
        }

        g.offsets_.assign(g.paper_count() + 1, 0);
        for (std::size_t p = 0; p < g.paper_count(); ++p) g.offsets_[p + 1] = g.offsets_[p] + degree[p];
        g.targets_.resize(dense_edges.size());
        std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& [s, t] : dense_edges) g.targets_[cursor[s]++] = t;
        return g;
    }

private:
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> targets_;
    std::vector<std::uint32_t> venue_;
    std::vector<PeriodicalId> periodical_ids_;
    std::vector<PaperId> paper_ids_;
    std::unordered_map<PaperId, std::uint32_t> paper_index_;
    std::size_t self_loops_dropped_ = 0;
};

// Loads edges.tsv (`citing\tcited`) and papers.tsv (`paper\tperiodical`).
// Every paper referenced by an edge must appear in the papers file.
inline PaperGraph load_citation_graph(const std::string& edges_path, const std::string& papers_path) {
    std::vector<std::pair<PaperId, PeriodicalId>> papers;
    {
        LineReader reader(papers_path);
        std::string_view line;
        while (reader.next(line)) {
            auto fields = split_fields(line);
            if (fields.size() != 2)
                throw ParseError("expected 2 tab-separated fields in papers file", reader.line_no());
            papers.emplace_back(parse_u64(fields[0], "paper id", reader.line_no()),
                                parse_u64(fields[1], "periodical id", reader.line_no()));
        }
    }
    std::vector<std::pair<PaperId, PaperId>> edges;
    {
        LineReader reader(edges_path);
        std::string_view line;
        while (reader.next(line)) {
            auto fields = split_fields(line);
            if (fields.size() != 2)
                throw ParseError("expected 2 tab-separated fields in edges file", reader.line_no());
            edges.emplace_back(parse_u64(fields[0], "citing paper id", reader.line_no()),
                               parse_u64(fields[1], "cited paper id", reader.line_no()));
        }
    }
    return PaperGraph::build(papers, edges);
}

// A random walk over paper citations: consecutive papers are joined by an
// edge and the final paper has no outgoing citations.
struct PaperTrail {
    std::vector<std::uint32_t> papers;  // dense paper indices
};

// Walks from `start` following uniformly random citations until a dead end.
// Returns nothing when the walk terminates immediately (length 1).
inline std::optional<PaperTrail> sample_paper_trail_from(const PaperGraph& g, std::uint32_t start,
                                                         Rng& rng) {
    PaperTrail trail;
    std::uint32_t current = start;
    trail.papers.push_back(current);
    while (true) {
        auto edges = g.out_edges(current);
        if (edges.empty()) break;
        current = edges[rng.index(edges.size())];
        trail.papers.push_back(current);
    }
    if (trail.papers.size() < 2) return std::nullopt;
    return trail;
}

inline std::optional<PaperTrail> sample_paper_trail(const PaperGraph& g, Rng& rng) {
    if (g.paper_count() == 0) throw ConfigError("cannot sample a trail from an empty graph");
    return sample_paper_trail_from(g, static_cast<std::uint32_t>(rng.below(g.paper_count())), rng);
}

// Multiset of periodical trails; the training corpus.
struct TrailCorpus {
    std::vector<std::vector<PeriodicalId>> trails;
    std::uint64_t seed = 0;

    std::size_t size() const { return trails.size(); }
};

inline std::vector<PeriodicalId> to_periodical_trail(const PaperGraph& g, const PaperTrail& t) {
    std::vector<PeriodicalId> venues;
    venues.reserve(t.papers.size());
    for (std::uint32_t p : t.papers) venues.push_back(g.paper_venue(p));
    return venues;
}

// Generates exactly `n` accepted trails. Length-1 walks are resampled and do
// not count. Workers use independent derived streams and fill disjoint slots
// in worker-major order, so the corpus is deterministic for a fixed
// (seed, workers) pair. The graph is shared read-only.
inline TrailCorpus generate_trail_corpus(const PaperGraph& g, std::uint64_t n, std::uint64_t seed,
                                         unsigned workers = 1) {
    if (n < 1) throw ConfigError("trail count must be at least 1");
    if (workers < 1) workers = 1;
    if (g.edge_count() == 0)
        throw IntegrityError("corpus unsatisfiable: graph has no edges, every walk terminates immediately");

    TrailCorpus corpus;
    corpus.seed = seed;
    corpus.trails.resize(n);

    auto run_worker = [&](unsigned w) {
        std::uint64_t lo = n * w / workers;
        std::uint64_t hi = n * (w + 1) / workers;
        Rng rng = derive_rng(seed, "walk", w);
        for (std::uint64_t i = lo; i < hi; ++i) {
            std::optional<PaperTrail> trail;
            while (!(trail = sample_paper_trail(g, rng))) {
            }
            corpus.trails[i] = to_periodical_trail(g, *trail);
        }
    };

    if (workers == 1) {
        run_worker(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
        for (auto& t : threads) t.join();
    }
    return corpus;
}

inline void write_trails(const TrailCorpus& corpus, std::ostream& out) {
    for (const auto& trail : corpus.trails) {
        for (std::size_t i = 0; i < trail.size(); ++i) {
            if (i) out << ' ';
            out << trail[i];
        }
        out << '\n';
    }
}

inline void write_trails(const TrailCorpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trails file: " + path);
    write_trails(corpus, out);
}

inline TrailCorpus read_trails(const std::string& path) {
    TrailCorpus corpus;
    LineReader reader(path);
    std::string_view line;
    while (reader.next(line)) {
        std::vector<PeriodicalId> trail;
        for (std::string_view tok : split_fields(line, ' ')) {
            if (tok.empty()) continue;
            trail.push_back(parse_u64(tok, "periodical id", reader.line_no()));
        }
        if (trail.size() < 2) throw ParseError("trail shorter than 2 periodicals", reader.line_no());
        corpus.trails.push_back(std::move(trail));
    }
    return corpus;
}

// Planted-partition citation network used as the desk-scale ground truth.
// Each citation picks a level with probability proportional to the three
// masses -- extra affinity to the paper's own sub-discipline, the whole own
// discipline, or any other discipline -- then a uniform target on that level,
// so with within_sub_probability = 0 the model reduces to plain two-level
// planted partitions. Papers cite only earlier papers, which yields an
// acyclic graph whose earliest `root_fraction` papers are reference-free dead
// ends, so every random walk terminates. Venues are assigned uniformly inside
// the paper's sub-discipline.
struct SyntheticSpec {
    std::uint32_t discipline_count = 2;
    std::uint32_t subs_per_discipline = 1;
    std::uint32_t papers_per_discipline = 1000;
    std::uint32_t periodicals_per_discipline = 10;
    double within_sub_probability = 0.0;  // ignored when subs_per_discipline == 1
    double within_probability = 0.8;
    double cross_probability = 0.2;
    std::uint32_t citations_per_paper = 5;
    double root_fraction = 0.05;
    std::uint64_t seed = 1;

    std::uint64_t total_papers() const {
        return std::uint64_t(discipline_count) * papers_per_discipline;
    }
    std::uint64_t total_periodicals() const {
        return std::uint64_t(discipline_count) * periodicals_per_discipline;
    }

    void validate() const {
        if (discipline_count == 0 || papers_per_discipline == 0 || periodicals_per_discipline == 0 ||
            citations_per_paper == 0 || subs_per_discipline == 0)
            throw ConfigError("synthetic spec counts must be positive");
        if (!(within_probability > cross_probability))
            throw ConfigError("synthetic spec requires within_probability > cross_probability");
        if (within_probability <= 0 || cross_probability < 0 || within_sub_probability < 0)
            throw ConfigError("synthetic spec probabilities must be nonnegative");
        if (citations_per_paper >= total_papers())
            throw ConfigError("infeasible synthetic spec: citations_per_paper >= paper count");
        if (subs_per_discipline > periodicals_per_discipline || subs_per_discipline > papers_per_discipline)
            throw ConfigError("synthetic spec has more sub-disciplines than periodicals or papers");
        if (root_fraction <= 0.0 || root_fraction >= 1.0)
            throw ConfigError("synthetic spec root_fraction must lie in (0, 1)");
    }
};

namespace detail {

// Members of {j < limit : j == first (mod step)}.
inline std::uint64_t arithmetic_count(std::uint64_t limit, std::uint64_t first, std::uint64_t step) {
    if (limit <= first) return 0;
    return (limit - 1 - first) / step + 1;
}

}  // namespace detail

inline PaperGraph generate_synthetic_graph(const SyntheticSpec& spec) {
    spec.validate();
    const std::uint64_t n_papers = spec.total_papers();
    const std::uint32_t k = spec.discipline_count;
    const std::uint32_t subs = spec.subs_per_discipline;
    const std::uint32_t per_disc = spec.periodicals_per_discipline;
    const std::uint64_t roots = std::max<std::uint64_t>(1, std::uint64_t(spec.root_fraction * double(n_papers)));

    Rng rng = derive_rng(spec.seed, "synthetic");

    std::vector<std::pair<PaperId, PeriodicalId>> papers;
    papers.reserve(n_papers);
    for (std::uint64_t i = 0; i < n_papers; ++i) {
        std::uint32_t d = static_cast<std::uint32_t>(i % k);
        std::uint32_t s = static_cast<std::uint32_t>((i / k) % subs);
        // venue uniform among the (d, s) periodicals: local index r == s (mod subs)
        std::uint64_t venue_slots = detail::arithmetic_count(per_disc, s, subs);
        std::uint64_t r = s + subs * rng.below(venue_slots);
        papers.emplace_back(i, std::uint64_t(d) * per_disc + r);
    }

    const double p_sub = subs > 1 ? spec.within_sub_probability : 0.0;
    const double p_within = spec.within_probability;
    const double p_cross = spec.cross_probability;

    std::vector<std::pair<PaperId, PaperId>> edges;
    edges.reserve(n_papers * spec.citations_per_paper);
    for (std::uint64_t i = roots; i < n_papers; ++i) {
        std::uint32_t d = static_cast<std::uint32_t>(i % k);
        std::uint32_t s = static_cast<std::uint32_t>((i / k) % subs);
        // candidate counts among papers earlier than i
        std::uint64_t n_disc = detail::arithmetic_count(i, d, k);
        std::uint64_t n_sub = detail::arithmetic_count(n_disc, s, subs);  // over t = (j-d)/k
        std::uint64_t n_cross = i - n_disc;

        std::uint64_t cites = std::min<std::uint64_t>(spec.citations_per_paper, i);
        for (std::uint64_t c = 0; c < cites; ++c) {
            // level masses: extra same-sub affinity, whole-discipline, cross
            double w_sub = (subs > 1 && n_sub > 0) ? p_sub : 0.0;
            double w_within = n_disc > 0 ? p_within : 0.0;
            double w_cross = n_cross > 0 ? p_cross : 0.0;
            double total = w_sub + w_within + w_cross;
            if (total == 0.0) break;  // no reachable candidates under the mixing weights
            double u = rng.next_double() * total;
            std::uint64_t target;
            if (u < w_sub) {
                std::uint64_t t = s + subs * rng.below(n_sub);
                target = d + k * t;
            } else if (u < w_sub + w_within) {
                target = d + k * rng.below(n_disc);
            } else {
                do {
                    target = rng.below(i);
                } while (target % k == d);
            }
            edges.emplace_back(i, target);
        }
    }
    return PaperGraph::build(papers, edges);
}

// Catalog rows for a synthetic graph: (periodical id, name, discipline,
// sub-discipline). The labels follow the planted structure.
struct SyntheticCatalogRow {
    PeriodicalId id;
    std::string name;
    std::string discipline;
    std::string sub_discipline;
};

inline std::vector<SyntheticCatalogRow> synthetic_catalog(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<SyntheticCatalogRow> rows;
    rows.reserve(spec.total_periodicals());
    for (std::uint32_t d = 0; d < spec.discipline_count; ++d) {
        for (std::uint32_t r = 0; r < spec.periodicals_per_discipline; ++r) {
            std::uint32_t s = r % spec.subs_per_discipline;
            SyntheticCatalogRow row;
            row.id = std::uint64_t(d) * spec.periodicals_per_discipline + r;
            row.name = "P" + std::to_string(row.id);
            row.discipline = "D" + std::to_string(d);
            row.sub_discipline = "D" + std::to_string(d) + ".S" + std::to_string(s);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace perivec
