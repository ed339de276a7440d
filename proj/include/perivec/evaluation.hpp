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
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "perivec/baselines.hpp"
#include "perivec/corpus.hpp"
#include "perivec/error.hpp"
#include "perivec/rng.hpp"
#include "perivec/stats.hpp"
#include "perivec/tsv.hpp"
#include "perivec/vectorspace.hpp"

namespace perivec {

inline constexpr const char* kInterdisciplineLabel = "Interdiscipline";

// Periodical id -> (discipline, sub-discipline) as matched against a journal
// catalog. Loaded from the same periodicals.tsv the vector store reads.
class DisciplineCatalog {
public:
    static DisciplineCatalog load(const std::string& path) {
        DisciplineCatalog catalog;
        LineReader reader(path);
        std::string_view line;
        while (reader.next(line)) {
            auto fields = split_fields(line);
            if (fields.size() < 2 || fields.size() > 4)
                throw ParseError("expected 2-4 tab-separated fields in periodicals file", reader.line_no());
            PeriodicalId id = parse_u64(fields[0], "periodical id", reader.line_no());
            std::string disc = fields.size() > 2 ? std::string(fields[2]) : std::string();
            std::string sub = fields.size() > 3 ? std::string(fields[3]) : std::string();
            if (disc.empty()) continue;
            catalog.add(id, disc, sub);
        }
        return catalog;
    }

    void add(PeriodicalId id, const std::string& discipline, const std::string& sub = {}) {
        if (!labels_.emplace(id, std::pair{discipline, sub}).second)
            throw IntegrityError("periodical " + std::to_string(id) + " labeled twice");
        ids_.push_back(id);
    }

    bool has(PeriodicalId id) const { return labels_.contains(id); }
    const std::string& discipline(PeriodicalId id) const { return at(id).first; }
    const std::string& sub_discipline(PeriodicalId id) const { return at(id).second; }

    // labeled ids in ascending order
    std::vector<PeriodicalId> labeled_ids() const {
        std::vector<PeriodicalId> out = ids_;
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<std::string> disciplines() const {
        std::set<std::string> s;
        for (const auto& [id, lab] : labels_) s.insert(lab.first);
        return {s.begin(), s.end()};
    }

    std::size_t size() const { return labels_.size(); }

    std::unordered_map<PeriodicalId, std::string> discipline_map() const {
        std::unordered_map<PeriodicalId, std::string> m;
        for (const auto& [id, lab] : labels_) m.emplace(id, lab.first);
        return m;
    }

private:
    const std::pair<std::string, std::string>& at(PeriodicalId id) const {
        auto it = labels_.find(id);
        if (it == labels_.end()) throw LookupError("periodical " + std::to_string(id) + " not in catalog");
        return it->second;
    }

    std::unordered_map<PeriodicalId, std::pair<std::string, std::string>> labels_;
    std::vector<PeriodicalId> ids_;
};

// A named pairwise similarity with the KDE kernel its score distribution
// calls for (Gaussian for the dense embedding, exponential for the sparse
// citation models).
struct PairScorer {
    std::string name;
    Kernel kernel = Kernel::gaussian;
    std::function<bool(PeriodicalId)> covers;
    std::function<double(PeriodicalId, PeriodicalId)> score;
};

inline PairScorer make_embedding_scorer(const VectorStore& store) {
    PairScorer s;
    s.name = "p2v";
    s.kernel = Kernel::gaussian;
    s.covers = [&store](PeriodicalId id) { return store.contains(id); };
    s.score = [&store](PeriodicalId a, PeriodicalId b) {
        return cosine_similarity(store.vector(a), store.vector(b));
    };
    return s;
}

namespace detail {

struct SparseTable {
    std::vector<SparseVec> vectors;  // dense matrix index order
    const PeriodicalCitationMatrix* matrix;
};

inline std::shared_ptr<SparseTable> citation_vector_table(const PeriodicalCitationMatrix& m) {
    auto table = std::make_shared<SparseTable>();
    table->matrix = &m;
    table->vectors.reserve(m.size());
    for (PeriodicalId id : m.ids()) table->vectors.push_back(citation_vector(m, id));
    return table;
}

inline std::shared_ptr<SparseTable> jaccard_table(const PeriodicalCitationMatrix& m) {
    auto table = std::make_shared<SparseTable>();
    table->matrix = &m;
    table->vectors.reserve(m.size());
    for (PeriodicalId id : m.ids()) table->vectors.push_back(jaccard_row(m, id));
    return table;
}

inline PairScorer sparse_scorer(std::string name, std::shared_ptr<SparseTable> table) {
    PairScorer s;
    s.name = std::move(name);
    s.kernel = Kernel::exponential;
    s.covers = [table](PeriodicalId id) { return table->matrix->contains(id); };
    s.score = [table](PeriodicalId a, PeriodicalId b) {
        return cosine_sparse(table->vectors[table->matrix->index_of(a)],
                             table->vectors[table->matrix->index_of(b)]);
    };
    return s;
}

}  // namespace detail

inline PairScorer make_citation_vector_scorer(const PeriodicalCitationMatrix& m) {
    return detail::sparse_scorer("cv", detail::citation_vector_table(m));
}

inline PairScorer make_jaccard_scorer(const PeriodicalCitationMatrix& m) {
    return detail::sparse_scorer("jac", detail::jaccard_table(m));
}

// Similarity distributions for the four pair groups and their KL divergence
// from the random group.
struct PairGroupReport {
    struct Group {
        std::string name;
        std::vector<double> scores;
        double mean = 0.0;
        std::optional<double> kl_vs_random;
    };
    std::vector<Group> groups;
    std::vector<std::string> skipped;
};

inline PairGroupReport pair_group_report(const PairScorer& scorer, const DisciplineCatalog& catalog,
                                         std::size_t pairs_per_group, std::uint64_t seed) {
    if (catalog.size() == 0) throw ConfigError("pair sampling needs a nonempty catalog");
    std::vector<PeriodicalId> universe;
    for (PeriodicalId id : catalog.labeled_ids())
        if (scorer.covers(id)) universe.push_back(id);
    if (universe.size() < 2) throw ConfigError("pair sampling needs at least two covered periodicals");

    std::map<std::string, std::vector<PeriodicalId>> by_disc;
    std::map<std::pair<std::string, std::string>, std::vector<PeriodicalId>> by_sub;
    for (PeriodicalId id : universe) {
        by_disc[catalog.discipline(id)].push_back(id);
        if (!catalog.sub_discipline(id).empty())
            by_sub[{catalog.discipline(id), catalog.sub_discipline(id)}].push_back(id);
    }

    Rng rng = derive_rng(seed, "pair-groups");
    PairGroupReport report;

    auto sample_distinct = [&](const std::vector<PeriodicalId>& pool) {
        std::size_t i = rng.index(pool.size());
        std::size_t j = rng.index(pool.size() - 1);
        if (j >= i) ++j;
        return std::pair{pool[i], pool[j]};
    };

    auto add_group = [&](const std::string& name, auto&& draw_pair, bool satisfiable) {
        if (!satisfiable) {
            report.skipped.push_back(name);
            return;
        }
        PairGroupReport::Group g;
        g.name = name;
        g.scores.reserve(pairs_per_group);
        for (std::size_t s = 0; s < pairs_per_group; ++s) {
            auto [a, b] = draw_pair();
            g.scores.push_back(scorer.score(a, b));
        }
        g.mean = mean_of(g.scores);
        report.groups.push_back(std::move(g));
    };

    add_group("random", [&] { return sample_distinct(universe); }, true);

    bool cross_ok = by_disc.size() >= 2;
    add_group(
        "cross-discipline",
        [&] {
            while (true) {
                auto [a, b] = sample_distinct(universe);
                if (catalog.discipline(a) != catalog.discipline(b)) return std::pair{a, b};
            }
        },
        cross_ok);

    // weighted choice of a class by its ordered-pair count, then a distinct
    // pair inside it; uniform over all qualifying pairs
    auto grouped_draw = [&](const auto& groups_map) {
        std::vector<const std::vector<PeriodicalId>*> pools;
        std::vector<double> cumulative;
        double total = 0.0;
        for (const auto& [key, members] : groups_map) {
            if (members.size() < 2) continue;
            total += static_cast<double>(members.size()) * static_cast<double>(members.size() - 1);
            pools.push_back(&members);
            cumulative.push_back(total);
        }
        return std::tuple{pools, cumulative, total};
    };

    auto [disc_pools, disc_cum, disc_total] = grouped_draw(by_disc);
    add_group(
        "within-discipline",
        [&, pools = disc_pools, cum = disc_cum, total = disc_total] {
            double u = rng.next_double() * total;
            std::size_t g = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
            if (g >= pools.size()) g = pools.size() - 1;
            return sample_distinct(*pools[g]);
        },
        !disc_pools.empty());

    auto [sub_pools, sub_cum, sub_total] = grouped_draw(by_sub);
    add_group(
        "within-sub-discipline",
        [&, pools = sub_pools, cum = sub_cum, total = sub_total] {
            double u = rng.next_double() * total;
            std::size_t g = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
            if (g >= pools.size()) g = pools.size() - 1;
            return sample_distinct(*pools[g]);
        },
        !sub_pools.empty());

    const PairGroupReport::Group* random_group = nullptr;
    for (const auto& g : report.groups)
        if (g.name == "random") random_group = &g;
    for (auto& g : report.groups) {
        if (&g == random_group) continue;
        g.kl_vs_random = kl_divergence_kde(g.scores, random_group->scores, scorer.kernel);
    }
    return report;
}

// Stratified fold assignment: ids grouped by discipline, shuffled, dealt
// round-robin. The folds partition the eligible set exactly.
inline std::vector<std::vector<PeriodicalId>> stratified_folds(
    const DisciplineCatalog& catalog, const std::vector<PeriodicalId>& universe, std::uint32_t folds,
    std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross validation needs at least 2 folds");
    std::map<std::string, std::vector<PeriodicalId>> by_disc;
    for (PeriodicalId id : universe) by_disc[catalog.discipline(id)].push_back(id);
    for (const auto& [disc, members] : by_disc)
        if (members.size() < folds)
            throw ConfigError("discipline '" + disc + "' has fewer periodicals than folds");

    Rng rng = derive_rng(seed, "folds");
    std::vector<std::vector<PeriodicalId>> out(folds);
    for (auto& [disc, members] : by_disc) {
        std::sort(members.begin(), members.end());
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.index(i)]);
        for (std::size_t i = 0; i < members.size(); ++i) out[i % folds].push_back(members[i]);
    }
    return out;
}

struct KnnReport {
    MeanCi macro_f1;
    MeanCi micro_f1;
    std::vector<double> fold_macro;
    std::vector<double> fold_micro;
    std::vector<std::vector<PeriodicalId>> folds;
};

// k-nearest-neighbor discipline prediction under stratified cross validation.
// Interdisciplinary periodicals are excluded. Vote ties break by the highest
// summed similarity, then by ascending discipline name.
inline KnnReport predict_discipline_knn(const PairScorer& scorer, const DisciplineCatalog& catalog,
                                        std::uint32_t k, std::uint32_t folds, std::uint64_t seed,
                                        const std::string& exclude_label = kInterdisciplineLabel) {
    if (k < 1) throw ConfigError("k must be >= 1");
    std::vector<PeriodicalId> universe;
    for (PeriodicalId id : catalog.labeled_ids())
        if (scorer.covers(id) && catalog.discipline(id) != exclude_label) universe.push_back(id);
    if (universe.empty()) throw ConfigError("no labeled periodicals covered by the scorer");

    KnnReport report;
    report.folds = stratified_folds(catalog, universe, folds, seed);

    for (std::uint32_t f = 0; f < folds; ++f) {
        std::vector<PeriodicalId> training;
        for (std::uint32_t g = 0; g < folds; ++g)
            if (g != f) training.insert(training.end(), report.folds[g].begin(), report.folds[g].end());
        std::sort(training.begin(), training.end());
        if (k > training.size()) throw ConfigError("k exceeds the training-set size");

        std::map<std::string, std::array<std::uint64_t, 3>> confusion;  // tp, fp, fn
        std::uint64_t correct = 0;
        for (PeriodicalId test : report.folds[f]) {
            std::vector<Scored> scored;
            scored.reserve(training.size());
            for (PeriodicalId train : training) scored.push_back({train, scorer.score(test, train)});
            std::partial_sort(scored.begin(), scored.begin() + k, scored.end(),
                              [](const Scored& a, const Scored& b) {
                                  return a.score != b.score ? a.score > b.score : a.id < b.id;
                              });
            std::map<std::string, std::pair<std::uint32_t, double>> votes;  // count, summed sim
            for (std::uint32_t i = 0; i < k; ++i) {
                auto& v = votes[catalog.discipline(scored[i].id)];
                ++v.first;
                v.second += scored[i].score;
            }
            const std::string* winner = nullptr;
            std::pair<std::uint32_t, double> best{0, 0.0};
            for (const auto& [disc, v] : votes) {
                if (!winner || v.first > best.first || (v.first == best.first && v.second > best.second)) {
                    winner = &disc;
                    best = v;
                }
                // equal count and equal sum keeps the earlier (ascending) name
            }
            const std::string& truth = catalog.discipline(test);
            if (*winner == truth) {
                ++correct;
                ++confusion[truth][0];
            } else {
                ++confusion[*winner][1];
                ++confusion[truth][2];
            }
        }
        double macro = 0.0;
        std::size_t classes = 0;
        for (const auto& [disc, c] : confusion) {
            double denom = 2.0 * c[0] + c[1] + c[2];
            if (denom == 0.0) continue;
            macro += 2.0 * c[0] / denom;
            ++classes;
        }
        report.fold_macro.push_back(classes ? macro / classes : 0.0);
        report.fold_micro.push_back(static_cast<double>(correct) / report.folds[f].size());
    }
    report.macro_f1 = mean_ci95(report.fold_macro);
    report.micro_f1 = mean_ci95(report.fold_micro);
    return report;
}

struct KmeansResult {
    std::vector<PeriodicalId> ids;
    std::vector<std::uint32_t> assignment;  // aligned with ids
    double inertia = 0.0;

    std::unordered_map<PeriodicalId, std::uint32_t> as_map() const {
        std::unordered_map<PeriodicalId, std::uint32_t> m;
        for (std::size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], assignment[i]);
        return m;
    }
};

// Lloyd's k-means with k-means++ seeding over the unit-normalized vectors,
// best inertia across restarts. An emptied cluster is reseeded from the point
// farthest from its assigned centroid.
inline KmeansResult kmeans_cluster(const VectorStore& store, std::vector<PeriodicalId> ids,
                                   std::uint32_t k, std::uint32_t restarts, std::uint64_t seed) {
    if (ids.empty()) throw ConfigError("k-means needs at least one point");
    if (k < 1 || k > ids.size()) throw ConfigError("k must lie in [1, point count]");
    if (restarts < 1) restarts = 1;
    std::sort(ids.begin(), ids.end());
    const std::size_t n = ids.size();
    const std::uint32_t d = store.dim();

    std::vector<double> points(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = store.vector(ids[i]);
        std::copy(v.begin(), v.end(), points.begin() + i * d);
    }
    auto dist2 = [&](const double* a, const double* b) {
        double s = 0.0;
        for (std::uint32_t j = 0; j < d; ++j) {
            double diff = a[j] - b[j];
            s += diff * diff;
        }
        return s;
    };

    KmeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();

    for (std::uint32_t r = 0; r < restarts; ++r) {
        Rng rng = derive_rng(seed, "kmeans", r);
        std::vector<double> centroids(std::size_t(k) * d);
        std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

        // k-means++ seeding
        std::size_t first = rng.index(n);
        std::copy(points.begin() + first * d, points.begin() + (first + 1) * d, centroids.begin());
        for (std::uint32_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double dd = dist2(points.data() + i * d, centroids.data() + std::size_t(c - 1) * d);
                min_d2[i] = std::min(min_d2[i], dd);
                total += min_d2[i];
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                double u = rng.next_double() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += min_d2[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = rng.index(n);
            }
            std::copy(points.begin() + pick * d, points.begin() + (pick + 1) * d,
                      centroids.begin() + std::size_t(c) * d);
        }

        std::vector<std::uint32_t> assign(n, 0);
        std::vector<std::size_t> counts(k, 0);
        double inertia = 0.0;
        for (std::size_t iter = 0; iter < 100; ++iter) {
            bool changed = iter == 0;
            inertia = 0.0;
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                std::uint32_t bestc = 0;
                double bestd = std::numeric_limits<double>::infinity();
                for (std::uint32_t c = 0; c < k; ++c) {
                    double dd = dist2(points.data() + i * d, centroids.data() + std::size_t(c) * d);
                    if (dd < bestd) {
                        bestd = dd;
                        bestc = c;
                    }
                }
                if (assign[i] != bestc) {
                    assign[i] = bestc;
                    changed = true;
                }
                ++counts[bestc];
                inertia += bestd;
            }
            // reseed empty clusters from the farthest point
            for (std::uint32_t c = 0; c < k; ++c) {
                if (counts[c] != 0) continue;
                std::size_t far = 0;
                double fard = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double dd = dist2(points.data() + i * d, centroids.data() + std::size_t(assign[i]) * d);
                    if (dd > fard && counts[assign[i]] > 1) {
                        fard = dd;
                        far = i;
                    }
                }
                --counts[assign[far]];
                assign[far] = c;
                counts[c] = 1;
                changed = true;
            }
            if (!changed) break;
            std::fill(centroids.begin(), centroids.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double* cen = centroids.data() + std::size_t(assign[i]) * d;
                const double* p = points.data() + i * d;
                for (std::uint32_t j = 0; j < d; ++j) cen[j] += p[j];
            }
            for (std::uint32_t c = 0; c < k; ++c) {
                double* cen = centroids.data() + std::size_t(c) * d;
                for (std::uint32_t j = 0; j < d; ++j) cen[j] /= static_cast<double>(counts[c]);
            }
        }
        if (inertia < best.inertia) {
            best.ids = ids;
            best.assignment = assign;
            best.inertia = inertia;
        }
    }
    return best;
}

inline KmeansResult kmeans_cluster(const VectorStore& store, std::uint32_t k, std::uint32_t restarts,
                                   std::uint64_t seed) {
    return kmeans_cluster(store, store.ids(), k, restarts, seed);
}

// Per-element clustering agreement. For hard partitions the alpha-personalized
// affinity has the closed form of uniform alpha-mass over the element's
// cluster plus (1 - alpha) self-mass; the resulting score does not depend on
// alpha, which is kept for interface parity and validated.
struct ClusteringAgreement {
    std::vector<std::pair<PeriodicalId, double>> scores;  // ascending id
    double mean = 0.0;
};

inline ClusteringAgreement element_centric_similarity(
    const std::unordered_map<PeriodicalId, std::uint32_t>& a,
    const std::unordered_map<PeriodicalId, std::uint32_t>& b, double alpha = 0.9) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("element-centric alpha must lie in (0, 1)");
    if (a.size() != b.size()) throw IntegrityError("clusterings cover different element sets");
    for (const auto& [id, cl] : a)
        if (!b.contains(id)) throw IntegrityError("element " + std::to_string(id) + " missing from one clustering");

    std::unordered_map<std::uint32_t, std::size_t> size_a, size_b;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
    for (const auto& [id, ca] : a) {
        std::uint32_t cb = b.at(id);
        ++size_a[ca];
        ++size_b[cb];
        ++joint[{ca, cb}];
    }

    ClusteringAgreement out;
    out.scores.reserve(a.size());
    double total = 0.0;
    for (const auto& [id, ca] : a) {
        std::uint32_t cb = b.at(id);
        double na = static_cast<double>(size_a.at(ca));
        double nb = static_cast<double>(size_b.at(cb));
        double m = static_cast<double>(joint.at({ca, cb}));
        double l1 = m * std::abs(1.0 / na - 1.0 / nb) + (na - m) / na + (nb - m) / nb;
        double score = 1.0 - l1 / 2.0;
        out.scores.emplace_back(id, score);
        total += score;
    }
    std::sort(out.scores.begin(), out.scores.end());
    out.mean = total / static_cast<double>(out.scores.size());
    return out;
}

// Kendall's tau-a over the common elements of two ranked lists. Undefined
// (empty result) when fewer than two elements are shared.
inline std::optional<double> kendall_tau(std::span<const PeriodicalId> r1,
                                         std::span<const PeriodicalId> r2) {
    std::unordered_map<PeriodicalId, std::size_t> pos2;
    for (std::size_t i = 0; i < r2.size(); ++i) pos2.emplace(r2[i], i);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < r1.size(); ++i) {
        auto it = pos2.find(r1[i]);
        if (it == pos2.end()) continue;
        x.push_back(static_cast<double>(i));
        y.push_back(static_cast<double>(it->second));
    }
    if (x.size() < 2) return std::nullopt;
    return kendall_tau_a(x, y);
}

// One expert ranking of candidates for a target periodical; unfamiliar
// candidates live in an unordered bucket.
struct RankedReference {
    PeriodicalId target = 0;
    std::vector<PeriodicalId> ranked;
    std::vector<PeriodicalId> unfamiliar;
    std::size_t line_no = 0;
};

inline std::vector<RankedReference> load_rankings(const std::string& path) {
    std::vector<RankedReference> refs;
    LineReader reader(path);
    std::string_view line;
    auto parse_ids = [&](std::string_view text) {
        std::vector<PeriodicalId> ids;
        for (std::string_view tok : split_fields(text, ','))
            if (!tok.empty()) ids.push_back(parse_u64(tok, "periodical id", reader.line_no()));
        return ids;
    };
    while (reader.next(line)) {
        auto fields = split_fields(line);
        if (fields.size() < 2 || fields.size() > 3)
            throw ParseError("expected 'target<TAB>ranked:...[<TAB>unfamiliar:...]'", reader.line_no());
        RankedReference ref;
        ref.line_no = reader.line_no();
        ref.target = parse_u64(fields[0], "target id", reader.line_no());
        if (!fields[1].starts_with("ranked:"))
            throw ParseError("second field must start with 'ranked:'", reader.line_no());
        ref.ranked = parse_ids(fields[1].substr(7));
        if (fields.size() == 3) {
            if (!fields[2].starts_with("unfamiliar:"))
                throw ParseError("third field must start with 'unfamiliar:'", reader.line_no());
            ref.unfamiliar = parse_ids(fields[2].substr(11));
        }
        if (ref.ranked.empty()) throw ParseError("ranked list must not be empty", reader.line_no());
        refs.push_back(std::move(ref));
    }
    return refs;
}

struct RankEvalRow {
    std::string scorer;
    MeanCi tau;
    std::size_t lists = 0;
};

// Mean Kendall tau between each scorer's induced candidate order and the
// reference lists, over targets whose average pairwise expert agreement
// exceeds the threshold. Unfamiliar candidates are appended to the expert
// list in seeded random order.
inline std::vector<RankEvalRow> rank_evaluation(const std::vector<RankedReference>& refs,
                                                std::span<const PairScorer> scorers, std::uint64_t seed,
                                                double agreement_threshold = 0.2) {
    std::map<PeriodicalId, std::vector<const RankedReference*>> by_target;
    for (const auto& r : refs) by_target[r.target].push_back(&r);

    std::vector<const RankedReference*> kept;
    for (const auto& [target, lists] : by_target) {
        if (lists.size() < 2) continue;
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < lists.size(); ++i) {
            for (std::size_t j = i + 1; j < lists.size(); ++j) {
                auto tau = kendall_tau(lists[i]->ranked, lists[j]->ranked);
                if (!tau) continue;
                sum += *tau;
                ++pairs;
            }
        }
        if (pairs == 0) continue;
        if (sum / static_cast<double>(pairs) > agreement_threshold)
            kept.insert(kept.end(), lists.begin(), lists.end());
    }

    std::vector<RankEvalRow> rows;
    for (const auto& scorer : scorers) {
        std::vector<double> taus;
        for (const RankedReference* ref : kept) {
            std::vector<PeriodicalId> expert = ref->ranked;
            std::vector<PeriodicalId> tail = ref->unfamiliar;
            Rng rng = derive_rng(seed, "rank-eval", ref->line_no);
            for (std::size_t i = tail.size(); i > 1; --i) std::swap(tail[i - 1], tail[rng.index(i)]);
            expert.insert(expert.end(), tail.begin(), tail.end());

            std::vector<Scored> scored;
            scored.reserve(expert.size());
            for (PeriodicalId c : expert) scored.push_back({c, scorer.score(ref->target, c)});
            std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
                return a.score != b.score ? a.score > b.score : a.id < b.id;
            });
            std::vector<PeriodicalId> algo;
            algo.reserve(scored.size());
            for (const auto& s : scored) algo.push_back(s.id);

            auto tau = kendall_tau(expert, algo);
            if (tau) taus.push_back(*tau);
        }
        rows.push_back({scorer.name, mean_ci95(taus), taus.size()});
    }
    return rows;
}

// Publication-venue predictor fed with the venues of a paper's references.
struct VenueModel {
    std::string name;
    std::function<std::optional<PeriodicalId>(std::span<const PeriodicalId>)> predict;
};

inline VenueModel make_majority_venue_model() {
    return {"majority", [](std::span<const PeriodicalId> refs) { return predict_venue_majority(refs); }};
}

// Predicts the periodical closest (by cosine) to the mean vector of the cited
// periodicals.
inline VenueModel make_embedding_venue_model(const VectorStore& store, std::string name = "p2v") {
    VenueModel m;
    m.name = std::move(name);
    m.predict = [&store](std::span<const PeriodicalId> refs) -> std::optional<PeriodicalId> {
        std::vector<double> mean(store.dim(), 0.0);
        std::size_t used = 0;
        for (PeriodicalId r : refs) {
            if (!store.contains(r)) continue;
            auto v = store.vector(r);
            for (std::uint32_t j = 0; j < store.dim(); ++j) mean[j] += v[j];
            ++used;
        }
        if (used == 0) return std::nullopt;
        auto top = rank_by_cosine(store, mean, 1);
        if (top.empty()) return std::nullopt;
        return top[0].id;
    };
    return m;
}

inline VenueModel make_sparse_venue_model(std::string name, const PeriodicalCitationMatrix& matrix,
                                          bool use_jaccard_rows) {
    auto table = use_jaccard_rows ? detail::jaccard_table(matrix) : detail::citation_vector_table(matrix);
    VenueModel m;
    m.name = std::move(name);
    m.predict = [table](std::span<const PeriodicalId> refs) -> std::optional<PeriodicalId> {
        const auto& matrix = *table->matrix;
        std::unordered_map<std::uint64_t, double> mean;
        std::size_t used = 0;
        for (PeriodicalId r : refs) {
            if (!matrix.contains(r)) continue;
            for (const auto& [idx, val] : table->vectors[matrix.index_of(r)]. entries) mean[idx] += val;
            ++used;
        }
        if (used == 0 || mean.empty()) return std::nullopt;
        double mean_norm = 0.0;
        for (const auto& [idx, val] : mean) mean_norm += val * val;
        mean_norm = std::sqrt(mean_norm);
        if (mean_norm == 0.0) return std::nullopt;

        std::optional<PeriodicalId> best;
        double best_score = -2.0;
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            const SparseVec& v = table->vectors[i];
            double norm = v.norm();
            if (norm == 0.0) continue;
            double dot = 0.0;
            for (const auto& [idx, val] : v.entries) {
                auto it = mean.find(idx);
                if (it != mean.end()) dot += val * it->second;
            }
            double score = dot / (norm * mean_norm);
            PeriodicalId id = matrix.ids()[i];
            if (score > best_score || (score == best_score && best && id < *best)) {
                best_score = score;
                best = id;
            }
        }
        return best;
    };
    return m;
}

struct VenueAccuracy {
    std::string model;
    MeanCi accuracy;
    std::vector<double> per_repeat;
};

// Samples papers with at least one reference and scores exact venue matches.
// Each repetition draws a fresh sample from a derived stream.
inline std::vector<VenueAccuracy> venue_prediction_eval(const PaperGraph& g,
                                                        std::span<const VenueModel> models,
                                                        std::size_t sample, std::size_t repeats,
                                                        std::uint64_t seed) {
    if (g.edge_count() == 0) throw ConfigError("venue prediction needs a graph with citations");
    if (sample == 0 || repeats == 0) throw ConfigError("sample and repeats must be positive");

    std::vector<VenueAccuracy> out(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) out[m].model = models[m].name;

    for (std::size_t rep = 0; rep < repeats; ++rep) {
        Rng rng = derive_rng(seed, "venue-eval", rep);
        std::vector<std::uint64_t> hits(models.size(), 0);
        for (std::size_t s = 0; s < sample; ++s) {
            std::uint32_t paper;
            do {
                paper = static_cast<std::uint32_t>(rng.below(g.paper_count()));
            } while (g.out_degree(paper) == 0);
            auto refs = cited_venues(g, paper);
            PeriodicalId truth = g.paper_venue(paper);
            for (std::size_t m = 0; m < models.size(); ++m) {
                auto pred = models[m].predict(refs);
                if (pred && *pred == truth) ++hits[m];
            }
        }
        for (std::size_t m = 0; m < models.size(); ++m)
            out[m].per_repeat.push_back(static_cast<double>(hits[m]) / static_cast<double>(sample));
    }
    for (auto& row : out) row.accuracy = mean_ci95(row.per_repeat);
    return out;
}

}  // namespace perivec
