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
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "perivec/corpus.hpp"
#include "perivec/error.hpp"
#include "perivec/sgns.hpp"
#include "perivec/tsv.hpp"

namespace perivec {

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        dot += a[j] * b[j];
        na += a[j] * a[j];
        nb += b[j] * b[j];
    }
    if (na == 0.0 || nb == 0.0) throw NumericError("cosine similarity undefined for a zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct PeriodicalInfo {
    std::string name;
    std::string discipline;
    std::string sub_discipline;
};

// Read-only store of unit-normalized periodical vectors with an optional
// name/label table. Immutable after load; queries are thread-safe.
class VectorStore {
public:
    static VectorStore load(const std::string& model_path, const std::string& metadata_path = {}) {
        EmbeddingMatrix m = EmbeddingMatrix::load(model_path);
        VectorStore store = from_rows(m.ids, m.input, m.dimension);
        if (!metadata_path.empty()) store.attach_metadata(metadata_path);
        return store;
    }

    static VectorStore from_rows(std::vector<PeriodicalId> ids, std::vector<double> vectors,
                                 std::uint32_t dim) {
        VectorStore store;
        store.dim_ = dim;
        store.ids_ = std::move(ids);
        store.vectors_ = std::move(vectors);
        if (store.vectors_.size() != store.ids_.size() * std::size_t(dim))
            throw IntegrityError("vector table size does not match id count");
        for (std::size_t i = 0; i < store.ids_.size(); ++i) {
            if (!store.index_.emplace(store.ids_[i], static_cast<std::uint32_t>(i)).second)
                throw IntegrityError("duplicate periodical id " + std::to_string(store.ids_[i]));
            double* row = store.vectors_.data() + i * dim;
            double norm = 0.0;
            for (std::uint32_t j = 0; j < dim; ++j) norm += row[j] * row[j];
            norm = std::sqrt(norm);
            if (norm == 0.0)
                throw NumericError("periodical " + std::to_string(store.ids_[i]) + " has a zero vector");
            for (std::uint32_t j = 0; j < dim; ++j) row[j] /= norm;
        }
        return store;
    }

    // periodicals.tsv: id, name, and optionally discipline / sub-discipline
    void attach_metadata(const std::string& path) {
        LineReader reader(path);
        std::string_view line;
        while (reader.next(line)) {
            auto fields = split_fields(line);
            if (fields.size() < 2 || fields.size() > 4)
                throw ParseError("expected 2-4 tab-separated fields in periodicals file", reader.line_no());
            PeriodicalInfo info;
            PeriodicalId id = parse_u64(fields[0], "periodical id", reader.line_no());
            info.name = std::string(fields[1]);
            if (fields.size() > 2) info.discipline = std::string(fields[2]);
            if (fields.size() > 3) info.sub_discipline = std::string(fields[3]);
            info_[id] = std::move(info);
        }
    }

    std::uint32_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<PeriodicalId>& ids() const { return ids_; }
    bool contains(PeriodicalId id) const { return index_.contains(id); }

    std::span<const double> vector(PeriodicalId id) const {
        return {vectors_.data() + std::size_t(row_of(id)) * dim_, dim_};
    }

    std::string name(PeriodicalId id) const {
        auto it = info_.find(id);
        return it != info_.end() && !it->second.name.empty() ? it->second.name : std::to_string(id);
    }
    std::string discipline(PeriodicalId id) const {
        auto it = info_.find(id);
        return it != info_.end() ? it->second.discipline : std::string();
    }
    std::string sub_discipline(PeriodicalId id) const {
        auto it = info_.find(id);
        return it != info_.end() ? it->second.sub_discipline : std::string();
    }

private:
    std::uint32_t row_of(PeriodicalId id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw LookupError("unknown periodical id " + std::to_string(id));
        return it->second;
    }

    std::uint32_t dim_ = 0;
    std::vector<PeriodicalId> ids_;
    std::vector<double> vectors_;
    std::unordered_map<PeriodicalId, std::uint32_t> index_;
    std::unordered_map<PeriodicalId, PeriodicalInfo> info_;
};

struct Scored {
    PeriodicalId id;
    double score;
};

// Exact linear scan over the store, ranked by cosine to `query`, ties broken
// by ascending id.
inline std::vector<Scored> rank_by_cosine(const VectorStore& store, std::span<const double> query,
                                          std::size_t top_n,
                                          const std::unordered_set<PeriodicalId>& exclude = {}) {
    double qnorm = 0.0;
    for (double x : query) qnorm += x * x;
    if (qnorm == 0.0) throw NumericError("cosine ranking undefined for a zero query vector");
    qnorm = std::sqrt(qnorm);

    std::vector<Scored> scored;
    scored.reserve(store.size());
    for (PeriodicalId id : store.ids()) {
        if (exclude.contains(id)) continue;
        auto v = store.vector(id);
        double dot = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) dot += v[j] * query[j];
        scored.push_back({id, dot / qnorm});  // stored vectors are unit length
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (scored.size() > top_n) scored.resize(top_n);
    return scored;
}

inline std::vector<Scored> most_similar(const VectorStore& store, PeriodicalId p, std::size_t top_n,
                                        const std::unordered_set<PeriodicalId>& exclude = {}) {
    auto query = store.vector(p);
    std::unordered_set<PeriodicalId> skip = exclude;
    skip.insert(p);
    return rank_by_cosine(store, query, top_n, skip);
}

// Ranks candidates for the analogy v(c) - v(a) + v(b); a, b and c never
// appear in the result. The composite vector is not re-normalized.
inline std::vector<Scored> analogy_query(const VectorStore& store, PeriodicalId a, PeriodicalId b,
                                         PeriodicalId c, std::size_t top_n) {
    auto va = store.vector(a);
    auto vb = store.vector(b);
    auto vc = store.vector(c);
    std::vector<double> composite(store.dim());
    for (std::uint32_t j = 0; j < store.dim(); ++j) composite[j] = vc[j] - va[j] + vb[j];
    return rank_by_cosine(store, composite, top_n, {a, b, c});
}

// Difference of two pole-set centroids.
struct Axis {
    std::vector<PeriodicalId> positive;
    std::vector<PeriodicalId> negative;
    std::vector<double> centroid_positive;
    std::vector<double> centroid_negative;
    std::vector<double> direction;  // centroid_positive - centroid_negative
};

inline Axis build_axis(const VectorStore& store, const std::vector<PeriodicalId>& pos,
                       const std::vector<PeriodicalId>& neg) {
    if (pos.empty() || neg.empty()) throw ConfigError("axis pole sets must be nonempty");
    for (PeriodicalId p : pos)
        if (std::find(neg.begin(), neg.end(), p) != neg.end())
            throw ConfigError("axis pole sets must be disjoint (periodical " + std::to_string(p) + ")");

    auto centroid = [&](const std::vector<PeriodicalId>& members) {
        std::vector<double> c(store.dim(), 0.0);
        for (PeriodicalId id : members) {
            auto v = store.vector(id);
            for (std::uint32_t j = 0; j < store.dim(); ++j) c[j] += v[j];
        }
        for (double& x : c) x /= static_cast<double>(members.size());
        return c;
    };

    Axis axis;
    axis.positive = pos;
    axis.negative = neg;
    axis.centroid_positive = centroid(pos);
    axis.centroid_negative = centroid(neg);
    axis.direction.resize(store.dim());
    double norm = 0.0;
    for (std::uint32_t j = 0; j < store.dim(); ++j) {
        axis.direction[j] = axis.centroid_positive[j] - axis.centroid_negative[j];
        norm += axis.direction[j] * axis.direction[j];
    }
    if (norm == 0.0) throw NumericError("degenerate axis: pole centroids coincide");
    return axis;
}

inline double project_on_axis(const VectorStore& store, PeriodicalId p, const Axis& axis) {
    return cosine_similarity(store.vector(p), axis.direction);
}

}  // namespace perivec
