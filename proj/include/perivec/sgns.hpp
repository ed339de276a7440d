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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "perivec/corpus.hpp"
#include "perivec/error.hpp"
#include "perivec/rng.hpp"
#include "perivec/tsv.hpp"

namespace perivec {

// Exact corpus frequencies of the kept periodicals. Rows are ordered by
// descending frequency (ties by ascending id) so the vocabulary layout is
// deterministic.
struct Vocabulary {
    std::vector<PeriodicalId> ids;
    std::vector<std::uint64_t> frequencies;
    std::unordered_map<PeriodicalId, std::uint32_t> index;
    std::uint64_t total_tokens = 0;       // kept-token occurrences
    std::uint64_t dropped_periodicals = 0;

    std::uint32_t size() const { return static_cast<std::uint32_t>(ids.size()); }

    std::uint32_t index_of(PeriodicalId id) const {
        auto it = index.find(id);
        if (it == index.end()) throw LookupError("periodical " + std::to_string(id) + " not in vocabulary");
        return it->second;
    }
    bool contains(PeriodicalId id) const { return index.contains(id); }
};

namespace detail {

inline Vocabulary vocabulary_from_counts(std::unordered_map<PeriodicalId, std::uint64_t>&& counts,
                                         std::uint64_t min_count) {
    std::vector<std::pair<PeriodicalId, std::uint64_t>> kept;
    std::uint64_t dropped = 0;
    for (const auto& [id, freq] : counts) {
        if (freq >= min_count)
            kept.emplace_back(id, freq);
        else
            ++dropped;
    }
    if (kept.empty()) throw ConfigError("vocabulary empty: no periodical reaches the minimum frequency");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Vocabulary vocab;
    vocab.dropped_periodicals = dropped;
    vocab.ids.reserve(kept.size());
    vocab.frequencies.reserve(kept.size());
    for (const auto& [id, freq] : kept) {
        vocab.index.emplace(id, static_cast<std::uint32_t>(vocab.ids.size()));
        vocab.ids.push_back(id);
        vocab.frequencies.push_back(freq);
        vocab.total_tokens += freq;
    }
    return vocab;
}

}  // namespace detail

inline Vocabulary build_vocabulary(const TrailCorpus& corpus, std::uint64_t min_count) {
    if (corpus.trails.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
    std::unordered_map<PeriodicalId, std::uint64_t> counts;
    for (const auto& trail : corpus.trails)
        for (PeriodicalId id : trail) ++counts[id];
    return detail::vocabulary_from_counts(std::move(counts), min_count);
}

inline Vocabulary build_vocabulary_file(const std::string& corpus_path, std::uint64_t min_count) {
    std::unordered_map<PeriodicalId, std::uint64_t> counts;
    LineReader reader(corpus_path);
    std::string_view line;
    bool any = false;
    while (reader.next(line)) {
        any = true;
        for (std::string_view tok : split_fields(line, ' ')) {
            if (tok.empty()) continue;
            ++counts[parse_u64(tok, "periodical id", reader.line_no())];
        }
    }
    if (!any) throw ConfigError("cannot build a vocabulary from an empty corpus");
    return detail::vocabulary_from_counts(std::move(counts), min_count);
}

// Smoothed unigram distribution p_i = f_i^alpha / sum_j f_j^alpha with an
// alias table for O(1) draws.
class NoiseDistribution {
public:
    static NoiseDistribution build(const Vocabulary& vocab, double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("noise smoothing exponent must lie in (0, 1]");
        NoiseDistribution dist;
        dist.alpha_ = alpha;
        const std::size_t n = vocab.size();
        dist.probs_.resize(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist.probs_[i] = std::pow(static_cast<double>(vocab.frequencies[i]), alpha);
            total += dist.probs_[i];
        }
        for (double& p : dist.probs_) p /= total;
        dist.build_alias();
        return dist;
    }

    double probability(std::uint32_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }
    double alpha() const { return alpha_; }

    std::uint32_t sample(Rng& rng) const {
        std::uint32_t slot = static_cast<std::uint32_t>(rng.below(probs_.size()));
        return rng.next_double() < accept_[slot] ? slot : alias_[slot];
    }

private:
    // Walker alias method.
    void build_alias() {
        const std::size_t n = probs_.size();
        accept_.assign(n, 1.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = probs_[i] * static_cast<double>(n);
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            std::uint32_t s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            accept_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = scaled[l] + scaled[s] - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (std::uint32_t s : small) accept_[s] = 1.0;
        for (std::uint32_t l : large) accept_[l] = 1.0;
    }

    double alpha_ = 0.75;
    std::vector<double> probs_;
    std::vector<double> accept_;
    std::vector<std::uint32_t> alias_;
};

struct TrainConfig {
    std::uint32_t window = 10;
    std::uint32_t dimension = 100;
    std::uint32_t negatives = 5;
    std::uint64_t min_count = 50;
    std::uint32_t epochs = 5;
    double initial_lr = 0.025;
    double final_lr = 1e-4;
    double noise_exponent = 0.75;
    double subsample = 0.0;  // 0 disables frequent-token subsampling
    bool fixed_window = false;
    std::uint64_t seed = 1;

    void validate() const {
        if (window < 1 || dimension < 1 || negatives < 1) throw ConfigError("window, dimension and negatives must be >= 1");
        if (!(initial_lr > 0.0) || !(final_lr > 0.0) || !(initial_lr > final_lr))
            throw ConfigError("learning rates must be positive and decreasing");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
    }
};

// Input and output vector tables; the input table is the published embedding.
struct EmbeddingMatrix {
    std::uint32_t dimension = 0;
    std::vector<PeriodicalId> ids;   // row order
    std::vector<double> input;       // ids.size() x dimension
    std::vector<double> output;
    TrainConfig config;              // training metadata

    std::size_t rows() const { return ids.size(); }

    std::span<double> input_row(std::uint32_t i) { return {input.data() + std::size_t(i) * dimension, dimension}; }
    std::span<const double> input_row(std::uint32_t i) const {
        return {input.data() + std::size_t(i) * dimension, dimension};
    }
    std::span<double> output_row(std::uint32_t i) { return {output.data() + std::size_t(i) * dimension, dimension}; }
    std::span<const double> output_row(std::uint32_t i) const {
        return {output.data() + std::size_t(i) * dimension, dimension};
    }

    void save(const std::string& path) const { save_table(path, input); }
    void save_output(const std::string& path) const { save_table(path, output); }

    static EmbeddingMatrix load(const std::string& path) {
        LineReader reader(path);
        std::string_view line;
        if (!reader.next(line)) throw ParseError("missing model header", 1);
        auto header = split_fields(line, ' ');
        if (header.size() != 2) throw ParseError("model header must be '<vocab> <dimension>'", reader.line_no());
        std::uint64_t rows = parse_u64(header[0], "vocabulary size", reader.line_no());
        std::uint64_t dim = parse_u64(header[1], "dimension", reader.line_no());
        EmbeddingMatrix m;
        m.dimension = static_cast<std::uint32_t>(dim);
        m.ids.reserve(rows);
        m.input.reserve(rows * dim);
        while (reader.next(line)) {
            auto fields = split_fields(line, ' ');
            if (fields.size() != dim + 1)
                throw ParseError("model row must have one id and " + std::to_string(dim) + " values",
                                 reader.line_no());
            m.ids.push_back(parse_u64(fields[0], "periodical id", reader.line_no()));
            for (std::size_t j = 1; j < fields.size(); ++j)
                m.input.push_back(parse_double(fields[j], "vector component", reader.line_no()));
        }
        if (m.ids.size() != rows)
            throw ParseError("model header announces " + std::to_string(rows) + " rows, found " +
                                 std::to_string(m.ids.size()),
                             reader.line_no());
        return m;
    }

private:
    void save_table(const std::string& path, const std::vector<double>& table) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write model file: " + path);
        out << ids.size() << ' ' << dimension << '\n';
        for (std::size_t i = 0; i < ids.size(); ++i) {
            out << ids[i];
            for (std::uint32_t j = 0; j < dimension; ++j)
                out << ' ' << format_double(table[i * dimension + j]);
            out << '\n';
        }
    }
};

// Stable logistic; clamped into the open interval so callers can rely on
// sigma in (0,1) even when exp underflows.
inline double sigmoid(double x) {
    double s;
    if (x >= 0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        double e = std::exp(x);
        s = e / (1.0 + e);
    }
    const double tiny = std::numeric_limits<double>::min();
    const double below_one = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return std::min(std::max(s, tiny), below_one);
}

// Gradients of E = log sigma(v'(ctx) . v(cen)) + sum_i log sigma(-v'(neg_i) . v(cen))
// with respect to the rows the pair touches. Slots are aligned with the
// negatives argument; duplicate ids accumulate when applied.
struct PairGradient {
    std::vector<double> center_input;
    std::vector<double> context_output;
    std::vector<std::vector<double>> negative_output;
};

inline PairGradient sgns_pair_gradient(const EmbeddingMatrix& m, std::uint32_t center,
                                       std::uint32_t context, std::span<const std::uint32_t> negatives) {
    const std::uint32_t d = m.dimension;
    auto v_in = m.input_row(center);
    auto v_ctx = m.output_row(context);

    PairGradient grad;
    grad.center_input.assign(d, 0.0);
    grad.context_output.assign(d, 0.0);
    grad.negative_output.resize(negatives.size());

    double dot = 0.0;
    for (std::uint32_t j = 0; j < d; ++j) dot += v_ctx[j] * v_in[j];
    double g_pos = 1.0 - sigmoid(dot);
    for (std::uint32_t j = 0; j < d; ++j) {
        grad.context_output[j] = g_pos * v_in[j];
        grad.center_input[j] = g_pos * v_ctx[j];
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        auto v_neg = m.output_row(negatives[i]);
        double ndot = 0.0;
        for (std::uint32_t j = 0; j < d; ++j) ndot += v_neg[j] * v_in[j];
        double g_neg = -sigmoid(ndot);
        auto& slot = grad.negative_output[i];
        slot.assign(d, 0.0);
        for (std::uint32_t j = 0; j < d; ++j) {
            slot[j] = g_neg * v_in[j];
            grad.center_input[j] += g_neg * v_neg[j];
        }
    }
    return grad;
}

namespace detail {

struct PairScratch {
    std::vector<double> center;  // accumulated center-row step
    std::vector<double> neg_g;   // per-negative coefficients
};

// Fused ascent step. Every dot product reads the rows as they were before
// the step, so the result is exactly lr times the simultaneous gradient even
// when ids repeat in the negatives list.
inline void pair_update(EmbeddingMatrix& m, std::uint32_t center, std::uint32_t context,
                        std::span<const std::uint32_t> negatives, double lr, PairScratch& scratch) {
    const std::uint32_t d = m.dimension;
    double* v_in = m.input.data() + std::size_t(center) * d;
    double* v_ctx = m.output.data() + std::size_t(context) * d;
    scratch.center.assign(d, 0.0);
    scratch.neg_g.resize(negatives.size());

    double dot = 0.0;
    for (std::uint32_t j = 0; j < d; ++j) dot += v_ctx[j] * v_in[j];
    double g_pos = (1.0 - sigmoid(dot)) * lr;
    for (std::uint32_t j = 0; j < d; ++j) scratch.center[j] = g_pos * v_ctx[j];

    for (std::size_t i = 0; i < negatives.size(); ++i) {
        const double* v_neg = m.output.data() + std::size_t(negatives[i]) * d;
        double ndot = 0.0;
        for (std::uint32_t j = 0; j < d; ++j) ndot += v_neg[j] * v_in[j];
        double g_neg = -sigmoid(ndot) * lr;
        scratch.neg_g[i] = g_neg;
        for (std::uint32_t j = 0; j < d; ++j) scratch.center[j] += g_neg * v_neg[j];
    }
    for (std::size_t i = 0; i < negatives.size(); ++i) {
        double* v_neg = m.output.data() + std::size_t(negatives[i]) * d;
        double g_neg = scratch.neg_g[i];
        for (std::uint32_t j = 0; j < d; ++j) v_neg[j] += g_neg * v_in[j];
    }
    for (std::uint32_t j = 0; j < d; ++j) v_ctx[j] += g_pos * v_in[j];
    for (std::uint32_t j = 0; j < d; ++j) v_in[j] += scratch.center[j];
}

}  // namespace detail

// One stochastic ascent step on the pair objective. Touches the center input
// row, the context output row and the negatives' output rows, nothing else.
inline void sgns_pair_update(EmbeddingMatrix& m, std::uint32_t center, std::uint32_t context,
                             std::span<const std::uint32_t> negatives, double lr) {
    if (center >= m.rows() || context >= m.rows()) throw LookupError("pair update row out of range");
    for (std::uint32_t n : negatives)
        if (n >= m.rows()) throw LookupError("negative sample row out of range");
    if (!(lr >= 0.0)) throw ConfigError("learning rate must be nonnegative");
    detail::PairScratch scratch;
    detail::pair_update(m, center, context, negatives, lr, scratch);
}

// Corpus held as kept-vocabulary indices; out-of-vocabulary periodicals are
// removed and trails shorter than 2 kept tokens are dropped.
struct TokenizedCorpus {
    std::vector<std::uint32_t> tokens;
    std::vector<std::uint64_t> offsets{0};

    std::size_t trail_count() const { return offsets.size() - 1; }
    std::span<const std::uint32_t> trail(std::size_t t) const {
        return {tokens.data() + offsets[t], tokens.data() + offsets[t + 1]};
    }

    void add(std::span<const std::uint32_t> trail) {
        tokens.insert(tokens.end(), trail.begin(), trail.end());
        offsets.push_back(tokens.size());
    }
};

inline TokenizedCorpus tokenize(const TrailCorpus& corpus, const Vocabulary& vocab) {
    TokenizedCorpus out;
    std::vector<std::uint32_t> buf;
    for (const auto& trail : corpus.trails) {
        buf.clear();
        for (PeriodicalId id : trail) {
            auto it = vocab.index.find(id);
            if (it != vocab.index.end()) buf.push_back(it->second);
        }
        if (buf.size() >= 2) out.add(buf);
    }
    return out;
}

inline TokenizedCorpus tokenize_file(const std::string& corpus_path, const Vocabulary& vocab) {
    TokenizedCorpus out;
    LineReader reader(corpus_path);
    std::string_view line;
    std::vector<std::uint32_t> buf;
    while (reader.next(line)) {
        buf.clear();
        for (std::string_view tok : split_fields(line, ' ')) {
            if (tok.empty()) continue;
            auto it = vocab.index.find(parse_u64(tok, "periodical id", reader.line_no()));
            if (it != vocab.index.end()) buf.push_back(it->second);
        }
        if (buf.size() >= 2) out.add(buf);
    }
    return out;
}

namespace detail {

// Expected number of (center, context) pairs for one trail of kept length L:
// each center draws an effective half-window b uniform in [1, W], clipped by
// the trail boundaries. Used as the learning-rate schedule denominator.
inline double expected_pairs(std::uint64_t length, std::uint32_t window, bool fixed_window) {
    auto clipped_sum = [&](std::uint64_t b) {
        // sum over positions t in [0, L) of min(t, b), closed form
        double L = static_cast<double>(length);
        double bb = static_cast<double>(b);
        if (length <= b) return L * (L - 1.0) / 2.0;
        return bb * L - bb * (bb + 1.0) / 2.0;
    };
    if (fixed_window) return 2.0 * clipped_sum(window);
    double total = 0.0;
    for (std::uint32_t b = 1; b <= window; ++b) total += 2.0 * clipped_sum(b);
    return total / static_cast<double>(window);
}

}  // namespace detail

// Trains input/output vectors by skip-gram with negative sampling over the
// tokenized corpus. Single-worker runs are bit-deterministic for a fixed
// seed; with more workers rows race Hogwild-style and results vary.
inline EmbeddingMatrix train(const Vocabulary& vocab, const TokenizedCorpus& corpus,
                             const TrainConfig& cfg, unsigned workers = 1) {
    cfg.validate();
    if (corpus.trail_count() == 0) throw ConfigError("no usable trails after vocabulary filtering");
    if (workers < 1) workers = 1;

    NoiseDistribution noise = NoiseDistribution::build(vocab, cfg.noise_exponent);

    EmbeddingMatrix m;
    m.dimension = cfg.dimension;
    m.ids = vocab.ids;
    m.config = cfg;
    m.input.resize(std::size_t(vocab.size()) * cfg.dimension);
    m.output.assign(std::size_t(vocab.size()) * cfg.dimension, 0.0);
    {
        Rng init = derive_rng(cfg.seed, "init");
        double half = 0.5 / cfg.dimension;
        for (double& x : m.input) x = init.uniform(-half, half);
    }

    double total_expected = 0.0;
    {
        std::map<std::uint64_t, double> cache;
        for (std::size_t t = 0; t < corpus.trail_count(); ++t) {
            std::uint64_t len = corpus.offsets[t + 1] - corpus.offsets[t];
            auto it = cache.find(len);
            if (it == cache.end())
                it = cache.emplace(len, detail::expected_pairs(len, cfg.window, cfg.fixed_window)).first;
            total_expected += it->second;
        }
        total_expected *= cfg.epochs;
    }
    if (total_expected <= 0.0) total_expected = 1.0;

    // keep probability per word2vec's subsampling rule
    std::vector<double> keep_prob;
    if (cfg.subsample > 0.0) {
        keep_prob.resize(vocab.size());
        double threshold = cfg.subsample * static_cast<double>(vocab.total_tokens);
        for (std::uint32_t i = 0; i < vocab.size(); ++i) {
            double f = static_cast<double>(vocab.frequencies[i]);
            keep_prob[i] = (std::sqrt(f / threshold) + 1.0) * threshold / f;
        }
    }

    std::atomic<std::uint64_t> pairs_done{0};
    const double lr_span = cfg.initial_lr - cfg.final_lr;

    auto run_worker = [&](unsigned w) {
        Rng rng = derive_rng(cfg.seed, "train", w);
        detail::PairScratch scratch;
        std::vector<std::uint32_t> negatives(cfg.negatives);
        std::vector<std::uint32_t> kept;
        const std::size_t lo = corpus.trail_count() * w / workers;
        const std::size_t hi = corpus.trail_count() * (w + 1) / workers;

        for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (std::size_t t = lo; t < hi; ++t) {
                auto trail = corpus.trail(t);
                std::span<const std::uint32_t> tokens = trail;
                if (!keep_prob.empty()) {
                    kept.clear();
                    for (std::uint32_t tok : trail)
                        if (keep_prob[tok] >= 1.0 || rng.next_double() < keep_prob[tok]) kept.push_back(tok);
                    if (kept.size() < 2) continue;
                    tokens = kept;
                }
                const std::size_t len = tokens.size();
                for (std::size_t pos = 0; pos < len; ++pos) {
                    std::uint64_t b = cfg.fixed_window ? cfg.window : 1 + rng.below(cfg.window);
                    std::size_t first = pos > b ? pos - b : 0;
                    std::size_t last = std::min(len - 1, pos + b);
                    for (std::size_t q = first; q <= last; ++q) {
                        if (q == pos) continue;
                        std::uint32_t center = tokens[pos];
                        std::uint32_t context = tokens[q];
                        std::uint64_t done = pairs_done.fetch_add(1, std::memory_order_relaxed);
                        double lr = cfg.initial_lr - lr_span * (static_cast<double>(done) / total_expected);
                        if (lr < cfg.final_lr) lr = cfg.final_lr;
                        for (std::uint32_t i = 0; i < cfg.negatives; ++i) {
                            std::uint32_t neg = noise.sample(rng);
                            // a negative equal to the positive context is re-drawn;
                            // bounded so degenerate vocabularies cannot spin
                            for (int retry = 0; neg == context && retry < 16; ++retry) neg = noise.sample(rng);
                            negatives[i] = neg;
                        }
                        detail::pair_update(m, center, context, negatives, lr, scratch);
                    }
                }
            }
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
    return m;
}

inline EmbeddingMatrix train(const TrailCorpus& corpus, const TrainConfig& cfg, unsigned workers = 1) {
    Vocabulary vocab = build_vocabulary(corpus, cfg.min_count);
    TokenizedCorpus tokens = tokenize(corpus, vocab);
    return train(vocab, tokens, cfg, workers);
}

inline EmbeddingMatrix train_file(const std::string& corpus_path, const TrainConfig& cfg,
                                  unsigned workers = 1) {
    Vocabulary vocab = build_vocabulary_file(corpus_path, cfg.min_count);
    TokenizedCorpus tokens = tokenize_file(corpus_path, vocab);
    return train(vocab, tokens, cfg, workers);
}

}  // namespace perivec
