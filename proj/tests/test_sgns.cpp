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

#include <cmath>
#include <map>

#include "catch_amalgamated.hpp"
#include "helpers.hpp"
#include "perivec/sgns.hpp"
#include "perivec/vectorspace.hpp"

using namespace perivec;
using testutil::TempDir;

namespace {

// Independent objective oracle for the finite-difference check: the pair
// energy evaluated directly from the matrix entries.
double pair_energy(const EmbeddingMatrix& m, std::uint32_t center, std::uint32_t context,
                   std::span<const std::uint32_t> negatives) {
    auto dot = [&](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
        return s;
    };
    auto log_sigma = [](double x) { return -std::log(1.0 + std::exp(-x)); };
    double e = log_sigma(dot(m.output_row(context), m.input_row(center)));
    for (std::uint32_t n : negatives) e += log_sigma(-dot(m.output_row(n), m.input_row(center)));
    return e;
}

EmbeddingMatrix random_matrix(std::uint32_t rows, std::uint32_t dim, std::uint64_t seed) {
    EmbeddingMatrix m;
    m.dimension = dim;
    for (std::uint32_t i = 0; i < rows; ++i) m.ids.push_back(i);
    Rng rng(seed);
    m.input.resize(std::size_t(rows) * dim);
    m.output.resize(std::size_t(rows) * dim);
    for (double& x : m.input) x = rng.uniform(-1.0, 1.0);
    for (double& x : m.output) x = rng.uniform(-1.0, 1.0);
    return m;
}

TrailCorpus tiny_corpus() {
    TrailCorpus corpus;
    corpus.trails = {{1, 2, 1}, {3, 1}, {2, 3, 3, 1}};
    return corpus;
}

}  // namespace

TEST_CASE("vocabulary counts are exact") {
    TrailCorpus corpus;
    corpus.trails = {{7, 8, 7}};
    Vocabulary v = build_vocabulary(corpus, 1);
    REQUIRE(v.size() == 2);
    CHECK(v.ids[0] == 7);
    CHECK(v.frequencies[0] == 2);
    CHECK(v.ids[1] == 8);
    CHECK(v.frequencies[1] == 1);
    CHECK(v.total_tokens == 3);
}

TEST_CASE("vocabulary filters below min_count and reports drops") {
    TrailCorpus corpus;
    corpus.trails = {{1, 1, 1, 2}, {1, 2, 3, 1}};
    Vocabulary v = build_vocabulary(corpus, 2);
    CHECK(v.size() == 2);
    CHECK(v.dropped_periodicals == 1);
    CHECK(!v.contains(3));
    CHECK_THROWS_AS(build_vocabulary(corpus, 100), ConfigError);
}

TEST_CASE("vocabulary matches a naive counting oracle") {
    Rng rng(5);
    TrailCorpus corpus;
    std::map<PeriodicalId, std::uint64_t> oracle;
    for (int t = 0; t < 10000; ++t) {
        std::vector<PeriodicalId> trail;
        std::size_t len = 2 + rng.index(6);
        for (std::size_t i = 0; i < len; ++i) {
            PeriodicalId id = rng.below(40);
            trail.push_back(id);
            ++oracle[id];
        }
        corpus.trails.push_back(std::move(trail));
    }
    Vocabulary v = build_vocabulary(corpus, 1);
    REQUIRE(v.size() == oracle.size());
    for (std::uint32_t i = 0; i < v.size(); ++i) CHECK(v.frequencies[i] == oracle.at(v.ids[i]));
}

TEST_CASE("noise distribution follows the smoothed unigram form") {
    TrailCorpus corpus;
    corpus.trails = {{1, 2}};
    Vocabulary v = build_vocabulary(corpus, 1);
    NoiseDistribution d1 = NoiseDistribution::build(v, 1.0);
    CHECK_THAT(d1.probability(0), Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(d1.probability(1), Catch::Matchers::WithinAbs(0.5, 1e-12));

    // frequencies {4, 1} at alpha 0.75: 4^.75 / (4^.75 + 1)
    TrailCorpus corpus2;
    corpus2.trails = {{5, 5, 5, 5, 6}};
    Vocabulary v2 = build_vocabulary(corpus2, 1);
    NoiseDistribution d2 = NoiseDistribution::build(v2, 0.75);
    CHECK_THAT(d2.probability(v2.index_of(5)), Catch::Matchers::WithinAbs(0.7388, 1e-4));
    CHECK_THAT(d2.probability(v2.index_of(6)), Catch::Matchers::WithinAbs(0.2612, 1e-4));

    CHECK_THROWS_AS(NoiseDistribution::build(v2, 0.0), ConfigError);
    CHECK_THROWS_AS(NoiseDistribution::build(v2, 1.5), ConfigError);
}

TEST_CASE("noise probabilities normalize on random vocabularies") {
    Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        TrailCorpus corpus;
        std::vector<PeriodicalId> trail;
        std::size_t vocab = 2 + rng.index(60);
        for (PeriodicalId id = 0; id < vocab; ++id)
            for (std::uint64_t c = 0, reps = 1 + rng.below(50); c < reps; ++c) trail.push_back(id);
        corpus.trails = {trail};
        Vocabulary v = build_vocabulary(corpus, 1);
        NoiseDistribution d = NoiseDistribution::build(v, 0.75);
        double sum = 0.0;
        for (std::uint32_t i = 0; i < v.size(); ++i) sum += d.probability(i);
        CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("noise sampling frequencies track the distribution") {
    TrailCorpus corpus;
    std::vector<PeriodicalId> trail;
    Rng setup(77);
    for (PeriodicalId id = 0; id < 60; ++id)
        for (std::uint64_t c = 0, reps = 1 + setup.below(30); c < reps; ++c) trail.push_back(id);
    corpus.trails = {trail};
    Vocabulary v = build_vocabulary(corpus, 1);
    NoiseDistribution d = NoiseDistribution::build(v, 0.75);

    Rng rng(123);
    std::vector<std::size_t> counts(v.size(), 0);
    const std::size_t draws = 1000000;
    for (std::size_t i = 0; i < draws; ++i) ++counts[d.sample(rng)];
    for (std::uint32_t i = 0; i < v.size(); ++i)
        CHECK_THAT(double(counts[i]) / draws, Catch::Matchers::WithinAbs(d.probability(i), 0.01));
}

TEST_CASE("pair update with zero learning rate leaves the matrix unchanged") {
    EmbeddingMatrix m = random_matrix(6, 5, 3);
    EmbeddingMatrix before = m;
    std::vector<std::uint32_t> negs{2, 3, 4};
    sgns_pair_update(m, 0, 1, negs, 0.0);
    CHECK(m.input == before.input);
    CHECK(m.output == before.output);
}

TEST_CASE("pair update equals lr times the analytic gradient and touches nothing else") {
    EmbeddingMatrix m = random_matrix(8, 5, 11);
    EmbeddingMatrix before = m;
    std::vector<std::uint32_t> negs{3, 4, 3};  // duplicate on purpose
    PairGradient grad = sgns_pair_gradient(m, 0, 1, negs);
    const double lr = 0.37;
    sgns_pair_update(m, 0, 1, negs, lr);

    for (std::uint32_t j = 0; j < 5; ++j) {
        CHECK_THAT(m.input_row(0)[j] - before.input_row(0)[j],
                   Catch::Matchers::WithinAbs(lr * grad.center_input[j], 1e-12));
    }
    // context row 1 and negative rows 3, 4: accumulated slot gradients
    std::map<std::uint32_t, std::vector<double>> expected;
    expected[1] = grad.context_output;
    for (std::size_t s = 0; s < negs.size(); ++s) {
        auto& acc = expected[negs[s]];
        if (acc.empty()) acc.assign(5, 0.0);
        for (std::uint32_t j = 0; j < 5; ++j) acc[j] += grad.negative_output[s][j];
    }
    for (std::uint32_t row = 0; row < 8; ++row) {
        for (std::uint32_t j = 0; j < 5; ++j) {
            double delta = m.output_row(row)[j] - before.output_row(row)[j];
            double want = expected.contains(row) ? lr * expected[row][j] : 0.0;
            CHECK_THAT(delta, Catch::Matchers::WithinAbs(want, 1e-12));
        }
        if (row != 0)
            for (std::uint32_t j = 0; j < 5; ++j) CHECK(m.input_row(row)[j] == before.input_row(row)[j]);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng pick(2024);
    for (int rep = 0; rep < 25; ++rep) {
        std::uint32_t dim = 2 + static_cast<std::uint32_t>(pick.below(7));
        EmbeddingMatrix m = random_matrix(10, dim, 1000 + rep);
        std::uint32_t center = static_cast<std::uint32_t>(pick.below(10));
        std::uint32_t context = static_cast<std::uint32_t>(pick.below(10));
        std::vector<std::uint32_t> negs;
        for (std::uint64_t i = 0, k = 1 + pick.below(5); i < k; ++i)
            negs.push_back(static_cast<std::uint32_t>(pick.below(10)));

        PairGradient grad = sgns_pair_gradient(m, center, context, negs);
        const double h = 1e-5;
        auto check = [&](std::vector<double>& table, std::size_t offset, double analytic) {
            double saved = table[offset];
            table[offset] = saved + h;
            double up = pair_energy(m, center, context, negs);
            table[offset] = saved - h;
            double down = pair_energy(m, center, context, negs);
            table[offset] = saved;
            double numeric = (up - down) / (2 * h);
            CHECK_THAT(analytic, Catch::Matchers::WithinAbs(numeric, 1e-5 * std::max(1.0, std::abs(numeric))));
        };
        for (std::uint32_t j = 0; j < dim; ++j)
            check(m.input, std::size_t(center) * dim + j, grad.center_input[j]);
        // context and negative gradients act on the same output table; when ids
        // collide the per-slot gradients add, so compare the summed gradient
        std::map<std::uint32_t, std::vector<double>> out_grad;
        out_grad[context] = grad.context_output;
        for (std::size_t s = 0; s < negs.size(); ++s) {
            auto& acc = out_grad[negs[s]];
            if (acc.empty()) acc.assign(dim, 0.0);
            for (std::uint32_t j = 0; j < dim; ++j) acc[j] += grad.negative_output[s][j];
        }
        for (const auto& [row, g] : out_grad)
            for (std::uint32_t j = 0; j < dim; ++j) check(m.output, std::size_t(row) * dim + j, g[j]);
    }
}

TEST_CASE("repeated updates on one pair increase the positive pair score") {
    EmbeddingMatrix m = random_matrix(6, 8, 17);
    std::vector<std::uint32_t> negs{2, 3, 4, 5};
    auto positive_sigma = [&] {
        double dot = 0.0;
        for (std::uint32_t j = 0; j < 8; ++j) dot += m.output_row(1)[j] * m.input_row(0)[j];
        return sigmoid(dot);
    };
    double prev = positive_sigma();
    for (int step = 0; step < 50; ++step) {
        sgns_pair_update(m, 0, 1, negs, 0.05);
        double cur = positive_sigma();
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("training is bit-deterministic with a single worker") {
    SyntheticSpec spec;
    spec.discipline_count = 2;
    spec.papers_per_discipline = 400;
    spec.periodicals_per_discipline = 5;
    spec.citations_per_paper = 3;
    PaperGraph g = generate_synthetic_graph(spec);
    TrailCorpus corpus = generate_trail_corpus(g, 3000, 8);

    TrainConfig cfg;
    cfg.window = 4;
    cfg.dimension = 12;
    cfg.min_count = 1;
    cfg.epochs = 2;
    cfg.seed = 99;
    EmbeddingMatrix a = train(corpus, cfg, 1);
    EmbeddingMatrix b = train(corpus, cfg, 1);
    CHECK(a.input == b.input);
    CHECK(a.output == b.output);
    CHECK(a.ids == b.ids);
}

TEST_CASE("planted-partition training separates disciplines") {
    SyntheticSpec spec;
    spec.discipline_count = 4;
    spec.papers_per_discipline = 2500;
    spec.periodicals_per_discipline = 10;
    spec.within_probability = 0.85;
    spec.cross_probability = 0.15;
    spec.citations_per_paper = 4;
    spec.seed = 12;
    PaperGraph g = generate_synthetic_graph(spec);
    TrailCorpus corpus = generate_trail_corpus(g, 30000, 4, 2);

    TrainConfig cfg;
    cfg.window = 5;
    cfg.dimension = 32;
    cfg.min_count = 1;
    cfg.epochs = 3;
    cfg.negatives = 5;
    cfg.seed = 6;
    EmbeddingMatrix m = train(corpus, cfg, 1);

    for (double x : m.input) REQUIRE(std::isfinite(x));
    for (double x : m.output) REQUIRE(std::isfinite(x));

    VectorStore store = VectorStore::from_rows(m.ids, m.input, m.dimension);
    double within = 0.0, cross = 0.0;
    std::size_t n_within = 0, n_cross = 0;
    for (PeriodicalId a : store.ids()) {
        for (PeriodicalId b : store.ids()) {
            if (a >= b) continue;
            double cs = cosine_similarity(store.vector(a), store.vector(b));
            if (a / 10 == b / 10) {
                within += cs;
                ++n_within;
            } else {
                cross += cs;
                ++n_cross;
            }
        }
    }
    double gap = within / n_within - cross / n_cross;
    INFO("within-cross cosine gap " << gap);
    CHECK(gap >= 0.2);
}

TEST_CASE("model save and load round-trips exactly") {
    TempDir tmp;
    EmbeddingMatrix m = random_matrix(7, 4, 55);
    m.ids = {3, 1, 4, 15, 9, 2, 6};
    m.save(tmp.path("model.txt"));
    EmbeddingMatrix loaded = EmbeddingMatrix::load(tmp.path("model.txt"));
    CHECK(loaded.dimension == m.dimension);
    CHECK(loaded.ids == m.ids);
    CHECK(loaded.input == m.input);  // shortest round-trip decimals reparse exactly
}

TEST_CASE("file-based training path equals in-memory training") {
    TempDir tmp;
    PaperGraph g = testutil::chain_graph(60, 2);
    SyntheticSpec spec;
    spec.discipline_count = 2;
    spec.papers_per_discipline = 200;
    spec.periodicals_per_discipline = 4;
    spec.citations_per_paper = 2;
    PaperGraph g2 = generate_synthetic_graph(spec);
    TrailCorpus corpus = generate_trail_corpus(g2, 2000, 3);
    write_trails(corpus, tmp.path("trails.txt"));

    TrainConfig cfg;
    cfg.window = 3;
    cfg.dimension = 8;
    cfg.min_count = 2;
    cfg.epochs = 1;
    cfg.seed = 10;
    EmbeddingMatrix a = train(corpus, cfg, 1);
    EmbeddingMatrix b = train_file(tmp.path("trails.txt"), cfg, 1);
    CHECK(a.ids == b.ids);
    CHECK(a.input == b.input);
}

TEST_CASE("tokenization drops out-of-vocabulary periodicals and short trails") {
    TrailCorpus corpus = tiny_corpus();
    Vocabulary v = build_vocabulary(corpus, 2);  // keeps 1 (freq 4), 2 (2), 3 (3)... recompute below
    TokenizedCorpus toks = tokenize(corpus, v);
    for (std::size_t t = 0; t < toks.trail_count(); ++t) CHECK(toks.trail(t).size() >= 2);
}
