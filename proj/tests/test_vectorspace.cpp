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

#include "catch_amalgamated.hpp"
#include "helpers.hpp"
#include "perivec/vectorspace.hpp"

using namespace perivec;
using testutil::TempDir;

namespace {

VectorStore random_store(std::size_t count, std::uint32_t dim, std::uint64_t seed) {
    std::vector<PeriodicalId> ids;
    std::vector<double> rows;
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        ids.push_back(i);
        for (std::uint32_t j = 0; j < dim; ++j) rows.push_back(rng.uniform(-1.0, 1.0));
    }
    return VectorStore::from_rows(std::move(ids), std::move(rows), dim);
}

}  // namespace

TEST_CASE("cosine basics") {
    std::vector<double> a{1.0, 0.0}, b{0.0, 2.0}, c{1.0, 1.0};
    CHECK_THAT(cosine_similarity(a, a), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(cosine_similarity(a, b), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(cosine_similarity(a, c), Catch::Matchers::WithinAbs(0.70711, 1e-5));
    std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS_AS(cosine_similarity(a, zero), NumericError);
}

TEST_CASE("stored vectors are unit length") {
    VectorStore store = random_store(20, 6, 3);
    for (PeriodicalId id : store.ids()) {
        double n = 0.0;
        for (double x : store.vector(id)) n += x * x;
        CHECK_THAT(std::sqrt(n), Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    CHECK_THROWS_AS(VectorStore::from_rows({1}, {0.0, 0.0}, 2), NumericError);
}

TEST_CASE("most_similar on a two-periodical store returns the other one") {
    VectorStore store = testutil::angle_store({{10, 0.1}, {20, 0.4}});
    auto result = most_similar(store, 10, 5);
    REQUIRE(result.size() == 1);
    CHECK(result[0].id == 20);
    CHECK_THROWS_AS(most_similar(store, 999, 1), LookupError);
}

TEST_CASE("most_similar matches a brute-force scan") {
    VectorStore store = random_store(50, 8, 9);
    for (PeriodicalId p : {PeriodicalId(0), PeriodicalId(17), PeriodicalId(49)}) {
        auto got = most_similar(store, p, 50);
        // independent linear scan
        std::vector<Scored> want;
        for (PeriodicalId q : store.ids()) {
            if (q == p) continue;
            want.push_back({q, cosine_similarity(store.vector(p), store.vector(q))});
        }
        std::sort(want.begin(), want.end(), [](const Scored& a, const Scored& b) {
            return a.score != b.score ? a.score > b.score : a.id < b.id;
        });
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].id == want[i].id);
            CHECK_THAT(got[i].score, Catch::Matchers::WithinAbs(want[i].score, 1e-12));
        }
    }
}

TEST_CASE("rankings are invariant under uniform positive scaling") {
    std::vector<PeriodicalId> ids;
    std::vector<double> rows, scaled;
    Rng rng(21);
    for (std::size_t i = 0; i < 30; ++i) {
        ids.push_back(i);
        for (int j = 0; j < 5; ++j) {
            double x = rng.uniform(-1.0, 1.0);
            rows.push_back(x);
            scaled.push_back(3.7 * x);
        }
    }
    VectorStore a = VectorStore::from_rows(ids, rows, 5);
    VectorStore b = VectorStore::from_rows(ids, scaled, 5);
    for (PeriodicalId p : {PeriodicalId(0), PeriodicalId(12)}) {
        auto ra = most_similar(a, p, 30);
        auto rb = most_similar(b, p, 30);
        REQUIRE(ra.size() == rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].id == rb[i].id);
    }
}

TEST_CASE("most_similar scores are monotonically ordered") {
    VectorStore store = random_store(40, 4, 31);
    auto result = most_similar(store, 5, 40);
    for (std::size_t i = 1; i < result.size(); ++i) CHECK(result[0].score >= result[i].score);
}

TEST_CASE("analogy with b == a reduces to most_similar") {
    VectorStore store = random_store(25, 6, 12);
    auto analogy = analogy_query(store, 3, 3, 7, 20);
    auto similar = most_similar(store, 7, 20, {3});
    REQUIRE(analogy.size() == similar.size());
    for (std::size_t i = 0; i < analogy.size(); ++i) CHECK(analogy[i].id == similar[i].id);
}

TEST_CASE("analogy recovers an exactly planted target") {
    // v(d) is placed exactly on v(c) - v(a) + v(b)
    Rng rng(77);
    std::vector<PeriodicalId> ids{0, 1, 2, 3};
    std::vector<double> rows;
    std::vector<double> va{1, 0, 0, 0}, vb{0, 1, 0, 0}, vc{0, 0, 1, 0};
    for (double x : va) rows.push_back(x);
    for (double x : vb) rows.push_back(x);
    for (double x : vc) rows.push_back(x);
    std::vector<double> vd(4);
    for (int j = 0; j < 4; ++j) vd[j] = vc[j] - va[j] + vb[j];
    for (double x : vd) rows.push_back(x);
    for (PeriodicalId extra = 4; extra < 20; ++extra) {
        ids.push_back(extra);
        for (int j = 0; j < 4; ++j) rows.push_back(rng.uniform(-1.0, 1.0));
    }
    VectorStore store = VectorStore::from_rows(ids, rows, 4);
    auto result = analogy_query(store, 0, 1, 2, 3);
    REQUIRE(!result.empty());
    CHECK(result[0].id == 3);
    CHECK_THAT(result[0].score, Catch::Matchers::WithinAbs(1.0, 1e-9));
    for (const auto& r : result) {
        CHECK(r.id != 0);
        CHECK(r.id != 1);
        CHECK(r.id != 2);
    }
}

TEST_CASE("axis construction and projection") {
    VectorStore store = testutil::angle_store({{1, 0.0}, {2, 1.5707963267948966}, {3, 0.3}, {4, 1.2}});
    Axis axis = build_axis(store, {1}, {2});
    for (int j = 0; j < 2; ++j)
        CHECK_THAT(axis.direction[j],
                   Catch::Matchers::WithinAbs(store.vector(1)[j] - store.vector(2)[j], 1e-15));

    // centroid against a brute-force mean
    Axis multi = build_axis(store, {1, 3}, {2, 4});
    for (int j = 0; j < 2; ++j) {
        double want = (store.vector(1)[j] + store.vector(3)[j]) / 2.0;
        CHECK_THAT(multi.centroid_positive[j], Catch::Matchers::WithinAbs(want, 1e-12));
    }

    CHECK_THROWS_AS(build_axis(store, {}, {2}), ConfigError);
    CHECK_THROWS_AS(build_axis(store, {1}, {1}), ConfigError);

    // symmetric poles cancel to a degenerate axis
    VectorStore sym = testutil::angle_store({{1, 0.0}, {2, 3.141592653589793}, {3, 1.0}, {4, 1.0 + 3.141592653589793}});
    CHECK_THROWS_AS(build_axis(sym, {1, 2}, {3, 4}), NumericError);
}

TEST_CASE("projection is aligned and sign-correct on planted poles") {
    VectorStore store = testutil::angle_store({{1, 0.0}, {2, 3.141592653589793 / 2}, {5, 0.05}, {6, 1.5}});
    Axis axis = build_axis(store, {1}, {2});
    CHECK(project_on_axis(store, 5, axis) > 0.0);
    CHECK(project_on_axis(store, 6, axis) < 0.0);
    // a periodical exactly on the axis direction projects to 1
    std::vector<PeriodicalId> ids{1, 2, 3};
    std::vector<double> rows{1, 0, 0, 1, 0.7071067811865476, -0.7071067811865476};
    VectorStore aligned = VectorStore::from_rows(ids, rows, 2);
    Axis ax = build_axis(aligned, {1}, {2});
    CHECK_THAT(project_on_axis(aligned, 3, ax), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("store round trip preserves all rankings") {
    TempDir tmp;
    EmbeddingMatrix m;
    m.dimension = 6;
    Rng rng(101);
    for (PeriodicalId id = 0; id < 30; ++id) {
        m.ids.push_back(id * 3 + 1);
        for (int j = 0; j < 6; ++j) m.input.push_back(rng.uniform(-2.0, 2.0));
    }
    m.save(tmp.path("model.txt"));
    VectorStore a = VectorStore::from_rows(m.ids, m.input, m.dimension);
    VectorStore b = VectorStore::load(tmp.path("model.txt"));
    for (PeriodicalId p : a.ids()) {
        auto ra = most_similar(a, p, 30);
        auto rb = most_similar(b, p, 30);
        REQUIRE(ra.size() == rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            CHECK(ra[i].id == rb[i].id);
            CHECK(ra[i].score == rb[i].score);
        }
    }
}

TEST_CASE("metadata attaches names and labels") {
    TempDir tmp;
    testutil::write_file(tmp.path("periodicals.tsv"), "1\tAlpha\tD0\tD0.S0\n2\tBeta\tD1\n3\tGamma\n");
    VectorStore store = testutil::angle_store({{1, 0.1}, {2, 0.2}, {3, 0.3}, {4, 0.4}});
    store.attach_metadata(tmp.path("periodicals.tsv"));
    CHECK(store.name(1) == "Alpha");
    CHECK(store.discipline(1) == "D0");
    CHECK(store.sub_discipline(1) == "D0.S0");
    CHECK(store.discipline(2) == "D1");
    CHECK(store.sub_discipline(2).empty());
    CHECK(store.name(4) == "4");  // no metadata row
}
