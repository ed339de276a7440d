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

#include <map>
#include <set>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "helpers.hpp"
#include "perivec/corpus.hpp"

using namespace perivec;
using testutil::TempDir;
using testutil::write_file;

TEST_CASE("load_citation_graph builds a minimal chain") {
    TempDir tmp;
    write_file(tmp.path("edges.tsv"), "1\t2\n2\t3\n");
    write_file(tmp.path("papers.tsv"), "1\t10\n2\t20\n3\t10\n");
    PaperGraph g = load_citation_graph(tmp.path("edges.tsv"), tmp.path("papers.tsv"));
    CHECK(g.paper_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.periodical_count() == 2);
    CHECK(g.paper_venue(g.paper_index(1)) == 10);
    CHECK(g.paper_venue(g.paper_index(2)) == 20);
}

TEST_CASE("self-loops are removed at load") {
    TempDir tmp;
    write_file(tmp.path("edges.tsv"), "1\t1\n");
    write_file(tmp.path("papers.tsv"), "1\t10\n");
    PaperGraph g = load_citation_graph(tmp.path("edges.tsv"), tmp.path("papers.tsv"));
    CHECK(g.out_degree(g.paper_index(1)) == 0);
    CHECK(g.self_loops_dropped() == 1);
    CHECK(g.edge_count() == 0);
}

TEST_CASE("loaded adjacency matches an independently parsed edge set") {
    TempDir tmp;
    std::mt19937 rng(99);
    std::ostringstream papers, edges;
    for (int p = 0; p < 10; ++p) papers << p << '\t' << p % 3 << '\n';
    std::multiset<std::pair<PaperId, PaperId>> expected;
    for (int e = 0; e < 40; ++e) {
        PaperId src = rng() % 10, dst = rng() % 10;
        edges << src << '\t' << dst << '\n';
        if (src != dst) expected.emplace(src, dst);
    }
    write_file(tmp.path("papers.tsv"), papers.str());
    write_file(tmp.path("edges.tsv"), edges.str());

    PaperGraph g = load_citation_graph(tmp.path("edges.tsv"), tmp.path("papers.tsv"));
    std::multiset<std::pair<PaperId, PaperId>> actual;
    for (std::size_t p = 0; p < g.paper_count(); ++p)
        for (std::uint32_t t : g.out_edges(static_cast<std::uint32_t>(p)))
            actual.emplace(g.paper_ids()[p], g.paper_ids()[t]);
    CHECK(actual == expected);
}

TEST_CASE("malformed rows carry line numbers and dangling ids fail integrity") {
    TempDir tmp;
    write_file(tmp.path("papers.tsv"), "1\t10\n2\n");
    write_file(tmp.path("edges.tsv"), "1\t2\n");
    try {
        load_citation_graph(tmp.path("edges.tsv"), tmp.path("papers.tsv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }

    write_file(tmp.path("papers2.tsv"), "1\t10\n");
    write_file(tmp.path("edges2.tsv"), "1\t7\n");
    CHECK_THROWS_AS(load_citation_graph(tmp.path("edges2.tsv"), tmp.path("papers2.tsv")), IntegrityError);
}

TEST_CASE("trail on a deterministic chain visits every paper") {
    PaperGraph g = PaperGraph::build({{5, 0}, {6, 0}, {7, 1}}, {{5, 6}, {6, 7}});
    Rng rng(1);
    auto trail = sample_paper_trail_from(g, g.paper_index(5), rng);
    REQUIRE(trail.has_value());
    REQUIRE(trail->papers.size() == 3);
    CHECK(g.paper_ids()[trail->papers[0]] == 5);
    CHECK(g.paper_ids()[trail->papers[1]] == 6);
    CHECK(g.paper_ids()[trail->papers[2]] == 7);
}

TEST_CASE("isolated papers never produce a trail") {
    PaperGraph g = PaperGraph::build({{1, 0}, {2, 0}}, {});
    Rng rng(3);
    for (int i = 0; i < 100; ++i) CHECK_FALSE(sample_paper_trail(g, rng).has_value());
}

TEST_CASE("diamond walk probabilities match enumeration") {
    // a -> {b, c}, b -> d, c -> d; from a the walk (a,b,d) has probability 1/2
    PaperGraph g = PaperGraph::build({{0, 0}, {1, 0}, {2, 0}, {3, 0}},
                                     {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    Rng rng(7);
    std::uint32_t a = g.paper_index(0), b = g.paper_index(1);
    int via_b = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        auto trail = sample_paper_trail_from(g, a, rng);
        REQUIRE(trail.has_value());
        REQUIRE(trail->papers.size() == 3);
        if (trail->papers[1] == b) ++via_b;
    }
    CHECK_THAT(double(via_b) / draws, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("generated trails satisfy the trail invariants") {
    SyntheticSpec spec;
    spec.discipline_count = 3;
    spec.papers_per_discipline = 400;
    spec.periodicals_per_discipline = 5;
    spec.within_probability = 0.7;
    spec.cross_probability = 0.3;
    spec.citations_per_paper = 3;
    spec.seed = 5;
    PaperGraph g = generate_synthetic_graph(spec);

    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        auto trail = sample_paper_trail(g, rng);
        if (!trail) continue;
        REQUIRE(trail->papers.size() >= 2);
        for (std::size_t s = 0; s + 1 < trail->papers.size(); ++s) {
            auto edges = g.out_edges(trail->papers[s]);
            bool member = false;
            for (std::uint32_t t : edges) member = member || t == trail->papers[s + 1];
            REQUIRE(member);
        }
        REQUIRE(g.out_degree(trail->papers.back()) == 0);
    }
}

TEST_CASE("corpus generation yields exactly n accepted trails") {
    PaperGraph g = testutil::chain_graph(50, 9);
    TrailCorpus corpus = generate_trail_corpus(g, 1000, 21);
    REQUIRE(corpus.size() == 1000);
    for (const auto& t : corpus.trails) CHECK(t.size() >= 2);
}

TEST_CASE("corpus generation is reproducible for fixed seed and workers") {
    SyntheticSpec spec;
    spec.discipline_count = 2;
    spec.papers_per_discipline = 300;
    spec.periodicals_per_discipline = 4;
    spec.citations_per_paper = 2;
    PaperGraph g = generate_synthetic_graph(spec);

    for (unsigned workers : {1u, 3u}) {
        TrailCorpus a = generate_trail_corpus(g, 500, 17, workers);
        TrailCorpus b = generate_trail_corpus(g, 500, 17, workers);
        std::ostringstream sa, sb;
        write_trails(a, sa);
        write_trails(b, sb);
        CHECK(sa.str() == sb.str());
    }
}

TEST_CASE("unsatisfiable corpus on an edgeless graph") {
    PaperGraph g = PaperGraph::build({{1, 0}, {2, 1}}, {});
    CHECK_THROWS_AS(generate_trail_corpus(g, 10, 1), IntegrityError);
}

TEST_CASE("trail length histogram matches an independent walker") {
    SyntheticSpec spec;
    spec.discipline_count = 2;
    spec.papers_per_discipline = 1000;
    spec.periodicals_per_discipline = 5;
    spec.citations_per_paper = 4;
    spec.seed = 3;
    PaperGraph g = generate_synthetic_graph(spec);

    const std::size_t n = 100000;
    TrailCorpus corpus = generate_trail_corpus(g, n, 123, 2);

    // independent Monte-Carlo walker using the std distributions
    std::mt19937_64 rng(987654);
    std::uniform_int_distribution<std::size_t> start(0, g.paper_count() - 1);
    std::map<std::size_t, std::size_t> oracle_hist;
    std::size_t accepted = 0;
    while (accepted < n) {
        std::uint32_t cur = static_cast<std::uint32_t>(start(rng));
        std::size_t len = 1;
        while (g.out_degree(cur) > 0) {
            auto edges = g.out_edges(cur);
            std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
            cur = edges[pick(rng)];
            ++len;
        }
        if (len < 2) continue;
        ++oracle_hist[std::min<std::size_t>(len, 12)];
        ++accepted;
    }

    std::map<std::size_t, std::size_t> hist;
    for (const auto& t : corpus.trails) ++hist[std::min<std::size_t>(t.size(), 12)];

    std::set<std::size_t> buckets;
    for (const auto& [k, v] : hist) buckets.insert(k);
    for (const auto& [k, v] : oracle_hist) buckets.insert(k);
    for (std::size_t b : buckets) {
        double f1 = double(hist[b]) / n;
        double f2 = double(oracle_hist[b]) / n;
        CHECK_THAT(f1, Catch::Matchers::WithinAbs(f2, 0.01));
    }
}

TEST_CASE("synthetic graph with zero cross probability keeps disciplines pure") {
    SyntheticSpec spec;
    spec.discipline_count = 3;
    spec.papers_per_discipline = 200;
    spec.periodicals_per_discipline = 4;
    spec.within_probability = 1.0;
    spec.cross_probability = 0.0;
    spec.citations_per_paper = 3;
    PaperGraph g = generate_synthetic_graph(spec);
    REQUIRE(g.edge_count() > 0);
    for (std::size_t p = 0; p < g.paper_count(); ++p)
        for (std::uint32_t t : g.out_edges(static_cast<std::uint32_t>(p)))
            CHECK(g.paper_ids()[p] % 3 == g.paper_ids()[t] % 3);
}

TEST_CASE("synthetic within-edge fraction matches the closed form") {
    SyntheticSpec spec;
    spec.discipline_count = 2;
    spec.papers_per_discipline = 20000;
    spec.periodicals_per_discipline = 10;
    spec.within_probability = 0.7;
    spec.cross_probability = 0.3;
    spec.citations_per_paper = 5;
    spec.seed = 9;
    PaperGraph g = generate_synthetic_graph(spec);
    std::size_t within = 0;
    for (std::size_t p = 0; p < g.paper_count(); ++p)
        for (std::uint32_t t : g.out_edges(static_cast<std::uint32_t>(p)))
            if (g.paper_ids()[p] % 2 == g.paper_ids()[t] % 2) ++within;
    double fraction = double(within) / double(g.edge_count());
    CHECK_THAT(fraction, Catch::Matchers::WithinAbs(0.7, 0.02));
}

TEST_CASE("synthetic generation is deterministic under its seed") {
    SyntheticSpec spec;
    spec.discipline_count = 2;
    spec.papers_per_discipline = 500;
    spec.periodicals_per_discipline = 6;
    spec.citations_per_paper = 3;
    spec.seed = 77;
    PaperGraph a = generate_synthetic_graph(spec);
    PaperGraph b = generate_synthetic_graph(spec);
    REQUIRE(a.edge_count() == b.edge_count());
    for (std::size_t p = 0; p < a.paper_count(); ++p) {
        auto ea = a.out_edges(static_cast<std::uint32_t>(p));
        auto eb = b.out_edges(static_cast<std::uint32_t>(p));
        REQUIRE(std::vector<std::uint32_t>(ea.begin(), ea.end()) ==
                std::vector<std::uint32_t>(eb.begin(), eb.end()));
        REQUIRE(a.paper_venue(static_cast<std::uint32_t>(p)) == b.paper_venue(static_cast<std::uint32_t>(p)));
    }
}

TEST_CASE("infeasible synthetic spec is rejected") {
    SyntheticSpec spec;
    spec.discipline_count = 1;
    spec.papers_per_discipline = 4;
    spec.periodicals_per_discipline = 1;
    spec.citations_per_paper = 4;
    CHECK_THROWS_AS(generate_synthetic_graph(spec), ConfigError);
}

TEST_CASE("trails file round trip") {
    TempDir tmp;
    PaperGraph g = testutil::chain_graph(30, 5);
    TrailCorpus corpus = generate_trail_corpus(g, 50, 2);
    write_trails(corpus, tmp.path("trails.txt"));
    TrailCorpus loaded = read_trails(tmp.path("trails.txt"));
    CHECK(loaded.trails == corpus.trails);
}
