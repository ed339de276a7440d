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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "perivec/perivec.hpp"

namespace pv = perivec;
using nlohmann::json;

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    for (auto field : pv::split_fields(text, ','))
        if (!field.empty()) out.emplace_back(field);
    return out;
}

std::vector<pv::PeriodicalId> parse_id_list(const std::string& text) {
    std::vector<pv::PeriodicalId> ids;
    for (const auto& tok : split_csv(text)) ids.push_back(pv::parse_u64(tok, "periodical id", 0));
    return ids;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw pv::IoError("cannot write output file: " + path);
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw pv::IoError("cannot create results directory: " + dir);
}

void require_inputs(std::initializer_list<std::pair<const char*, const std::string*>> paths) {
    for (const auto& [flag, path] : paths)
        if (!path->empty() && !std::filesystem::exists(*path))
            throw pv::IoError(std::string("input file for ") + flag + " does not exist: " + *path);
}

struct QueryOutput {
    std::string format = "tsv";  // tsv | json

    void write(std::ostream& out, const pv::VectorStore& store, const std::vector<pv::Scored>& rows) const {
        if (format == "json") {
            json arr = json::array();
            for (const auto& r : rows)
                arr.push_back({{"id", r.id}, {"score", r.score}, {"name", store.name(r.id)}});
            out << arr.dump() << '\n';
        } else {
            for (const auto& r : rows)
                out << r.id << '\t' << pv::format_double(r.score) << '\t' << store.name(r.id) << '\n';
        }
    }
};

// Shared lazily-built inputs for the evaluation subcommands.
struct EvalInputs {
    std::string model_path, metadata_path, edges_path, papers_path, matrix_path;
    std::optional<pv::VectorStore> store;
    std::optional<pv::PeriodicalCitationMatrix> matrix;
    std::optional<pv::PaperGraph> graph;

    const pv::VectorStore& get_store() {
        if (!store) {
            if (model_path.empty()) throw pv::ConfigError("this command needs --model");
            store = pv::VectorStore::load(model_path, metadata_path);
        }
        return *store;
    }
    const pv::PaperGraph& get_graph() {
        if (!graph) {
            if (edges_path.empty() || papers_path.empty())
                throw pv::ConfigError("this command needs --edges and --papers");
            graph = pv::load_citation_graph(edges_path, papers_path);
        }
        return *graph;
    }
    const pv::PeriodicalCitationMatrix& get_matrix(unsigned workers) {
        if (!matrix) {
            if (!matrix_path.empty())
                matrix = pv::load_citation_matrix(matrix_path);
            else
                matrix = pv::build_periodical_citation_matrix(get_graph(), workers);
        }
        return *matrix;
    }

    std::vector<pv::PairScorer> scorers(const std::vector<std::string>& names, unsigned workers) {
        std::vector<pv::PairScorer> out;
        for (const auto& name : names) {
            if (name == "p2v")
                out.push_back(pv::make_embedding_scorer(get_store()));
            else if (name == "cv")
                out.push_back(pv::make_citation_vector_scorer(get_matrix(workers)));
            else if (name == "jac")
                out.push_back(pv::make_jaccard_scorer(get_matrix(workers)));
            else
                throw pv::ConfigError("unknown scorer '" + name + "' (expected p2v, cv or jac)");
        }
        return out;
    }
};

pv::SyntheticSpec parse_synthetic_spec(const std::string& text, std::uint64_t seed) {
    pv::SyntheticSpec spec;
    spec.seed = seed;
    for (const auto& part : split_csv(text)) {
        auto eq = part.find('=');
        if (eq == std::string::npos)
            throw pv::ConfigError("synthetic spec entries must be key=value, got '" + part + "'");
        std::string key = part.substr(0, eq);
        std::string value = part.substr(eq + 1);
        if (key == "disciplines")
            spec.discipline_count = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "subs")
            spec.subs_per_discipline = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "papers")
            spec.papers_per_discipline = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "periodicals")
            spec.periodicals_per_discipline = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "p-sub")
            spec.within_sub_probability = std::stod(value);
        else if (key == "p-within")
            spec.within_probability = std::stod(value);
        else if (key == "p-cross")
            spec.cross_probability = std::stod(value);
        else if (key == "citations")
            spec.citations_per_paper = static_cast<std::uint32_t>(std::stoul(value));
        else if (key == "roots")
            spec.root_fraction = std::stod(value);
        else
            throw pv::ConfigError("unknown synthetic spec key '" + key + "'");
    }
    return spec;
}

void write_synthetic_files(const pv::SyntheticSpec& spec, const std::string& edges_path,
                           const std::string& papers_path, const std::string& catalog_path) {
    pv::PaperGraph g = pv::generate_synthetic_graph(spec);
    {
        auto out = open_out(papers_path);
        for (std::size_t p = 0; p < g.paper_count(); ++p)
            out << g.paper_ids()[p] << '\t' << g.paper_venue(static_cast<std::uint32_t>(p)) << '\n';
    }
    {
        auto out = open_out(edges_path);
        for (std::size_t p = 0; p < g.paper_count(); ++p)
            for (std::uint32_t cited : g.out_edges(static_cast<std::uint32_t>(p)))
                out << g.paper_ids()[p] << '\t' << g.paper_ids()[cited] << '\n';
    }
    if (!catalog_path.empty()) {
        auto out = open_out(catalog_path);
        for (const auto& row : pv::synthetic_catalog(spec))
            out << row.id << '\t' << row.name << '\t' << row.discipline << '\t' << row.sub_discipline
                << '\n';
    }
    std::cout << "synthetic graph: " << g.paper_count() << " papers, " << g.edge_count() << " edges, "
              << g.periodical_count() << " periodicals\n";
}

int run_repl(const std::string& model_path, const std::string& metadata_path) {
    pv::VectorStore store = pv::VectorStore::load(model_path, metadata_path);
    std::map<std::string, pv::Axis> axes;
    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream in(line);
        std::string cmd;
        in >> cmd;
        if (cmd.empty()) continue;
        try {
            if (cmd == "quit") return 0;
            if (cmd == "similar") {
                std::uint64_t id, n;
                if (!(in >> id >> n)) throw pv::ConfigError("usage: similar <id> <n>");
                for (const auto& r : pv::most_similar(store, id, n))
                    std::cout << r.id << '\t' << pv::format_double(r.score) << '\t' << store.name(r.id)
                              << '\n';
            } else if (cmd == "analogy") {
                std::uint64_t a, b, c, n;
                if (!(in >> a >> b >> c >> n)) throw pv::ConfigError("usage: analogy <a> <b> <c> <n>");
                for (const auto& r : pv::analogy_query(store, a, b, c, n))
                    std::cout << r.id << '\t' << pv::format_double(r.score) << '\t' << store.name(r.id)
                              << '\n';
            } else if (cmd == "axis") {
                std::string name, pos, neg;
                if (!(in >> name >> pos >> neg))
                    throw pv::ConfigError("usage: axis <name> <pos-ids> <neg-ids>");
                axes.insert_or_assign(name,
                                      pv::build_axis(store, parse_id_list(pos), parse_id_list(neg)));
                std::cout << "axis\t" << name << "\tdefined\n";
            } else if (cmd == "project") {
                std::uint64_t id;
                std::string name;
                if (!(in >> id >> name)) throw pv::ConfigError("usage: project <id> <axis-name>");
                auto it = axes.find(name);
                if (it == axes.end()) throw pv::LookupError("axis '" + name + "' is not defined");
                std::cout << id << '\t' << pv::format_double(pv::project_on_axis(store, id, it->second))
                          << '\n';
            } else {
                throw pv::ConfigError("unknown command '" + cmd + "'");
            }
        } catch (const std::exception& e) {
            std::cout << "error: " << e.what() << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodical embeddings from citation-network random walks"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);

    std::uint64_t seed = 42;
    unsigned workers = 1;
    app.add_option("--seed", seed, "base seed for all randomness")->capture_default_str();
    app.add_option("--workers", workers, "worker threads for parallel stages")->capture_default_str();

    // ---- ingest ----------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "load and validate a citation graph, or emit a synthetic one");
    std::string in_edges, in_papers, out_periodicals, synthetic_spec, out_edges, out_papers, out_catalog;
    ingest->add_option("--edges", in_edges, "edges.tsv: citing<TAB>cited");
    ingest->add_option("--papers", in_papers, "papers.tsv: paper<TAB>periodical");
    ingest->add_option("--out-periodicals", out_periodicals, "write the periodical sidecar table");
    ingest->add_option("--synthetic", synthetic_spec,
                       "generate a planted-partition graph, e.g. "
                       "disciplines=4,subs=2,papers=1000,periodicals=20,p-sub=0.3,p-within=0.5,p-cross=0.2,"
                       "citations=5,roots=0.05");
    ingest->add_option("--out-edges", out_edges, "edges output (synthetic mode)");
    ingest->add_option("--out-papers", out_papers, "papers output (synthetic mode)");
    ingest->add_option("--out-catalog", out_catalog, "catalog output (synthetic mode)");

    // ---- walk ------------------------------------------------------------
    auto* walk = app.add_subcommand("walk", "sample citation trails and write the periodical trail corpus");
    std::string walk_edges, walk_papers, walk_out;
    std::uint64_t walk_n = 1000;
    walk->add_option("--edges", walk_edges)->required();
    walk->add_option("--papers", walk_papers)->required();
    walk->add_option("--n", walk_n, "number of accepted trails")->capture_default_str();
    walk->add_option("--out", walk_out, "trails output file")->required();

    // ---- train -----------------------------------------------------------
    auto* train = app.add_subcommand("train", "train periodical vectors on a trail corpus");
    std::string train_corpus, train_out, train_out_context;
    pv::TrainConfig cfg;
    train->add_option("--corpus", train_corpus)->required();
    train->add_option("--out", train_out, "model output (input vectors)")->required();
    train->add_option("--out-context", train_out_context, "sidecar output vectors");
    train->add_option("--window", cfg.window)->capture_default_str();
    train->add_option("--dim", cfg.dimension)->capture_default_str();
    train->add_option("--negatives", cfg.negatives)->capture_default_str();
    train->add_option("--min-count", cfg.min_count)->capture_default_str();
    train->add_option("--epochs", cfg.epochs)->capture_default_str();
    train->add_option("--lr", cfg.initial_lr)->capture_default_str();
    train->add_option("--lr-min", cfg.final_lr)->capture_default_str();
    train->add_option("--noise-exponent", cfg.noise_exponent)->capture_default_str();
    train->add_option("--sample", cfg.subsample, "frequent-token subsampling threshold, 0 disables")
        ->capture_default_str();
    train->add_flag("--fixed-window", cfg.fixed_window, "use the full window instead of shrinking");

    // ---- queries ---------------------------------------------------------
    QueryOutput qout;
    std::string model_path, metadata_path, query_out;
    auto add_model_opts = [&](CLI::App* cmd) {
        cmd->add_option("--model", model_path)->required();
        cmd->add_option("--metadata", metadata_path, "periodicals.tsv with names and labels");
        cmd->add_option("--format", qout.format, "tsv or json")->capture_default_str();
        cmd->add_option("--out", query_out, "output file (default stdout)");
    };

    auto* query_similar = app.add_subcommand("query-similar", "nearest periodicals by cosine");
    std::uint64_t qs_id = 0, qs_top = 10;
    std::string qs_exclude;
    add_model_opts(query_similar);
    query_similar->add_option("--id", qs_id)->required();
    query_similar->add_option("--top", qs_top)->capture_default_str();
    query_similar->add_option("--exclude", qs_exclude, "comma-separated ids to exclude");

    auto* query_analogy = app.add_subcommand("query-analogy", "rank candidates for v(c) - v(a) + v(b)");
    std::uint64_t qa_a = 0, qa_b = 0, qa_c = 0, qa_top = 10;
    add_model_opts(query_analogy);
    query_analogy->add_option("--a", qa_a)->required();
    query_analogy->add_option("--b", qa_b)->required();
    query_analogy->add_option("--c", qa_c)->required();
    query_analogy->add_option("--top", qa_top)->capture_default_str();

    // ---- axis / spectrum ---------------------------------------------------
    auto* axis_cmd = app.add_subcommand("axis", "build an axis from pole id sets and project periodicals");
    std::string axis_model, axis_metadata, axis_pos, axis_neg, axis_project, axis_out;
    bool axis_all = false;
    axis_cmd->add_option("--model", axis_model)->required();
    axis_cmd->add_option("--metadata", axis_metadata);
    axis_cmd->add_option("--pos", axis_pos, "comma-separated positive pole ids")->required();
    axis_cmd->add_option("--neg", axis_neg, "comma-separated negative pole ids")->required();
    axis_cmd->add_option("--project", axis_project, "ids to project (default: all)");
    axis_cmd->add_flag("--all", axis_all, "project every stored periodical");
    axis_cmd->add_option("--out", axis_out, "output file (default stdout)");

    auto* spectrum = app.add_subcommand("spectrum", "project all periodicals on a discipline-anchored axis");
    std::string spec_model, spec_metadata, spec_pos, spec_neg, spec_outdir;
    spectrum->add_option("--model", spec_model)->required();
    spectrum->add_option("--metadata", spec_metadata)->required();
    spectrum->add_option("--pos-disciplines", spec_pos)->required();
    spectrum->add_option("--neg-disciplines", spec_neg)->required();
    spectrum->add_option("--out-dir", spec_outdir)->required();

    // ---- baseline ----------------------------------------------------------
    auto* baseline = app.add_subcommand("baseline", "build the periodical citation matrix and PageRank scores");
    std::string base_edges, base_papers, base_out_matrix, base_out_pagerank;
    double damping = 0.85, pr_tol = 1e-10;
    baseline->add_option("--edges", base_edges)->required();
    baseline->add_option("--papers", base_papers)->required();
    baseline->add_option("--out-matrix", base_out_matrix, "coordinate-format matrix output");
    baseline->add_option("--pagerank-out", base_out_pagerank, "per-periodical PageRank scores");
    baseline->add_option("--damping", damping)->capture_default_str();
    baseline->add_option("--tol", pr_tol)->capture_default_str();

    // ---- evaluations -------------------------------------------------------
    EvalInputs eval;
    std::string eval_outdir, eval_scorers = "p2v";
    auto add_eval_opts = [&](CLI::App* cmd, bool with_graph) {
        cmd->add_option("--model", eval.model_path);
        cmd->add_option("--metadata", eval.metadata_path);
        if (with_graph) {
            cmd->add_option("--edges", eval.edges_path);
            cmd->add_option("--papers", eval.papers_path);
            cmd->add_option("--matrix", eval.matrix_path, "reuse a saved citation matrix");
        }
        cmd->add_option("--out-dir", eval_outdir)->required();
        cmd->add_option("--scorers", eval_scorers, "comma-separated: p2v,cv,jac")->capture_default_str();
    };

    auto* eval_pairs = app.add_subcommand("eval-pairs", "pair-group similarity distributions and KL divergence");
    std::uint64_t pairs_per_group = 100000;
    add_eval_opts(eval_pairs, true);
    eval_pairs->add_option("--pairs", pairs_per_group)->capture_default_str();

    auto* eval_knn = app.add_subcommand("eval-knn", "kNN discipline prediction under cross validation");
    std::uint32_t knn_k = 10, knn_folds = 5;
    add_eval_opts(eval_knn, true);
    eval_knn->add_option("--k", knn_k)->capture_default_str();
    eval_knn->add_option("--folds", knn_folds)->capture_default_str();

    auto* eval_cluster = app.add_subcommand("eval-cluster", "k-means clusters vs catalog agreement");
    std::uint32_t cluster_k = 13, cluster_restarts = 10;
    double ecs_alpha = 0.9;
    add_eval_opts(eval_cluster, false);
    eval_cluster->add_option("--k", cluster_k)->capture_default_str();
    eval_cluster->add_option("--restarts", cluster_restarts)->capture_default_str();
    eval_cluster->add_option("--ecs-alpha", ecs_alpha)->capture_default_str();

    auto* eval_rank = app.add_subcommand("eval-rank", "rank correlation against reference rankings");
    std::string rankings_path;
    double agreement_threshold = 0.2;
    add_eval_opts(eval_rank, true);
    eval_rank->add_option("--rankings", rankings_path)->required();
    eval_rank->add_option("--agreement-threshold", agreement_threshold)->capture_default_str();

    auto* eval_venue = app.add_subcommand("eval-venue", "venue prediction from reference lists");
    std::string venue_models = "majority,p2v";
    std::uint64_t venue_sample = 10000, venue_repeats = 10;
    add_eval_opts(eval_venue, true);
    eval_venue->add_option("--models", venue_models, "comma-separated: majority,p2v,cv,jac")
        ->capture_default_str();
    eval_venue->add_option("--sample", venue_sample)->capture_default_str();
    eval_venue->add_option("--repeats", venue_repeats)->capture_default_str();

    // ---- analogy lab -------------------------------------------------------
    auto* analogy_graph = app.add_subcommand("analogy-graph", "grow an analogy graph from two poles and a seed");
    std::string ag_model, ag_metadata, ag_out_edges, ag_out_json;
    std::uint64_t ag_pole_a = 0, ag_pole_b = 0, ag_seed_id = 0;
    std::uint32_t ag_depth = 5;
    bool ag_same_discipline = false;
    analogy_graph->add_option("--model", ag_model)->required();
    analogy_graph->add_option("--metadata", ag_metadata);
    analogy_graph->add_option("--pole-a", ag_pole_a)->required();
    analogy_graph->add_option("--pole-b", ag_pole_b)->required();
    analogy_graph->add_option("--seed-id", ag_seed_id)->required();
    analogy_graph->add_option("--max-depth", ag_depth)->capture_default_str();
    analogy_graph->add_flag("--same-discipline", ag_same_discipline,
                            "restrict targets to the seed's discipline");
    analogy_graph->add_option("--out-edges", ag_out_edges, "edge-list output")->required();
    analogy_graph->add_option("--out-json", ag_out_json, "machine-readable graph description");

    auto* analogy_suite = app.add_subcommand("analogy-suite",
                                             "author-overlap validation over all pole/seed choices of a "
                                             "discipline pair");
    std::string as_model, as_metadata, as_edges, as_papers, as_matrix, as_authorship, as_d1, as_d2,
        as_outdir, as_builder = "p2v";
    std::uint32_t as_depth = 5;
    bool as_two_cycles_only = false;
    analogy_suite->add_option("--model", as_model)->required();
    analogy_suite->add_option("--metadata", as_metadata)->required();
    analogy_suite->add_option("--edges", as_edges)->required();
    analogy_suite->add_option("--papers", as_papers)->required();
    analogy_suite->add_option("--matrix", as_matrix, "reuse a saved citation matrix");
    analogy_suite->add_option("--authorship", as_authorship, "authorship.tsv: paper<TAB>author")->required();
    analogy_suite->add_option("--d1", as_d1)->required();
    analogy_suite->add_option("--d2", as_d2)->required();
    analogy_suite->add_option("--builder", as_builder, "vector model growing the graphs: p2v or cv")
        ->capture_default_str();
    analogy_suite->add_option("--max-depth", as_depth)->capture_default_str();
    analogy_suite->add_flag("--two-cycles-only", as_two_cycles_only,
                            "exclude only mutual 2-cycles instead of all SCC edges");
    analogy_suite->add_option("--out-dir", as_outdir)->required();

    auto* axis_stability_cmd = app.add_subcommand("axis-stability", "axis robustness under pole subsampling");
    std::string st_model, st_metadata, st_pos, st_neg, st_sizes = "10", st_out;
    std::uint64_t st_repeats = 100;
    axis_stability_cmd->add_option("--model", st_model)->required();
    axis_stability_cmd->add_option("--metadata", st_metadata)->required();
    axis_stability_cmd->add_option("--pos-disciplines", st_pos)->required();
    axis_stability_cmd->add_option("--neg-disciplines", st_neg)->required();
    axis_stability_cmd->add_option("--sizes", st_sizes, "comma-separated subset sizes")->capture_default_str();
    axis_stability_cmd->add_option("--repeats", st_repeats)->capture_default_str();
    axis_stability_cmd->add_option("--out", st_out, "output file (default stdout)");

    auto* repl = app.add_subcommand("repl", "interactive query session over a trained model");
    std::string repl_model, repl_metadata;
    repl->add_option("--model", repl_model)->required();
    repl->add_option("--metadata", repl_metadata);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        if (*ingest) {
            if (!synthetic_spec.empty()) {
                if (out_edges.empty() || out_papers.empty())
                    throw pv::ConfigError("synthetic mode needs --out-edges and --out-papers");
                write_synthetic_files(parse_synthetic_spec(synthetic_spec, seed), out_edges, out_papers,
                                      out_catalog);
            } else {
                if (in_edges.empty() || in_papers.empty())
                    throw pv::ConfigError("ingest needs --edges and --papers (or --synthetic)");
                require_inputs({{"--edges", &in_edges}, {"--papers", &in_papers}});
                pv::PaperGraph g = pv::load_citation_graph(in_edges, in_papers);
                std::cout << "papers\t" << g.paper_count() << "\nedges\t" << g.edge_count()
                          << "\nperiodicals\t" << g.periodical_count() << "\nself_loops_dropped\t"
                          << g.self_loops_dropped() << '\n';
                if (!out_periodicals.empty()) {
                    std::vector<std::uint64_t> papers_per(g.periodical_count(), 0);
                    for (std::size_t p = 0; p < g.paper_count(); ++p)
                        ++papers_per[g.venue_index(static_cast<std::uint32_t>(p))];
                    auto out = open_out(out_periodicals);
                    for (std::size_t v = 0; v < g.periodical_count(); ++v)
                        out << v << '\t' << g.periodical_id(static_cast<std::uint32_t>(v)) << '\t'
                            << papers_per[v] << '\n';
                }
            }
        } else if (*walk) {
            require_inputs({{"--edges", &walk_edges}, {"--papers", &walk_papers}});
            pv::PaperGraph g = pv::load_citation_graph(walk_edges, walk_papers);
            pv::TrailCorpus corpus = pv::generate_trail_corpus(g, walk_n, seed, workers);
            pv::write_trails(corpus, walk_out);
            std::cout << "wrote " << corpus.size() << " trails to " << walk_out << '\n';
        } else if (*train) {
            require_inputs({{"--corpus", &train_corpus}});
            cfg.seed = seed;
            pv::EmbeddingMatrix m = pv::train_file(train_corpus, cfg, workers);
            m.save(train_out);
            if (!train_out_context.empty()) m.save_output(train_out_context);
            std::cout << "trained " << m.rows() << " periodical vectors (dim " << m.dimension << ")\n";
        } else if (*query_similar) {
            require_inputs({{"--model", &model_path}});
            pv::VectorStore store = pv::VectorStore::load(model_path, metadata_path);
            std::unordered_set<pv::PeriodicalId> exclude;
            for (pv::PeriodicalId id : parse_id_list(qs_exclude)) exclude.insert(id);
            auto rows = pv::most_similar(store, qs_id, qs_top, exclude);
            if (query_out.empty()) {
                qout.write(std::cout, store, rows);
            } else {
                auto out = open_out(query_out);
                qout.write(out, store, rows);
            }
        } else if (*query_analogy) {
            require_inputs({{"--model", &model_path}});
            pv::VectorStore store = pv::VectorStore::load(model_path, metadata_path);
            auto rows = pv::analogy_query(store, qa_a, qa_b, qa_c, qa_top);
            if (query_out.empty()) {
                qout.write(std::cout, store, rows);
            } else {
                auto out = open_out(query_out);
                qout.write(out, store, rows);
            }
        } else if (*axis_cmd) {
            require_inputs({{"--model", &axis_model}});
            pv::VectorStore store = pv::VectorStore::load(axis_model, axis_metadata);
            pv::Axis axis = pv::build_axis(store, parse_id_list(axis_pos), parse_id_list(axis_neg));
            std::vector<pv::PeriodicalId> targets;
            if (axis_all || axis_project.empty()) {
                targets = store.ids();
                std::sort(targets.begin(), targets.end());
            } else {
                targets = parse_id_list(axis_project);
            }
            std::ostringstream body;
            for (pv::PeriodicalId id : targets)
                body << id << '\t' << pv::format_double(pv::project_on_axis(store, id, axis)) << '\t'
                     << store.name(id) << '\n';
            if (axis_out.empty())
                std::cout << body.str();
            else
                open_out(axis_out) << body.str();
        } else if (*spectrum) {
            require_inputs({{"--model", &spec_model}, {"--metadata", &spec_metadata}});
            pv::VectorStore store = pv::VectorStore::load(spec_model, spec_metadata);
            pv::DisciplineCatalog catalog = pv::DisciplineCatalog::load(spec_metadata);
            auto pos = split_csv(spec_pos);
            auto neg = split_csv(spec_neg);
            auto report = pv::axis_spectrum(store, catalog, {pos.begin(), pos.end()},
                                            {neg.begin(), neg.end()});
            ensure_dir(spec_outdir);
            {
                auto out = open_out(spec_outdir + "/spectrum.tsv");
                for (const auto& [id, s] : report.projections)
                    out << id << '\t' << pv::format_double(s) << '\t'
                        << (catalog.has(id) ? catalog.discipline(id) : "") << '\t' << store.name(id)
                        << '\n';
            }
            {
                auto out = open_out(spec_outdir + "/spectrum_disciplines.tsv");
                for (const auto& [disc, mean] : report.discipline_means)
                    out << disc << '\t' << pv::format_double(mean) << '\n';
            }
            std::cout << "spectrum over " << report.projections.size() << " periodicals, "
                      << report.discipline_means.size() << " disciplines\n";
        } else if (*baseline) {
            require_inputs({{"--edges", &base_edges}, {"--papers", &base_papers}});
            pv::PaperGraph g = pv::load_citation_graph(base_edges, base_papers);
            pv::PeriodicalCitationMatrix matrix = pv::build_periodical_citation_matrix(g, workers);
            if (!base_out_matrix.empty()) matrix.save(base_out_matrix);
            if (!base_out_pagerank.empty()) {
                auto scores = pv::pagerank_scores(matrix, damping, pr_tol);
                std::vector<std::pair<pv::PeriodicalId, double>> rows;
                for (std::size_t i = 0; i < matrix.size(); ++i)
                    rows.emplace_back(matrix.ids()[i], scores[i]);
                std::sort(rows.begin(), rows.end());
                auto out = open_out(base_out_pagerank);
                for (const auto& [id, s] : rows) out << id << '\t' << pv::format_double(s) << '\n';
            }
            std::cout << "matrix over " << matrix.size() << " periodicals, total citations "
                      << matrix.total() << '\n';
        } else if (*eval_pairs) {
            pv::DisciplineCatalog catalog = pv::DisciplineCatalog::load(eval.metadata_path);
            ensure_dir(eval_outdir);
            for (const auto& scorer : eval.scorers(split_csv(eval_scorers), workers)) {
                auto report = pv::pair_group_report(scorer, catalog, pairs_per_group, seed);
                auto out = open_out(eval_outdir + "/pair_groups_" + scorer.name + ".tsv");
                out << "group\tpairs\tmean\tkl_vs_random\n";
                for (const auto& g : report.groups)
                    out << g.name << '\t' << g.scores.size() << '\t' << pv::format_double(g.mean) << '\t'
                        << (g.kl_vs_random ? pv::format_double(*g.kl_vs_random) : "-") << '\n';
                for (const auto& skipped : report.skipped) out << skipped << "\tskipped\t-\t-\n";
            }
        } else if (*eval_knn) {
            pv::DisciplineCatalog catalog = pv::DisciplineCatalog::load(eval.metadata_path);
            ensure_dir(eval_outdir);
            for (const auto& scorer : eval.scorers(split_csv(eval_scorers), workers)) {
                auto report = pv::predict_discipline_knn(scorer, catalog, knn_k, knn_folds, seed);
                auto out = open_out(eval_outdir + "/knn_" + scorer.name + ".tsv");
                out << "metric\tmean\tci95\n";
                out << "macro_f1\t" << pv::format_double(report.macro_f1.mean) << '\t'
                    << pv::format_double(report.macro_f1.half_width) << '\n';
                out << "micro_f1\t" << pv::format_double(report.micro_f1.mean) << '\t'
                    << pv::format_double(report.micro_f1.half_width) << '\n';
            }
        } else if (*eval_cluster) {
            const pv::VectorStore& store = eval.get_store();
            pv::DisciplineCatalog catalog = pv::DisciplineCatalog::load(eval.metadata_path);
            std::vector<pv::PeriodicalId> ids;
            std::unordered_map<pv::PeriodicalId, std::uint32_t> reference;
            std::map<std::string, std::uint32_t> disc_index;
            for (pv::PeriodicalId id : catalog.labeled_ids()) {
                if (!store.contains(id) || catalog.discipline(id) == pv::kInterdisciplineLabel) continue;
                ids.push_back(id);
                auto [it, unused] = disc_index.emplace(catalog.discipline(id),
                                                       static_cast<std::uint32_t>(disc_index.size()));
                reference.emplace(id, it->second);
            }
            auto clusters = pv::kmeans_cluster(store, ids, cluster_k, cluster_restarts, seed);
            auto agreement = pv::element_centric_similarity(clusters.as_map(), reference, ecs_alpha);
            ensure_dir(eval_outdir);
            auto out = open_out(eval_outdir + "/cluster_agreement.tsv");
            out << "mean_agreement\t" << pv::format_double(agreement.mean) << "\npoints\t"
                << agreement.scores.size() << "\nid\tagreement\n";
            for (const auto& [id, s] : agreement.scores) out << id << '\t' << pv::format_double(s) << '\n';
            std::cout << "mean agreement " << pv::format_double(agreement.mean) << " over "
                      << agreement.scores.size() << " periodicals\n";
        } else if (*eval_rank) {
            require_inputs({{"--rankings", &rankings_path}});
            auto refs = pv::load_rankings(rankings_path);
            auto scorers = eval.scorers(split_csv(eval_scorers), workers);
            auto rows = pv::rank_evaluation(refs, scorers, seed, agreement_threshold);
            ensure_dir(eval_outdir);
            auto out = open_out(eval_outdir + "/rank_eval.tsv");
            out << "scorer\tlists\tmean_tau\tci95\n";
            for (const auto& r : rows)
                out << r.scorer << '\t' << r.lists << '\t' << pv::format_double(r.tau.mean) << '\t'
                    << pv::format_double(r.tau.half_width) << '\n';
        } else if (*eval_venue) {
            const pv::PaperGraph& g = eval.get_graph();
            std::vector<pv::VenueModel> models;
            for (const auto& name : split_csv(venue_models)) {
                if (name == "majority")
                    models.push_back(pv::make_majority_venue_model());
                else if (name == "p2v")
                    models.push_back(pv::make_embedding_venue_model(eval.get_store()));
                else if (name == "cv")
                    models.push_back(pv::make_sparse_venue_model("cv", eval.get_matrix(workers), false));
                else if (name == "jac")
                    models.push_back(pv::make_sparse_venue_model("jac", eval.get_matrix(workers), true));
                else
                    throw pv::ConfigError("unknown venue model '" + name + "'");
            }
            auto rows = pv::venue_prediction_eval(g, models, venue_sample, venue_repeats, seed);
            ensure_dir(eval_outdir);
            auto out = open_out(eval_outdir + "/venue_accuracy.tsv");
            out << "model\tmean_accuracy\tci95\n";
            for (const auto& r : rows)
                out << r.model << '\t' << pv::format_double(r.accuracy.mean) << '\t'
                    << pv::format_double(r.accuracy.half_width) << '\n';
        } else if (*analogy_graph) {
            require_inputs({{"--model", &ag_model}});
            pv::VectorStore store = pv::VectorStore::load(ag_model, ag_metadata);
            auto g = pv::build_analogy_graph(store, ag_pole_a, ag_pole_b, ag_seed_id, ag_depth,
                                             ag_same_discipline);
            {
                auto out = open_out(ag_out_edges);
                for (const auto& e : g.edges)
                    out << e.src << '\t' << e.dst << '\t'
                        << (e.dir == pv::AnalogyDirection::toward_b ? "toward_b" : "toward_a") << '\n';
            }
            if (!ag_out_json.empty()) {
                json j{{"pole_a", g.pole_a}, {"pole_b", g.pole_b},   {"seed", g.seed},
                       {"max_depth", g.max_depth}, {"nodes", g.nodes}};
                json edges = json::array();
                for (const auto& e : g.edges)
                    edges.push_back({{"src", e.src},
                                     {"dst", e.dst},
                                     {"dir", e.dir == pv::AnalogyDirection::toward_b ? "toward_b"
                                                                                     : "toward_a"}});
                j["edges"] = std::move(edges);
                open_out(ag_out_json) << j.dump(2) << '\n';
            }
            std::cout << "analogy graph: " << g.nodes.size() << " nodes, " << g.edges.size()
                      << " edges\n";
        } else if (*analogy_suite) {
            require_inputs({{"--model", &as_model},
                            {"--metadata", &as_metadata},
                            {"--edges", &as_edges},
                            {"--papers", &as_papers},
                            {"--authorship", &as_authorship}});
            pv::PaperGraph g = pv::load_citation_graph(as_edges, as_papers);
            pv::PeriodicalCitationMatrix matrix = as_matrix.empty()
                                                      ? pv::build_periodical_citation_matrix(g, workers)
                                                      : pv::load_citation_matrix(as_matrix);
            pv::VectorStore store = as_builder == "cv"
                                        ? pv::citation_vector_store(matrix)
                                        : pv::VectorStore::load(as_model, as_metadata);
            if (as_builder != "cv" && as_builder != "p2v")
                throw pv::ConfigError("--builder must be p2v or cv");
            pv::DisciplineCatalog catalog = pv::DisciplineCatalog::load(as_metadata);
            pv::AuthorIndex idx = pv::AuthorIndex::load(as_authorship, g);
            auto scores = pv::pagerank_scores(matrix);
            std::unordered_map<pv::PeriodicalId, double> pagerank;
            for (std::size_t i = 0; i < matrix.size(); ++i) pagerank.emplace(matrix.ids()[i], scores[i]);
            auto policy = as_two_cycles_only ? pv::CyclePolicy::two_cycles_only
                                             : pv::CyclePolicy::strongly_connected;
            auto report = pv::discipline_pair_analogy_suite(store, catalog, idx, as_d1, as_d2, pagerank,
                                                            as_depth, policy);
            ensure_dir(as_outdir);
            auto out = open_out(as_outdir + "/analogy_suite_" + as_builder + ".tsv");
            out << "graphs\t" << report.graph_count << "\nundefined\t" << report.undefined_count
                << "\nmean_fraction\t" << pv::format_double(report.mean_fraction) << "\nfractions\n";
            for (double f : report.fractions) out << pv::format_double(f) << '\n';
            std::cout << "mean satisfying fraction " << pv::format_double(report.mean_fraction)
                      << " over " << report.graph_count << " graphs\n";
        } else if (*axis_stability_cmd) {
            require_inputs({{"--model", &st_model}, {"--metadata", &st_metadata}});
            pv::VectorStore store = pv::VectorStore::load(st_model, st_metadata);
            pv::DisciplineCatalog catalog = pv::DisciplineCatalog::load(st_metadata);
            auto pos = split_csv(st_pos);
            auto neg = split_csv(st_neg);
            std::vector<std::size_t> sizes;
            for (const auto& s : split_csv(st_sizes)) sizes.push_back(std::stoull(s));
            auto rows = pv::axis_stability(store, catalog, {pos.begin(), pos.end()},
                                           {neg.begin(), neg.end()}, sizes, st_repeats, seed);
            std::ostringstream body;
            body << "subset_size\tmean_rho\tci95\n";
            for (const auto& r : rows)
                body << r.subset_size << '\t' << pv::format_double(r.rho.mean) << '\t'
                     << pv::format_double(r.rho.half_width) << '\n';
            if (st_out.empty())
                std::cout << body.str();
            else
                open_out(st_out) << body.str();
        } else if (*repl) {
            require_inputs({{"--model", &repl_model}});
            return run_repl(repl_model, repl_metadata);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
