// adaptrank: command-line front end for the reranking pipeline.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "adaptrank/corpus.hpp"
#include "adaptrank/cross_validate.hpp"
#include "adaptrank/error.hpp"
#include "adaptrank/metatrain.hpp"
#include "adaptrank/metrics.hpp"
#include "adaptrank/noise_bench.hpp"
#include "adaptrank/ranker.hpp"
#include "adaptrank/rerank.hpp"
#include "adaptrank/retrieval.hpp"
#include "adaptrank/rng.hpp"
#include "adaptrank/run_file.hpp"
#include "adaptrank/synthesis.hpp"
#include "adaptrank/synthetic_collection.hpp"

namespace fs = std::filesystem;
using namespace adaptrank;

namespace {

struct Global {
  std::uint64_t seed = 0;
  fs::path out = "out";
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f.flush()) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const Global& g) {
  fs::create_directories(g.out);
  return g.out;
}

Arch parse_arch(const std::string& name) {
  if (name == "linear") return Arch::Linear;
  if (name == "mlp") return Arch::Mlp;
  throw Error("unknown architecture '" + name + "' (expected linear or mlp)");
}

OptimizerConfig::Kind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerConfig::Kind::Adam;
  if (name == "sgd") return OptimizerConfig::Kind::Sgd;
  throw Error("unknown optimizer '" + name + "' (expected adam or sgd)");
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  SyntheticSpec spec;
};

void run_generate(const Global& g, GenerateArgs a) {
  a.spec.seed = g.seed;
  const SyntheticCollection c = generate_synthetic_collection(a.spec);
  const fs::path dir = prepare_out(g);
  write_collection(dir, c);
  std::cout << fmt::format("wrote {} documents, {} queries, {} judgments to {}\n", c.corpus.size(),
                           c.queries.size(), c.qrels.size(), dir.string());
}

// ---------------------------------------------------------------- index

struct IndexArgs {
  std::string corpus;
  double k1 = 0.9;
  double b = 0.4;
  std::size_t top = 10;
};

void run_index(const Global& g, const IndexArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  const InvertedIndex index = InvertedIndex::build(corpus, {a.k1, a.b});
  std::size_t tokens = 0;
  std::size_t max_len = 0;
  std::size_t min_len = SIZE_MAX;
  for (DocNo d = 0; d < index.n_docs(); ++d) {
    tokens += index.doc_len(d);
    max_len = std::max<std::size_t>(max_len, index.doc_len(d));
    min_len = std::min<std::size_t>(min_len, index.doc_len(d));
  }
  std::vector<TermId> by_df(index.n_terms());
  for (TermId t = 0; t < by_df.size(); ++t) by_df[t] = t;
  std::sort(by_df.begin(), by_df.end(), [&](TermId x, TermId y) {
    const auto dx = index.postings(x).size();
    const auto dy = index.postings(y).size();
    return dx != dy ? dx > dy : index.term(x) < index.term(y);
  });
  by_df.resize(std::min(a.top, by_df.size()));

  nlohmann::json j{{"documents", index.n_docs()},
                   {"terms", index.n_terms()},
                   {"tokens", tokens},
                   {"avg_doc_len", index.avg_doc_len()},
                   {"min_doc_len", min_len},
                   {"max_doc_len", max_len},
                   {"k1", a.k1},
                   {"b", a.b}};
  std::string text = fmt::format(
      "documents    {}\nterms        {}\ntokens       {}\navg doc len  {:.3f}\ndoc len      {}..{}\n",
      index.n_docs(), index.n_terms(), tokens, index.avg_doc_len(), min_len, max_len);
  nlohmann::json top = nlohmann::json::array();
  text += "most frequent terms (df):\n";
  for (TermId t : by_df) {
    top.push_back({{"term", index.term(t)}, {"df", index.postings(t).size()}});
    text += fmt::format("  {:<20} {}\n", index.term(t), index.postings(t).size());
  }
  j["top_terms"] = std::move(top);

  const fs::path dir = prepare_out(g);
  write_json(dir / "index_stats.json", j);
  write_text(dir / "index_stats.txt", text);
  std::cout << text;
}

// ---------------------------------------------------------------- search

struct SearchArgs {
  std::string corpus;
  std::string queries;
  std::size_t depth = 100;
  double k1 = 0.9;
  double b = 0.4;
  std::string tag = "bm25";
  std::string save_run;
};

void run_search(const Global& g, const SearchArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  const InvertedIndex index = InvertedIndex::build(corpus, {a.k1, a.b});
  const std::vector<Query> queries = load_queries(a.queries);
  const RunFile run = bm25_run(index, queries, a.depth, a.tag);
  const fs::path path = a.save_run.empty() ? prepare_out(g) / "bm25.run" : fs::path(a.save_run);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_run(path, run);
  std::cout << fmt::format("ranked {} of {} queries to depth {}; run written to {}\n",
                           run.queries.size(), queries.size(), a.depth, path.string());
}

// ---------------------------------------------------------------- synthesize

struct SynthesizeArgs {
  std::string corpus;
  GeneratorConfig gen;
  double noise = 0.0;
};

void run_synthesize(const Global& g, SynthesizeArgs a) {
  const Corpus corpus = load_corpus(a.corpus);
  const InvertedIndex index = InvertedIndex::build(corpus);
  a.gen.seed = g.seed;
  std::vector<SyntheticTriple> triples = synthesize(corpus, index, a.gen);
  const fs::path dir = prepare_out(g);
  std::size_t flipped = 0;
  if (a.noise > 0.0) {
    if (a.noise > 1.0) throw Error("noise rate must lie in [0, 1]");
    const std::vector<bool> flags = inject_noise(triples, a.noise, mix_seed(g.seed, 32));
    flipped = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    write_noise_flags(dir / "noise_flags.jsonl", flags);
  }
  write_triples(dir / "triples.jsonl", triples);
  std::cout << fmt::format("wrote {} triples ({} flipped) to {}\n", triples.size(), flipped,
                           (dir / "triples.jsonl").string());
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string triples;
  std::string corpus;
  std::string queries;
  std::string qrels;
  std::string run;
  std::size_t depth = 100;
  std::size_t per_pos = 2;
  bool uniform = false;
  std::string arch = "linear";
  std::size_t hidden = RankerParams::kDefaultHidden;
  double init_scale = 0.1;
  std::string optimizer = "adam";
  TrainConfig train;
};

void run_train(const Global& g, TrainArgs a) {
  const Corpus corpus = load_corpus(a.corpus);
  const InvertedIndex index = InvertedIndex::build(corpus);
  const std::vector<Query> queries = load_queries(a.queries);
  const QueryMap qmap = index_queries(queries);
  const Qrels qrels = load_qrels(a.qrels);
  const RunFile first_stage = a.run.empty() ? bm25_run(index, queries, a.depth) : load_run(a.run);

  const std::vector<SyntheticTriple> synth_triples = load_triples(a.triples);
  const std::vector<PairExample> synth = prepare_examples(synth_triples, index);
  const std::vector<TrainingTriple> target_triples =
      build_triples(qrels, first_stage.candidates(a.depth), a.per_pos, mix_seed(g.seed, 3));
  const std::vector<PairExample> target = prepare_examples(target_triples, qmap, index);

  a.train.seed = g.seed;
  a.train.optimizer.kind = parse_optimizer(a.optimizer);
  const RankerParams init =
      RankerParams::random(parse_arch(a.arch), a.hidden, mix_seed(g.seed, 200), a.init_scale);
  const TrainMode mode = a.uniform ? TrainMode::Uniform : TrainMode::Meta;
  const TrainResult result = train(a.train, init, synth, target, mode);

  const fs::path dir = prepare_out(g);
  write_json(dir / "checkpoint.json", checkpoint_to_json(result.state, a.train.optimizer));
  write_weight_log(dir / "weights.csv", result.state.weight_log);
  std::cout << fmt::format("{} training: {} steps on {} synthetic and {} target pairs; checkpoint in {}\n",
                           a.uniform ? "uniform" : "meta", result.state.step, synth.size(),
                           target.size(), (dir / "checkpoint.json").string());
}

// ---------------------------------------------------------------- rerank

struct RerankArgs {
  std::string checkpoint;
  std::string corpus;
  std::string queries;
  std::string run;
  std::size_t depth = 100;
  std::string tag = "rerank";
};

void run_rerank(const Global& g, const RerankArgs& a) {
  std::ifstream in(a.checkpoint);
  if (!in) throw Error("cannot read " + a.checkpoint);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(a.checkpoint + ": " + e.what());
  }
  const RankerParams params = checkpoint_from_json(j).params;
  const Corpus corpus = load_corpus(a.corpus);
  const InvertedIndex index = InvertedIndex::build(corpus);
  const QueryMap qmap = index_queries(load_queries(a.queries));
  const RunFile run = rerank(params, index, qmap, load_run(a.run), a.depth, a.tag);
  const fs::path path = prepare_out(g) / "rerank.run";
  write_run(path, run);
  std::cout << fmt::format("reranked {} queries; run written to {}\n", run.queries.size(), path.string());
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string qrels;
  std::vector<std::string> runs;
  std::vector<std::string> metrics{"ndcg@20", "err@20", "p@20"};
  bool compare = false;
  std::size_t n_perm = 100000;
  bool rrf = false;
  double rrf_k = 1.0;
};

void run_eval(const Global& g, const EvalArgs& a) {
  const Qrels qrels = load_qrels(a.qrels);
  std::vector<MetricSpec> specs;
  for (const auto& m : a.metrics) specs.push_back(MetricSpec::parse(m));

  std::vector<std::pair<std::string, RunFile>> runs;
  for (const auto& path : a.runs) runs.emplace_back(path, load_run(path));
  const fs::path dir = prepare_out(g);
  if (a.rrf) {
    std::vector<RunFile> inputs;
    for (const auto& [_, run] : runs) inputs.push_back(run);
    RunFile fused = rrf(inputs, a.rrf_k);
    write_run(dir / "fused.run", fused);
    runs.clear();
    runs.emplace_back((dir / "fused.run").string(), std::move(fused));
  }
  if (a.compare && runs.size() != 2) throw Error("--compare needs exactly two runs");

  nlohmann::json j;
  std::string text;
  for (const auto& [name, run] : runs) {
    const MetricReport report = evaluate(run, qrels, specs);
    j["runs"][name] = report.to_json();
    text += fmt::format("== {} ({})\n", name, run.tag) + report.to_table();
  }
  if (a.compare) {
    text += fmt::format("== paired randomization test, {} permutations\n", a.n_perm);
    for (const auto& spec : specs) {
      const MetricReport ra = evaluate(runs[0].second, qrels, {spec});
      const MetricReport rb = evaluate(runs[1].second, qrels, {spec});
      const double p = permutation_test(runs[0].second, runs[1].second, qrels, spec, a.n_perm,
                                        mix_seed(g.seed, 51));
      const double diff = ra.mean.at(spec.name()) - rb.mean.at(spec.name());
      j["compare"][spec.name()] = {{"difference", diff}, {"p_value", p}};
      text += fmt::format("{:<10} diff {:+.4f}  p {:.4f}\n", spec.name(), diff, p);
    }
  }
  write_json(dir / "eval.json", j);
  write_text(dir / "eval.txt", text);
  std::cout << text;
}

// ---------------------------------------------------------------- noise-bench

struct NoiseBenchArgs {
  std::size_t seeds = 5;
  double noise = 0.3;
  std::size_t steps = 500;
  double lr = 7e-4;
  std::size_t folds = 5;
};

void run_noise_bench_cmd(const Global& g, const NoiseBenchArgs& a) {
  NoiseBenchConfig config = default_noise_bench_config(g.seed);
  config.n_seeds = a.seeds;
  config.noise_rate = a.noise;
  config.cv.train.steps = a.steps;
  config.cv.train.optimizer.lr = a.lr;
  config.cv.folds = a.folds;
  const NoiseBenchResult result = run_noise_bench(config);
  const fs::path dir = prepare_out(g);
  const std::string text = result.to_text();
  write_json(dir / "noise_bench.json", result.to_json());
  write_text(dir / "noise_bench.txt", text);
  std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptrank: synthetic supervision and meta-reweighted reranking"};
  app.set_config("--config", "", "TOML file; [section] names match subcommands, flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "seed for every random component")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic topical collection");
  generate->add_option("--topics", gen.spec.n_topics)->capture_default_str();
  generate->add_option("--docs-per-topic", gen.spec.docs_per_topic)->capture_default_str();
  generate->add_option("--queries", gen.spec.n_queries)->capture_default_str();
  generate->add_option("--vocab", gen.spec.vocab_size)->capture_default_str();
  generate->add_option("--doc-len", gen.spec.doc_len)->capture_default_str();
  generate->add_option("--query-len", gen.spec.query_len)->capture_default_str();

  IndexArgs idx;
  auto* index = app.add_subcommand("index", "build the index and report collection statistics");
  index->add_option("--corpus", idx.corpus)->required()->check(CLI::ExistingFile);
  index->add_option("--k1", idx.k1)->capture_default_str();
  index->add_option("--b", idx.b)->capture_default_str();
  index->add_option("--top", idx.top, "terms listed by document frequency")->capture_default_str();

  SearchArgs srch;
  auto* search = app.add_subcommand("search", "BM25 first-stage run");
  search->add_option("--corpus", srch.corpus)->required()->check(CLI::ExistingFile);
  search->add_option("--queries", srch.queries)->required()->check(CLI::ExistingFile);
  search->add_option("--depth", srch.depth)->capture_default_str();
  search->add_option("--k1", srch.k1)->capture_default_str();
  search->add_option("--b", srch.b)->capture_default_str();
  search->add_option("--tag", srch.tag)->capture_default_str();
  search->add_option("--save-run", srch.save_run, "run path (default <out>/bm25.run)");

  SynthesizeArgs syn;
  auto* synth = app.add_subcommand("synthesize", "generate contrastive synthetic triples");
  synth->add_option("--corpus", syn.corpus)->required()->check(CLI::ExistingFile);
  synth->add_option("-K,--query-len", syn.gen.query_len)->capture_default_str();
  synth->add_option("--lambda", syn.gen.contrast_penalty)->capture_default_str();
  synth->add_option("-R,--retrieval-depth", syn.gen.retrieval_depth)->capture_default_str();
  synth->add_option("-P,--pairs-per-seed", syn.gen.pairs_per_seed)->capture_default_str();
  synth->add_option("--noise", syn.noise, "share of triples to flip")->capture_default_str();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "meta-reweighted (or uniform) ranker training");
  train_cmd->add_option("--triples", tr.triples)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--corpus", tr.corpus)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--queries", tr.queries)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--qrels", tr.qrels, "target judgments")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--run", tr.run, "first-stage run for target negatives (default BM25)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--depth", tr.depth)->capture_default_str();
  train_cmd->add_option("--per-pos", tr.per_pos)->capture_default_str();
  train_cmd->add_flag("--uniform", tr.uniform, "uniform weights 1/n (ablation)");
  train_cmd->add_option("--arch", tr.arch)->capture_default_str();
  train_cmd->add_option("--hidden", tr.hidden)->capture_default_str();
  train_cmd->add_option("--init-scale", tr.init_scale)->capture_default_str();
  train_cmd->add_option("--optimizer", tr.optimizer)->capture_default_str();
  train_cmd->add_option("--lr", tr.train.optimizer.lr)->capture_default_str();
  train_cmd->add_option("--alpha", tr.train.alpha)->capture_default_str();
  train_cmd->add_option("--eta", tr.train.eta)->capture_default_str();
  train_cmd->add_option("--synth-batch", tr.train.synth_batch)->capture_default_str();
  train_cmd->add_option("--target-batch", tr.train.target_batch)->capture_default_str();
  train_cmd->add_option("--steps", tr.train.steps)->capture_default_str();

  RerankArgs rr;
  auto* rerank_cmd = app.add_subcommand("rerank", "rescore a first-stage run with a checkpoint");
  rerank_cmd->add_option("--checkpoint", rr.checkpoint)->required()->check(CLI::ExistingFile);
  rerank_cmd->add_option("--corpus", rr.corpus)->required()->check(CLI::ExistingFile);
  rerank_cmd->add_option("--queries", rr.queries)->required()->check(CLI::ExistingFile);
  rerank_cmd->add_option("--run", rr.run)->required()->check(CLI::ExistingFile);
  rerank_cmd->add_option("--depth", rr.depth)->capture_default_str();
  rerank_cmd->add_option("--tag", rr.tag)->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "metric report for one or more runs");
  eval->add_option("--qrels", ev.qrels)->required()->check(CLI::ExistingFile);
  eval->add_option("runs", ev.runs, "run files")->required()->check(CLI::ExistingFile);
  eval->add_option("--metrics", ev.metrics)->delimiter(',')->capture_default_str();
  eval->add_flag("--compare", ev.compare, "paired randomization test between two runs");
  eval->add_option("--n-perm", ev.n_perm)->capture_default_str();
  eval->add_flag("--rrf", ev.rrf, "fuse the runs with reciprocal rank fusion first");
  eval->add_option("--rrf-k", ev.rrf_k)->capture_default_str();

  NoiseBenchArgs nb;
  auto* bench = app.add_subcommand("noise-bench", "controlled label-noise experiment, meta vs uniform");
  bench->add_option("--seeds", nb.seeds)->capture_default_str();
  bench->add_option("--noise", nb.noise)->capture_default_str();
  bench->add_option("--steps", nb.steps)->capture_default_str();
  bench->add_option("--lr", nb.lr)->capture_default_str();
  bench->add_option("--folds", nb.folds)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "adaptrank: " << msg << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*generate) run_generate(g, gen);
    else if (*index) run_index(g, idx);
    else if (*search) run_search(g, srch);
    else if (*synth) run_synthesize(g, syn);
    else if (*train_cmd) run_train(g, tr);
    else if (*rerank_cmd) run_rerank(g, rr);
    else if (*eval) run_eval(g, ev);
    else if (*bench) run_noise_bench_cmd(g, nb);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "adaptrank: error: " << msg << "\n";
    return 1;
  }
  return 0;
}
