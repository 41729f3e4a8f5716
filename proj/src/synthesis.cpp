#include "adaptrank/synthesis.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "json.hpp"

#include "adaptrank/error.hpp"
#include "adaptrank/parallel.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {
namespace {

struct TermStat {
  std::string term;
  std::uint32_t tf = 0;
};

// Distinct terms in first-occurrence order with their counts.
std::vector<TermStat> term_stats(const Tokens& tokens) {
  std::vector<TermStat> stats;
  std::unordered_map<std::string_view, std::size_t> slot;
  for (const auto& t : tokens) {
    auto [it, inserted] = slot.try_emplace(t, stats.size());
    if (inserted) stats.push_back({t, 0});
    ++stats[it->second].tf;
  }
  return stats;
}

// Top k of `scores` (ties keep the lower position), reported in position order.
GeneratedQuery select_top(const std::vector<TermStat>& stats, const std::vector<double>& scores,
                          std::size_t k) {
  std::vector<std::size_t> order(stats.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  GeneratedQuery out;
  for (std::size_t i : order) {
    out.tokens.push_back(stats[i].term);
    out.term_scores.push_back(scores[i]);
  }
  return out;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (query_len < 1) throw Error("query length K must be at least 1");
  if (retrieval_depth < 2) throw Error("retrieval depth R must be at least 2");
  if (pairs_per_seed < 1) throw Error("pairs per seed P must be at least 1");
  if (!(contrast_penalty >= 0.0)) throw Error("contrast penalty must be non-negative");
}

GeneratedQuery generate_seed_query(const Document& doc, const InvertedIndex& index, std::size_t k) {
  if (doc.tokens.empty()) throw Error("cannot generate a query from empty document '" + doc.id + "'");
  const auto stats = term_stats(doc.tokens);
  std::vector<double> scores;
  scores.reserve(stats.size());
  for (const auto& s : stats) scores.push_back(s.tf * index.idf(s.term));
  return select_top(stats, scores, k);
}

GeneratedQuery generate_contrastive_query(const Document& pos, const Document& neg,
                                          const InvertedIndex& index, std::size_t k,
                                          double lambda) {
  if (pos.tokens.empty()) throw Error("cannot generate a query from empty document '" + pos.id + "'");
  if (pos.tokens == neg.tokens) return generate_seed_query(pos, index, k);
  const auto stats = term_stats(pos.tokens);
  std::unordered_map<std::string_view, std::uint32_t> neg_tf;
  for (const auto& t : neg.tokens) ++neg_tf[t];

  std::vector<double> scores;
  scores.reserve(stats.size());
  bool any_positive = false;
  for (const auto& s : stats) {
    const double idf = index.idf(s.term);
    auto it = neg_tf.find(s.term);
    const double tf_neg = it == neg_tf.end() ? 0.0 : it->second;
    const double c = s.tf * idf - lambda * tf_neg * idf;
    any_positive = any_positive || c > 0.0;
    scores.push_back(c);
  }
  if (!any_positive) return generate_seed_query(pos, index, k);
  return select_top(stats, scores, k);
}

std::vector<std::string> confusable_candidates(const InvertedIndex& index,
                                               const Tokens& seed_query, std::size_t depth,
                                               std::string_view exclude_doc) {
  std::vector<std::string> out;
  for (auto& e : search(index, seed_query, depth).entries) {
    if (e.doc_id != exclude_doc) out.push_back(std::move(e.doc_id));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<DocPair> sample_confusable_pairs(const InvertedIndex& index, const Tokens& seed_query,
                                             std::size_t depth, std::size_t n_pairs,
                                             std::string_view exclude_doc, std::uint64_t seed) {
  if (depth < 2) throw Error("retrieval depth must be at least 2");
  const auto candidates = confusable_candidates(index, seed_query, depth, exclude_doc);
  const std::size_t c = candidates.size();
  if (c < 2 || n_pairs == 0) return {};

  // All unordered pairs (i < j) in lexicographic order; pick a uniform subset
  // by partial Fisher-Yates.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(c * (c - 1) / 2);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = i + 1; j < c; ++j) pairs.emplace_back(i, j);
  }
  Rng rng(seed);
  const std::size_t take = std::min(n_pairs, pairs.size());

  const Tokens terms = distinct_terms(seed_query);
  auto coverage = [&](const std::string& doc_id) {
    const DocNo d = index.require_doc(doc_id);
    return std::count_if(terms.begin(), terms.end(),
                         [&](const std::string& t) { return index.tf(d, t) > 0; });
  };

  std::vector<DocPair> out;
  out.reserve(take);
  for (std::size_t s = 0; s < take; ++s) {
    std::swap(pairs[s], pairs[s + rng.uniform_index(pairs.size() - s)]);
    const auto& lo = candidates[pairs[s].first];  // lower doc id
    const auto& hi = candidates[pairs[s].second];
    if (coverage(hi) > coverage(lo)) {
      out.push_back({hi, lo});
    } else {
      out.push_back({lo, hi});
    }
  }
  return out;
}

std::vector<SyntheticTriple> synthesize(const Corpus& corpus, const InvertedIndex& index,
                                        const GeneratorConfig& config) {
  const ExtractiveGenerator generator(index, config.query_len, config.contrast_penalty);
  return synthesize(corpus, index, config, generator);
}

std::vector<SyntheticTriple> synthesize(const Corpus& corpus, const InvertedIndex& index,
                                        const GeneratorConfig& config,
                                        const QueryGenerator& generator) {
  config.validate();
  std::vector<std::vector<SyntheticTriple>> per_doc(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t d) {
    const Document& doc = corpus[d];
    if (doc.tokens.empty()) return;
    const GeneratedQuery seed_query = generator.seed_query(doc);
    if (seed_query.tokens.empty()) return;
    const auto pairs = sample_confusable_pairs(index, seed_query.tokens, config.retrieval_depth,
                                               config.pairs_per_seed, doc.id,
                                               mix_seed(config.seed, d));
    for (const auto& pair : pairs) {
      GeneratedQuery q = generator.contrastive_query(corpus.at(pair.pos), corpus.at(pair.neg));
      if (q.tokens.empty()) continue;
      SyntheticTriple t;
      t.query.text = join(q.tokens);
      t.query.tokens = std::move(q.tokens);
      t.pos_doc_id = pair.pos;
      t.neg_doc_id = pair.neg;
      t.seed_doc_id = doc.id;
      t.seed_query = seed_query.tokens;
      t.contrast_scores = std::move(q.term_scores);
      per_doc[d].push_back(std::move(t));
    }
  });

  std::vector<SyntheticTriple> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (auto& batch : per_doc) {
    for (auto& t : batch) {
      if (!seen.emplace(t.query.text, t.pos_doc_id, t.neg_doc_id).second) continue;
      t.query.id = "syn" + std::to_string(out.size());
      out.push_back(std::move(t));
    }
  }
  return out;
}

void write_triples(const std::filesystem::path& path, const std::vector<SyntheticTriple>& triples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : triples) {
    nlohmann::ordered_json obj;
    obj["query"] = t.query.text;
    obj["pos"] = t.pos_doc_id;
    obj["neg"] = t.neg_doc_id;
    obj["seed_doc"] = t.seed_doc_id;
    out << obj.dump() << '\n';
  }
}

std::vector<SyntheticTriple> load_triples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<SyntheticTriple> triples;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      SyntheticTriple t;
      t.query = make_query("syn" + std::to_string(triples.size()), obj.at("query").get<std::string>());
      t.pos_doc_id = obj.at("pos").get<std::string>();
      t.neg_doc_id = obj.at("neg").get<std::string>();
      t.seed_doc_id = obj.value("seed_doc", std::string{});
      if (t.pos_doc_id == t.neg_doc_id) throw ParseError(path.string(), lineno, "pos equals neg");
      triples.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return triples;
}

}  // namespace adaptrank
