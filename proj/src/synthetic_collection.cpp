#include "adaptrank/synthetic_collection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "adaptrank/error.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {
namespace {

// Zipf-weighted sampler over the ranks of one pool.
class ZipfPool {
 public:
  ZipfPool(std::size_t size, double exponent) : cumulative_(size) {
    double total = 0.0;
    for (std::size_t r = 0; r < size; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
      cumulative_[r] = total;
    }
    for (double& c : cumulative_) c /= total;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform01();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

std::string topic_term(std::size_t topic, std::size_t rank) {
  return fmt::format("t{}w{}", topic, rank);
}

std::string background_term(std::size_t rank) { return fmt::format("bg{}", rank); }

std::size_t count_of(double share, std::size_t len) {
  return static_cast<std::size_t>(std::llround(share * static_cast<double>(len)));
}

void validate(const SyntheticSpec& spec) {
  if (spec.n_topics == 0 || spec.docs_per_topic == 0 || spec.n_queries == 0 ||
      spec.vocab_size == 0 || spec.doc_len == 0 || spec.query_len == 0) {
    throw Error("synthetic collection counts must be positive");
  }
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate <= 1.0)) {
    throw Error("noise rate must lie in [0, 1]");
  }
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(spec.background_fraction) || !unit(spec.core_rate) || !unit(spec.leak_rate) ||
      !unit(spec.digest_rate) || !unit(spec.digest_leak)) {
    throw Error("synthetic collection shares must lie in [0, 1]");
  }
  if (!(spec.topic_purity >= 0.5 && spec.topic_purity <= 1.0) ||
      !(spec.core_purity >= 0.5 && spec.core_purity <= 1.0)) {
    throw Error("topic purity must lie in [0.5, 1]");
  }
  if (spec.topic_purity + spec.leak_rate > 1.0 || spec.core_purity + spec.leak_rate > 1.0) {
    throw Error("topic purity plus leak rate exceeds 1");
  }
  if (spec.digest_rate > 0.0 && spec.topic_purity + spec.digest_leak > 1.0) {
    throw Error("topic purity plus digest leak exceeds 1");
  }
  if (!(spec.digest_length >= 1.0)) throw Error("digest length multiplier must be at least 1");
  if (spec.query_depth > 0 && spec.query_depth < spec.query_len) {
    throw Error("query depth must cover the query length");
  }
}

}  // namespace

std::size_t term_pool(std::string_view term, std::size_t n_topics) {
  if (term.starts_with("t")) {
    const auto w = term.find('w');
    if (w != std::string_view::npos && w > 1) {
      std::size_t topic = 0;
      for (char c : term.substr(1, w - 1)) topic = topic * 10 + static_cast<std::size_t>(c - '0');
      return topic;
    }
  }
  return n_topics;
}

SyntheticCollection generate_synthetic_collection(const SyntheticSpec& spec) {
  validate(spec);
  SyntheticCollection out;
  out.noise_rate = spec.noise_rate;
  out.background_size = std::max<std::size_t>(
      1, count_of(spec.background_fraction, spec.vocab_size));
  if (out.background_size >= spec.vocab_size) {
    throw Error("vocabulary too small for a background pool and topic pools");
  }
  out.topic_pool_size = (spec.vocab_size - out.background_size) / spec.n_topics;
  if (out.topic_pool_size < std::max<std::size_t>({2, spec.query_len, spec.query_depth})) {
    throw Error(fmt::format("vocabulary of {} cannot hold {} disjoint topic pools of at least {} terms",
                            spec.vocab_size, spec.n_topics,
                            std::max<std::size_t>({2, spec.query_len, spec.query_depth})));
  }

  const ZipfPool topic_pool(out.topic_pool_size, spec.zipf_exponent);
  const ZipfPool background_pool(out.background_size, spec.zipf_exponent);
  Rng rng(mix_seed(spec.seed, 1));

  struct Draft {
    std::size_t topic;
    bool core;
    std::string text;
  };
  std::vector<Draft> drafts;
  const std::size_t n_docs = spec.n_topics * spec.docs_per_topic;
  drafts.reserve(n_docs);
  for (std::size_t topic = 0; topic < spec.n_topics; ++topic) {
    for (std::size_t i = 0; i < spec.docs_per_topic; ++i) {
      const bool core = rng.uniform01() < spec.core_rate;
      const bool digest = !core && spec.n_topics > 1 && rng.uniform01() < spec.digest_rate;
      std::size_t len = std::max<std::size_t>(1, spec.doc_len / 2 + rng.uniform_index(spec.doc_len + 1));
      if (digest) len = static_cast<std::size_t>(std::llround(spec.digest_length * static_cast<double>(len)));
      const std::size_t n_topic = count_of(core ? spec.core_purity : spec.topic_purity, len);
      std::size_t n_leak = spec.n_topics > 1 ? count_of(digest ? spec.digest_leak : spec.leak_rate, len) : 0;
      n_leak = std::min(n_leak, len - n_topic);
      std::size_t other = topic;
      if (n_leak > 0) {
        other = rng.uniform_index(spec.n_topics - 1);
        if (other >= topic) ++other;
      }
      Tokens tokens;
      tokens.reserve(len);
      for (std::size_t j = 0; j < n_topic; ++j) tokens.push_back(topic_term(topic, topic_pool.draw(rng)));
      for (std::size_t j = 0; j < n_leak; ++j) tokens.push_back(topic_term(other, topic_pool.draw(rng)));
      while (tokens.size() < len) tokens.push_back(background_term(background_pool.draw(rng)));
      rng.shuffle(std::span(tokens));
      drafts.push_back({topic, core, join(tokens)});
    }
  }

  // Ids are handed out in a shuffled order so id order says nothing about topic.
  std::vector<std::size_t> order(n_docs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  std::vector<std::string> ids(n_docs);
  for (std::size_t slot = 0; slot < n_docs; ++slot) ids[order[slot]] = fmt::format("D{:05}", slot);
  for (std::size_t slot = 0; slot < n_docs; ++slot) {
    const std::size_t d = order[slot];
    out.corpus.add(make_document(ids[d], std::nullopt, drafts[d].text));
    out.doc_topic.push_back(drafts[d].topic);
  }

  for (std::size_t qi = 0; qi < spec.n_queries; ++qi) {
    const std::size_t topic = qi % spec.n_topics;
    std::vector<std::size_t> ranks;
    while (ranks.size() < spec.query_len) {
      const std::size_t r = spec.query_depth > 0 ? rng.uniform_index(spec.query_depth) : topic_pool.draw(rng);
      if (std::find(ranks.begin(), ranks.end(), r) == ranks.end()) ranks.push_back(r);
    }
    Tokens terms;
    for (std::size_t r : ranks) terms.push_back(topic_term(topic, r));
    out.queries.push_back(make_query(fmt::format("Q{:03}", qi + 1), join(terms)));
    out.query_topic.push_back(topic);
  }

  for (std::size_t qi = 0; qi < out.queries.size(); ++qi) {
    for (std::size_t slot = 0; slot < n_docs; ++slot) {
      const std::size_t d = order[slot];
      const int grade = drafts[d].topic != out.query_topic[qi] ? 0 : (drafts[d].core ? 2 : 1);
      out.qrels.set(out.queries[qi].id, ids[d], grade);
    }
  }
  return out;
}

void write_collection(const std::filesystem::path& dir, const SyntheticCollection& collection) {
  std::filesystem::create_directories(dir);
  write_corpus(dir / "corpus.jsonl", collection.corpus);
  write_queries(dir / "queries.tsv", collection.queries);
  write_qrels(dir / "qrels.txt", collection.qrels);
}

}  // namespace adaptrank
