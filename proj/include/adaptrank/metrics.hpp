#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "adaptrank/corpus.hpp"
#include "adaptrank/run_file.hpp"

namespace adaptrank {

enum class Metric { Ndcg, Err, Precision };

struct MetricSpec {
  Metric metric = Metric::Ndcg;
  std::size_t k = 20;

  /// "ndcg@20", "err@20", "p@20".
  static MetricSpec parse(const std::string& name);
  std::string name() const;
};

// Single-list forms; `grades` are the grades of the ranked docs in rank order.

/// DCG with gain 2^g - 1 and discount log2(i + 1). `judged` holds every
/// judged grade of the query (the ideal ordering is built from it). Zero
/// when nothing is relevant.
double ndcg(std::span<const int> grades, std::span<const int> judged, std::size_t k);
/// Cascade model with R = (2^g - 1) / 2^g_max.
double err(std::span<const int> grades, std::size_t k, int g_max);
/// Relevant share of the top k; short lists count as padded with non-relevant.
double precision(std::span<const int> grades, std::size_t k);

using PerQuery = std::map<std::string, double, std::less<>>;

PerQuery ndcg_at_k(const RunFile& run, const Qrels& qrels, std::size_t k);
/// Throws Error if g_max < 1.
PerQuery err_at_k(const RunFile& run, const Qrels& qrels, std::size_t k, int g_max);
PerQuery precision_at_k(const RunFile& run, const Qrels& qrels, std::size_t k);
PerQuery evaluate_metric(const RunFile& run, const Qrels& qrels, const MetricSpec& spec);

struct MetricReport {
  std::vector<std::string> metrics;
  std::map<std::string, PerQuery> per_query;  // metric name -> query -> value
  std::map<std::string, double> mean;

  nlohmann::json to_json() const;
  /// One row per query plus an "all" row.
  std::string to_table() const;
};

/// Evaluates every query of `run`.
MetricReport evaluate(const RunFile& run, const Qrels& qrels, const std::vector<MetricSpec>& specs);

/// Paired sign-flip randomization test on per-query metric differences over
/// the queries both runs share. p = (hits + 1) / (n_perm + 1). Throws Error
/// when the runs share no query.
double permutation_test(const RunFile& a, const RunFile& b, const Qrels& qrels,
                        const MetricSpec& spec, std::size_t n_perm, std::uint64_t seed);
double permutation_test(std::span<const double> a, std::span<const double> b,
                        std::size_t n_perm, std::uint64_t seed);

}  // namespace adaptrank
