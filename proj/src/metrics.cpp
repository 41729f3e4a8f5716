#include "adaptrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "adaptrank/error.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {

MetricSpec MetricSpec::parse(const std::string& name) {
  const auto at = name.find('@');
  if (at == std::string::npos) throw Error("metric '" + name + "' lacks an @k cutoff");
  std::string kind = name.substr(0, at);
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
  MetricSpec spec;
  if (kind == "ndcg") {
    spec.metric = Metric::Ndcg;
  } else if (kind == "err") {
    spec.metric = Metric::Err;
  } else if (kind == "p" || kind == "precision") {
    spec.metric = Metric::Precision;
  } else {
    throw Error("unknown metric '" + kind + "'");
  }
  try {
    std::size_t used = 0;
    const long k = std::stol(name.substr(at + 1), &used);
    if (k < 1 || used != name.size() - at - 1) throw Error("");
    spec.k = static_cast<std::size_t>(k);
  } catch (const std::exception&) {
    throw Error("metric '" + name + "' needs a positive integer cutoff");
  }
  return spec;
}

std::string MetricSpec::name() const {
  switch (metric) {
    case Metric::Ndcg: return fmt::format("ndcg@{}", k);
    case Metric::Err: return fmt::format("err@{}", k);
    case Metric::Precision: return fmt::format("p@{}", k);
  }
  return {};
}

namespace {

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

double dcg(std::span<const int> grades, std::size_t k) {
  double sum = 0.0;
  for (std::size_t i = 0; i < grades.size() && i < k; ++i) {
    sum += gain(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  return sum;
}

void require_cutoff(std::size_t k) {
  if (k < 1) throw Error("metric cutoff must be at least 1");
}

}  // namespace

double ndcg(std::span<const int> grades, std::span<const int> judged, std::size_t k) {
  require_cutoff(k);
  std::vector<int> ideal(judged.begin(), judged.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal, k);
  if (idcg == 0.0) return 0.0;
  return dcg(grades, k) / idcg;
}

double err(std::span<const int> grades, std::size_t k, int g_max) {
  require_cutoff(k);
  if (g_max < 1) throw Error("ERR needs g_max >= 1");
  const double denom = std::exp2(static_cast<double>(g_max));
  double remaining = 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < grades.size() && i < k; ++i) {
    const double r = gain(grades[i]) / denom;
    sum += remaining * r / static_cast<double>(i + 1);
    remaining *= 1.0 - r;
  }
  return sum;
}

double precision(std::span<const int> grades, std::size_t k) {
  require_cutoff(k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < grades.size() && i < k; ++i) hits += grades[i] > 0 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

namespace {

template <class Fn>
PerQuery per_query(const RunFile& run, const Qrels& qrels, Fn&& fn) {
  PerQuery out;
  for (const auto& [q, entries] : run.queries) {
    std::vector<int> grades;
    grades.reserve(entries.size());
    for (const auto& e : entries) grades.push_back(qrels.grade(q, e.doc_id));
    std::vector<int> judged;
    if (const auto* j = qrels.judged(q)) {
      for (const auto& [d, g] : *j) judged.push_back(g);
    }
    out.emplace(q, fn(grades, judged));
  }
  return out;
}

}  // namespace

PerQuery ndcg_at_k(const RunFile& run, const Qrels& qrels, std::size_t k) {
  return per_query(run, qrels, [k](const auto& g, const auto& j) { return ndcg(g, j, k); });
}

PerQuery err_at_k(const RunFile& run, const Qrels& qrels, std::size_t k, int g_max) {
  if (g_max < 1) throw Error("ERR needs g_max >= 1");
  return per_query(run, qrels, [k, g_max](const auto& g, const auto&) { return err(g, k, g_max); });
}

PerQuery precision_at_k(const RunFile& run, const Qrels& qrels, std::size_t k) {
  return per_query(run, qrels, [k](const auto& g, const auto&) { return precision(g, k); });
}

PerQuery evaluate_metric(const RunFile& run, const Qrels& qrels, const MetricSpec& spec) {
  switch (spec.metric) {
    case Metric::Ndcg: return ndcg_at_k(run, qrels, spec.k);
    case Metric::Err: return err_at_k(run, qrels, spec.k, std::max(1, qrels.g_max()));
    case Metric::Precision: return precision_at_k(run, qrels, spec.k);
  }
  return {};
}

MetricReport evaluate(const RunFile& run, const Qrels& qrels, const std::vector<MetricSpec>& specs) {
  MetricReport report;
  for (const auto& spec : specs) {
    const std::string name = spec.name();
    PerQuery values = evaluate_metric(run, qrels, spec);
    double sum = 0.0;
    for (const auto& [q, v] : values) sum += v;
    report.metrics.push_back(name);
    report.mean[name] = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    report.per_query[name] = std::move(values);
  }
  return report;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["metrics"] = metrics;
  j["mean"] = mean;
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [name, values] : per_query) {
    nlohmann::json v = nlohmann::json::object();
    for (const auto& [q, x] : values) v[q] = x;
    per[name] = std::move(v);
  }
  j["per_query"] = std::move(per);
  return j;
}

std::string MetricReport::to_table() const {
  std::string out = fmt::format("{:<16}", "query");
  for (const auto& m : metrics) out += fmt::format(" {:>10}", m);
  out += '\n';
  std::vector<std::string> queries;
  if (!metrics.empty()) {
    for (const auto& [q, v] : per_query.at(metrics.front())) queries.push_back(q);
  }
  for (const auto& q : queries) {
    out += fmt::format("{:<16}", q);
    for (const auto& m : metrics) out += fmt::format(" {:>10.4f}", per_query.at(m).find(q)->second);
    out += '\n';
  }
  out += fmt::format("{:<16}", "all");
  for (const auto& m : metrics) out += fmt::format(" {:>10.4f}", mean.at(m));
  out += '\n';
  return out;
}

double permutation_test(std::span<const double> a, std::span<const double> b, std::size_t n_perm,
                        std::uint64_t seed) {
  if (a.size() != b.size()) throw Error("permutation test needs paired values");
  if (a.empty()) throw Error("permutation test needs at least one query");
  if (n_perm < 1) throw Error("permutation count must be at least 1");
  std::vector<double> diff(a.size());
  double observed = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
    observed += diff[i];
  }
  // Sums are compared instead of means; the tolerance absorbs reassociation
  // noise between mathematically equal sums.
  const double threshold = std::abs(observed) - 1e-12;
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t p = 0; p < n_perm; ++p) {
    double s = 0.0;
    for (double d : diff) s += rng.coin() ? -d : d;
    if (std::abs(s) >= threshold) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(n_perm + 1);
}

double permutation_test(const RunFile& a, const RunFile& b, const Qrels& qrels,
                        const MetricSpec& spec, std::size_t n_perm, std::uint64_t seed) {
  const PerQuery va = evaluate_metric(a, qrels, spec);
  const PerQuery vb = evaluate_metric(b, qrels, spec);
  std::vector<double> xa;
  std::vector<double> xb;
  for (const auto& [q, v] : va) {
    if (auto it = vb.find(q); it != vb.end()) {
      xa.push_back(v);
      xb.push_back(it->second);
    }
  }
  if (xa.empty()) throw Error("runs share no query");
  return permutation_test(xa, xb, n_perm, seed);
}

}  // namespace adaptrank
