#include "adaptrank/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "adaptrank/error.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string f; in >> f;) fields.push_back(std::move(f));
  return fields;
}

}  // namespace

Document make_document(std::string id, std::optional<std::string> title, std::string text) {
  Document doc{std::move(id), std::move(title), std::move(text), {}};
  doc.tokens = doc.title ? tokenize(*doc.title + " " + doc.text) : tokenize(doc.text);
  return doc;
}

Query make_query(std::string id, std::string text) {
  Query q{std::move(id), std::move(text), {}};
  q.tokens = tokenize(q.text);
  return q;
}

QueryMap index_queries(const std::vector<Query>& queries) {
  QueryMap out;
  for (const auto& q : queries) {
    if (!out.emplace(q.id, q).second) throw Error("duplicate query id '" + q.id + "'");
  }
  return out;
}

void Corpus::add(Document doc) {
  if (doc.id.empty()) throw Error("document with empty id");
  if (by_id_.contains(doc.id)) throw Error("duplicate document id '" + doc.id + "'");
  by_id_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
}

const Document* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::at(std::string_view id) const {
  if (const Document* d = find(id)) return *d;
  throw Error("unknown document id '" + std::string(id) + "'");
}

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  grade = std::max(grade, 0);
  int& slot = judgments_[query_id][doc_id];
  const bool lowered_max = slot == g_max_ && grade < slot;
  slot = grade;
  if (!lowered_max) {
    g_max_ = std::max(g_max_, grade);
    return;
  }
  g_max_ = 0;
  for (const auto& [q, docs] : judgments_) {
    for (const auto& [d, g] : docs) g_max_ = std::max(g_max_, g);
  }
}

int Qrels::grade(std::string_view query_id, std::string_view doc_id) const {
  auto q = judgments_.find(query_id);
  if (q == judgments_.end()) return 0;
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

std::size_t Qrels::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [q, docs] : judgments_) n += docs.size();
  return n;
}

const std::map<std::string, int, std::less<>>* Qrels::judged(std::string_view query_id) const {
  auto q = judgments_.find(query_id);
  return q == judgments_.end() ? nullptr : &q->second;
}

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> ids;
  for (const auto& [q, docs] : judgments_) ids.push_back(q);
  return ids;
}

Qrels Qrels::restricted_to(const std::vector<std::string>& query_ids) const {
  Qrels out;
  for (const auto& id : query_ids) {
    auto q = judgments_.find(id);
    if (q == judgments_.end()) continue;
    out.judgments_[id] = q->second;
    for (const auto& [d, g] : q->second) out.g_max_ = std::max(out.g_max_, g);
  }
  return out;
}

std::vector<std::string> FoldAssignment::members(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [q, f] : fold_of) {
    if (f == fold) out.push_back(q);
  }
  return out;
}

std::vector<std::string> FoldAssignment::complement(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [q, f] : fold_of) {
    if (f != fold) out.push_back(q);
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  Corpus corpus;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    strip_cr(line);
    if (blank(line)) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError(source, lineno, "malformed JSON");
    }
    if (!obj.is_object()) throw ParseError(source, lineno, "expected a JSON object");
    auto id = obj.find("id");
    auto text = obj.find("text");
    if (id == obj.end() || !id->is_string()) throw ParseError(source, lineno, "missing string \"id\"");
    if (text == obj.end() || !text->is_string()) {
      throw ParseError(source, lineno, "missing string \"text\"");
    }
    std::optional<std::string> title;
    if (auto t = obj.find("title"); t != obj.end() && !t->is_null()) {
      if (!t->is_string()) throw ParseError(source, lineno, "\"title\" must be a string");
      title = t->get<std::string>();
    }
    try {
      corpus.add(make_document(id->get<std::string>(), std::move(title), text->get<std::string>()));
    } catch (const Error& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return corpus;
}

Qrels load_qrels(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  Qrels qrels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    strip_cr(line);
    if (blank(line)) continue;
    const auto fields = split_ws(line);
    if (fields.size() != 4) {
      throw ParseError(source, lineno, "expected 4 columns, got " + std::to_string(fields.size()));
    }
    const std::string& g = fields[3];
    int grade = 0;
    auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), grade);
    if (ec != std::errc() || ptr != g.data() + g.size()) {
      throw ParseError(source, lineno, "grade '" + g + "' is not an integer");
    }
    qrels.set(fields[0], fields[2], grade);
  }
  return qrels;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::vector<Query> queries;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    strip_cr(line);
    if (blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(source, lineno, "expected qid<TAB>text");
    std::string id = line.substr(0, tab);
    if (!seen.insert(id).second) throw ParseError(source, lineno, "duplicate query id '" + id + "'");
    queries.push_back(make_query(std::move(id), line.substr(tab + 1)));
  }
  return queries;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  auto out = open_output(path);
  for (const auto& doc : corpus) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    if (doc.title) obj["title"] = *doc.title;
    obj["text"] = doc.text;
    out << obj.dump() << '\n';
  }
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  auto out = open_output(path);
  for (const auto& q : qrels.query_ids()) {
    for (const auto& [d, g] : *qrels.judged(q)) out << q << " 0 " << d << ' ' << g << '\n';
  }
}

void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries) {
  auto out = open_output(path);
  for (const auto& q : queries) out << q.id << '\t' << q.text << '\n';
}

FoldAssignment make_folds(const std::vector<std::string>& query_ids, std::size_t k,
                          std::uint64_t seed) {
  if (k < 2) throw Error("fold count must be at least 2");
  if (k > query_ids.size()) {
    throw Error("fold count " + std::to_string(k) + " exceeds " +
                std::to_string(query_ids.size()) + " queries");
  }
  std::vector<std::string> order = query_ids;
  Rng rng(seed);
  rng.shuffle(std::span(order));
  FoldAssignment folds;
  folds.k = k;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!folds.fold_of.emplace(order[i], i % k).second) {
      throw Error("duplicate query id '" + order[i] + "' in fold input");
    }
  }
  return folds;
}

std::vector<TrainingTriple> build_triples(const Qrels& qrels, const CandidateLists& candidates,
                                          std::size_t per_pos, std::uint64_t seed) {
  std::vector<TrainingTriple> triples;
  Rng rng(seed);
  for (const auto& [qid, docs] : candidates) {
    const auto* judged = qrels.judged(qid);
    if (!judged) continue;
    std::vector<std::string> negatives;
    std::set<std::string> seen;
    for (const auto& d : docs) {
      if (seen.insert(d).second && qrels.grade(qid, d) == 0) negatives.push_back(d);
    }
    if (negatives.empty()) continue;
    for (const auto& [pos, grade] : *judged) {
      if (grade <= 0) continue;
      const std::size_t take = std::min(per_pos, negatives.size());
      // partial Fisher-Yates: the first `take` slots become the sample
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(negatives[i], negatives[i + rng.uniform_index(negatives.size() - i)]);
        triples.push_back({qid, pos, negatives[i]});
      }
    }
  }
  return triples;
}

std::vector<bool> plan_noise(std::size_t n, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("noise rate must lie in [0, 1]");
  std::vector<bool> flags(n, false);
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  if (count == 0) return flags;
  std::vector<std::size_t> slots(n);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(slots));
  for (std::size_t i = 0; i < count; ++i) flags[slots[i]] = true;
  return flags;
}

void write_noise_flags(const std::filesystem::path& path, const std::vector<bool>& flags) {
  auto out = open_output(path);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    out << "{\"triple_index\":" << i << ",\"flipped\":" << (flags[i] ? "true" : "false") << "}\n";
  }
}

std::vector<bool> load_noise_flags(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::vector<bool> flags;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    strip_cr(line);
    if (blank(line)) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      const auto index = obj.at("triple_index").get<std::size_t>();
      if (index != flags.size()) throw ParseError(source, lineno, "triple_index out of sequence");
      flags.push_back(obj.at("flipped").get<bool>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return flags;
}

}  // namespace adaptrank
