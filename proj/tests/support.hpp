#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adaptrank/corpus.hpp"
#include "adaptrank/retrieval.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "adaptrank-test-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline adaptrank::Corpus make_corpus(const std::vector<std::pair<std::string, std::string>>& docs) {
  adaptrank::Corpus c;
  for (const auto& [id, text] : docs) c.add(adaptrank::make_document(id, std::nullopt, text));
  return c;
}

/// Textbook BM25 computed from raw token lists, sharing nothing with the
/// index code.
struct BruteBm25 {
  std::vector<std::string> ids;
  std::vector<adaptrank::Tokens> docs;
  double k1 = 0.9;
  double b = 0.4;

  explicit BruteBm25(const adaptrank::Corpus& corpus) {
    for (const auto& d : corpus) {
      ids.push_back(d.id);
      docs.push_back(d.tokens);
    }
  }

  double avg_len() const {
    double total = 0.0;
    for (const auto& d : docs) total += static_cast<double>(d.size());
    return total / static_cast<double>(docs.size());
  }

  double score(const adaptrank::Tokens& query, std::size_t doc) const {
    std::set<std::string> terms(query.begin(), query.end());
    const double n = static_cast<double>(docs.size());
    double s = 0.0;
    for (const auto& t : terms) {
      double df = 0.0;
      for (const auto& d : docs) {
        for (const auto& w : d) {
          if (w == t) {
            df += 1.0;
            break;
          }
        }
      }
      double tf = 0.0;
      for (const auto& w : docs[doc]) tf += (w == t) ? 1.0 : 0.0;
      if (tf == 0.0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double len = static_cast<double>(docs[doc].size());
      s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg_len()));
    }
    return s;
  }
};

}  // namespace testing_support
