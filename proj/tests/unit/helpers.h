#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "whymine/conllu.h"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(WHYMINE_TEST_DATA) + "/" + name; }

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("whymine_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Builds a CoNLL-U row; lemma defaults to the lowercased form.
inline std::string row(int id, const std::string& form, const std::string& upos, int head, const std::string& rel,
                       const std::string& lemma = "") {
  return std::to_string(id) + "\t" + form + "\t" + (lemma.empty() ? whymine::to_lower(form) : lemma) + "\t" + upos +
         "\t_\t_\t" + std::to_string(head) + "\t" + rel + "\t_\t_\n";
}

inline whymine::DepSentence parse_one(const std::string& conllu) {
  auto r = whymine::parse_conllu_string(conllu);
  return r.documents.at(0).sentences.at(0);
}

}  // namespace testing
