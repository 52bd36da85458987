#include "whymine/vocab.h"

#include <algorithm>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "whymine/conllu.h"
#include "whymine/error.h"

namespace whymine {

namespace {

std::vector<std::string> reserved_tokens() {
  return {std::string(kPadToken), std::string(kUnkToken), std::string(kBosToken), std::string(kEosToken),
          std::string(kSepToken)};
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(reserved_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token, std::size_t min_freq, std::size_t max_size)
    : tokens_(std::move(id_to_token)), min_freq_(min_freq), max_size_(max_size) {
  const auto reserved = reserved_tokens();
  if (tokens_.size() < reserved.size() || !std::equal(reserved.begin(), reserved.end(), tokens_.begin()))
    throw Error("bad_vocab", "vocabulary must start with the five reserved tokens");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw Error("bad_vocab", "duplicate vocabulary token '" + tokens_[i] + "'");
  }
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_freq,
                             std::size_t max_size) {
  if (min_freq < 1) throw Error("usage", "min_freq must be >= 1", ExitCode::usage);
  std::map<std::string, std::size_t> counts;
  for (const auto& sentence : corpus)
    for (const auto& tok : sentence) ++counts[to_lower(tok)];
  for (const auto& r : reserved_tokens()) counts.erase(r);

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (n >= min_freq) ranked.emplace_back(tok, n);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (max_size > 0 && ranked.size() > max_size) ranked.resize(max_size);

  auto tokens = reserved_tokens();
  for (auto& [tok, n] : ranked) tokens.push_back(tok);
  return Vocabulary(std::move(tokens), min_freq, max_size);
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it != index_.end() && it->second < kNumReserved) return it->second;
  it = index_.find(to_lower(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::string Vocabulary::digest() const {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (const auto& t : tokens_) {
    EVP_DigestUpdate(ctx, t.data(), t.size());
    EVP_DigestUpdate(ctx, "\n", 1);
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["min_freq"] = min_freq_;
  j["max_size"] = max_size_;
  j["tokens"] = tokens_;
  return j.dump(1);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), j.value("min_freq", std::size_t{1}),
                      j.value("max_size", std::size_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_vocab", std::string("malformed vocabulary: ") + e.what());
  }
}

}  // namespace whymine
