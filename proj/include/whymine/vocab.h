#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace whymine {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kBos = 2;
inline constexpr int kEos = 3;
inline constexpr int kSep = 4;
inline constexpr int kNumReserved = 5;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kSepToken = "<SEP>";

class Vocabulary {
 public:
  Vocabulary();  // reserved tokens only
  explicit Vocabulary(std::vector<std::string> id_to_token, std::size_t min_freq = 1, std::size_t max_size = 0);

  // Lowercases `corpus` tokens, drops those below `min_freq`, keeps at most
  // `max_size` regular tokens (0 = unlimited). Ids are assigned by
  // descending frequency, ties by lexicographic token order.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus, std::size_t min_freq,
                          std::size_t max_size = 0);

  std::size_t size() const { return tokens_.size(); }
  int id(std::string_view token) const;  // lowercases; UNK when absent
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t min_freq() const { return min_freq_; }
  std::size_t max_size() const { return max_size_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  // Hex SHA-256 over the id-ordered token list.
  std::string digest() const;

  std::string to_json() const;
  static Vocabulary from_json(const std::string& text);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::size_t min_freq_ = 1;
  std::size_t max_size_ = 0;
};

}  // namespace whymine
