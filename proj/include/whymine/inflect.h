#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

namespace whymine {

enum class Inflection { past, third_singular, base };

// English verb re-inflection: an irregular table consulted first, regular
// spelling rules otherwise. Immutable after construction.
class Conjugator {
 public:
  Conjugator();

  std::string inflect(std::string_view lemma, Inflection target) const;
  std::size_t irregular_count() const { return irregular_past_.size(); }

  static const Conjugator& instance();

 private:
  std::unordered_map<std::string, std::string> irregular_past_;
  std::unordered_map<std::string, std::string> irregular_third_;
};

inline std::string inflect(std::string_view lemma, Inflection target) {
  return Conjugator::instance().inflect(lemma, target);
}

}  // namespace whymine
