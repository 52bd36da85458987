#pragma once

#include <random>

#include "whymine/dataset.h"

namespace testing {

// Synthetic copy task: source is a random string over the non-reserved ids,
// target is the same string followed by EOS.
inline std::vector<whymine::Example> copy_examples(std::size_t n, std::size_t vocab, std::size_t min_len,
                                                   std::size_t max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> sym(whymine::kSep + 1, static_cast<int>(vocab) - 1);
  std::vector<whymine::Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    whymine::Example ex;
    ex.pair_id = i;
    ex.source.resize(len(rng));
    for (auto& s : ex.source) s = sym(rng);
    ex.target = ex.source;
    ex.target.push_back(whymine::kEos);
    out.push_back(std::move(ex));
  }
  return out;
}

inline whymine::DatasetSplit copy_task(std::size_t n, std::size_t vocab, std::uint64_t seed, std::size_t min_len = 3,
                                       std::size_t max_len = 5) {
  return whymine::split(copy_examples(n, vocab, min_len, max_len, seed), seed);
}

}  // namespace testing
