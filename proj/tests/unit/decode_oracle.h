#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "whymine/models.h"

namespace testing {

struct BestSequence {
  std::vector<int> tokens;
  double score = -INFINITY;
};

// Exhaustive search over every complete sequence: one that ends with EOS,
// or reaches max_len without one. Ties go to the smaller id sequence.
inline void brute_force(const whymine::nn::StepModel& m, const whymine::nn::DecoderState& st,
                        std::vector<int>& prefix, double score, std::size_t max_len, int eos, BestSequence& best) {
  for (std::size_t k = 0; k < st.log_probs.size(); ++k) {
    prefix.push_back(static_cast<int>(k));
    const double s = score + st.log_probs[k];
    if (static_cast<int>(k) == eos || prefix.size() == max_len) {
      if (s > best.score || (s == best.score && prefix < best.tokens)) best = {prefix, s};
    } else {
      brute_force(m, m.advance(st, static_cast<int>(k)), prefix, s, max_len, eos, best);
    }
    prefix.pop_back();
  }
}

inline BestSequence brute_force(const whymine::nn::StepModel& m, std::span<const int> source, std::size_t max_len,
                                int eos) {
  BestSequence best;
  std::vector<int> prefix;
  brute_force(m, m.start(source), prefix, 0.0, max_len, eos, best);
  return best;
}

}  // namespace testing
