#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "whymine/models.h"
#include "whymine/vocab.h"

namespace whymine::nn {

enum class DecodeMode { greedy, beam };

const char* to_string(DecodeMode mode);
DecodeMode parse_decode_mode(const std::string& s);

struct Candidate {
  std::vector<int> tokens;  // includes the final EOS when one was emitted
  double score = 0.0;       // total log-probability (length-normalized if requested)
};

struct DecodeResult {
  std::vector<Candidate> candidates;  // best first
  DecodeMode mode = DecodeMode::greedy;
  std::size_t beam_size = 1;
};

struct DecodeOptions {
  std::size_t max_len = 30;
  int eos_id = kEos;
};

// Argmax at every step, ties to the lowest id; stops at EOS or max_len.
DecodeResult greedy_decode(const StepModel& model, std::span<const int> source, const DecodeOptions& opts = {});

// Beam search over summed log-probabilities. Hypotheses ending in EOS retire
// to a pool; the result is the best `beam_size` of pool and live beams,
// ranked by score / length^alpha when `length_norm` = alpha is given, ties
// to the lexicographically smaller id sequence.
DecodeResult beam_decode(const StepModel& model, std::span<const int> source, std::size_t beam_size,
                         const DecodeOptions& opts = {}, std::optional<double> length_norm = std::nullopt);

}  // namespace whymine::nn
