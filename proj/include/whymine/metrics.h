#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "whymine/vocab.h"

namespace whymine::metrics {

using Tokens = std::vector<std::string>;

// Hypothesis and single reference; lowercased on construction.
struct EvalPair {
  Tokens hypothesis;
  Tokens reference;

  EvalPair() = default;
  EvalPair(Tokens hyp, Tokens ref);
};

// Whitespace split of pre-tokenized text, lowercased.
Tokens tokenize(const std::string& text);

struct BleuResult {
  double score = 0.0;
  std::vector<double> precisions;
  double brevity_penalty = 0.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  bool warning = false;  // no hypothesis tokens to score
};

// Corpus BLEU: clipped n-gram counts summed over all pairs before dividing.
// Unsmoothed, a zero precision gives 0; with smoothing each precision is
// floored at 1e-9.
BleuResult corpus_bleu(std::span<const EvalPair> pairs, std::size_t max_n = 4, bool smoothing = false);

std::size_t lcs_length(const Tokens& a, const Tokens& b);
double rouge_l_f1(const Tokens& hyp, const Tokens& ref);
double rouge_l(std::span<const EvalPair> pairs);  // mean F1

struct Alignment {
  std::vector<int> hyp_to_ref;  // -1 = unaligned
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// Number of runs of aligned positions that are consecutive and in the same
// order on both sides.
std::size_t count_chunks(const std::vector<int>& hyp_to_ref);

// Maximum one-to-one alignment of hyp and ref positions whose keys are equal,
// extending `fixed` (positions already aligned stay as they are), with the
// fewest chunks among maximum alignments.
Alignment align_min_chunks(const Tokens& hyp_keys, const Tokens& ref_keys, std::vector<int> fixed);

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

// Exact-match stage, then Porter-stem stage over still-unaligned tokens.
// Fmean = 10PR / (R + 9P), penalty = 0.5 (chunks / m)^3.
MeteorDetail meteor_sentence(const Tokens& hyp, const Tokens& ref);
double meteor_lite(std::span<const EvalPair> pairs);  // mean score

// Fraction of non-pad positions where the argmax (lowest id on ties) equals
// the target. distributions[t] belongs to targets[t].
double per_token_accuracy(const std::vector<std::vector<double>>& distributions, std::span<const int> targets,
                          int pad_id = kPad);

double perplexity(double total_nll, std::size_t token_count);

struct MetricReport {
  double bleu = 0.0;
  double rouge_l_f1 = 0.0;
  double meteor = 0.0;
  std::size_t n = 0;
  bool bleu_warning = false;
};

MetricReport evaluate_pairs(std::span<const EvalPair> pairs);
std::string to_json(const MetricReport& report);

}  // namespace whymine::metrics
