#include "whymine/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "whymine/conllu.h"
#include "whymine/error.h"
#include "whymine/stemmer.h"

namespace whymine::metrics {

EvalPair::EvalPair(Tokens hyp, Tokens ref) : hypothesis(std::move(hyp)), reference(std::move(ref)) {
  for (auto& t : hypothesis) t = to_lower(t);
  for (auto& t : reference) t = to_lower(t);
}

Tokens tokenize(const std::string& text) {
  Tokens out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) out.push_back(to_lower(tok));
  return out;
}

// ------------------------------------------------------------------- BLEU

namespace {

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Tokens& toks, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                      toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

}  // namespace

BleuResult corpus_bleu(std::span<const EvalPair> pairs, std::size_t max_n, bool smoothing) {
  constexpr double kFloor = 1e-9;
  BleuResult r;
  std::vector<std::size_t> matched(max_n, 0), total(max_n, 0);
  for (const auto& p : pairs) {
    r.hyp_len += p.hypothesis.size();
    r.ref_len += p.reference.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      auto hyp = ngram_counts(p.hypothesis, n);
      auto ref = ngram_counts(p.reference, n);
      for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        matched[n - 1] += std::min(count, it == ref.end() ? std::size_t{0} : it->second);
        total[n - 1] += count;
      }
    }
  }
  if (pairs.empty() || r.hyp_len == 0) {
    r.warning = true;
    r.precisions.assign(max_n, 0.0);
    return r;
  }
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < max_n; ++n) {
    double p = total[n] ? static_cast<double>(matched[n]) / static_cast<double>(total[n]) : 0.0;
    if (smoothing) p = std::max(p, kFloor);
    r.precisions.push_back(p);
    if (p == 0.0)
      zero = true;
    else
      log_sum += std::log(p) / static_cast<double>(max_n);
  }
  const double c = static_cast<double>(r.hyp_len);
  const double ref = static_cast<double>(r.ref_len);
  r.brevity_penalty = c < ref ? std::exp(1.0 - ref / c) : 1.0;
  r.score = zero ? 0.0 : r.brevity_penalty * std::exp(log_sum);
  return r;
}

// ---------------------------------------------------------------- ROUGE-L

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f1(const Tokens& hyp, const Tokens& ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(hyp, ref));
  const double p = l / static_cast<double>(hyp.size());
  const double r = l / static_cast<double>(ref.size());
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double rouge_l(std::span<const EvalPair> pairs) {
  if (pairs.empty()) return 0.0;
  std::vector<double> scores(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    scores[static_cast<std::size_t>(i)] = rouge_l_f1(p.hypothesis, p.reference);
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(pairs.size());
}

// ----------------------------------------------------------------- METEOR

std::size_t count_chunks(const std::vector<int>& hyp_to_ref) {
  std::size_t chunks = 0;
  int prev_ref = -2;
  bool prev_aligned = false;
  for (int r : hyp_to_ref) {
    if (r < 0) {
      prev_aligned = false;
      continue;
    }
    if (!(prev_aligned && r == prev_ref + 1)) ++chunks;
    prev_aligned = true;
    prev_ref = r;
  }
  return chunks;
}

namespace {

// Depth-first search over hyp positions in order. Each free hyp position is
// either left unaligned (only while its key still has slack) or aligned to a
// free ref position with the same key; candidates continuing the current
// chunk are tried first and branches that cannot beat the best chunk count
// are cut. A node budget bounds pathological inputs.
class ChunkSearch {
 public:
  ChunkSearch(const Tokens& hyp, const Tokens& ref, std::vector<int> fixed)
      : hyp_(hyp), ref_(ref), cur_(std::move(fixed)), ref_used_(ref.size(), false) {
    for (int r : cur_)
      if (r >= 0) ref_used_[static_cast<std::size_t>(r)] = true;
    std::map<std::string, std::size_t> free_hyp, free_ref;
    for (std::size_t i = 0; i < hyp_.size(); ++i)
      if (cur_[i] < 0) ++free_hyp[hyp_[i]];
    for (std::size_t j = 0; j < ref_.size(); ++j)
      if (!ref_used_[j]) ++free_ref[ref_[j]];
    for (const auto& [key, nh] : free_hyp) {
      auto it = free_ref.find(key);
      std::size_t nr = it == free_ref.end() ? 0 : it->second;
      slack_[key] = nh - std::min(nh, nr);
    }
    free_.assign(hyp_.size(), false);
    for (std::size_t i = 0; i < hyp_.size(); ++i) free_[i] = cur_[i] < 0;
  }

  Alignment run() {
    best_ = cur_;
    best_chunks_ = SIZE_MAX;
    search(0, 0, -2, false);
    Alignment a;
    a.hyp_to_ref = best_;
    a.chunks = count_chunks(best_);
    a.matches = static_cast<std::size_t>(std::count_if(best_.begin(), best_.end(), [](int r) { return r >= 0; }));
    return a;
  }

 private:
  void search(std::size_t i, std::size_t chunks, int prev_ref, bool prev_aligned) {
    if (chunks >= best_chunks_) return;
    if (++nodes_ > kNodeBudget && best_chunks_ != SIZE_MAX) return;
    if (i == hyp_.size()) {
      best_chunks_ = chunks;
      best_ = cur_;
      return;
    }
    auto step = [&](int r) {
      std::size_t c = chunks + ((prev_aligned && r == prev_ref + 1) ? 0 : 1);
      search(i + 1, c, r, true);
    };
    if (!free_[i]) {
      if (cur_[i] >= 0)
        step(cur_[i]);
      else
        search(i + 1, chunks, prev_ref, false);
      return;
    }
    const std::string& key = hyp_[i];
    std::vector<std::size_t> options;
    if (prev_aligned && prev_ref + 1 < static_cast<int>(ref_.size())) {
      auto j = static_cast<std::size_t>(prev_ref + 1);
      if (!ref_used_[j] && ref_[j] == key) options.push_back(j);
    }
    for (std::size_t j = 0; j < ref_.size(); ++j)
      if (!ref_used_[j] && ref_[j] == key && (options.empty() || options.front() != j)) options.push_back(j);
    for (std::size_t j : options) {
      ref_used_[j] = true;
      cur_[i] = static_cast<int>(j);
      step(static_cast<int>(j));
      cur_[i] = -1;
      ref_used_[j] = false;
    }
    auto it = slack_.find(key);
    if (it != slack_.end() && it->second > 0) {
      --it->second;
      search(i + 1, chunks, prev_ref, false);
      ++it->second;
    }
  }

  static constexpr std::size_t kNodeBudget = 200000;

  const Tokens& hyp_;
  const Tokens& ref_;
  std::vector<int> cur_;
  std::vector<bool> ref_used_;
  std::vector<bool> free_;
  std::map<std::string, std::size_t> slack_;
  std::vector<int> best_;
  std::size_t best_chunks_ = SIZE_MAX;
  std::size_t nodes_ = 0;
};

}  // namespace

Alignment align_min_chunks(const Tokens& hyp_keys, const Tokens& ref_keys, std::vector<int> fixed) {
  if (fixed.empty()) fixed.assign(hyp_keys.size(), -1);
  return ChunkSearch(hyp_keys, ref_keys, std::move(fixed)).run();
}

MeteorDetail meteor_sentence(const Tokens& hyp, const Tokens& ref) {
  MeteorDetail d;
  if (hyp.empty() || ref.empty()) return d;
  auto exact = align_min_chunks(hyp, ref, {});

  // Stem stage: only still-unaligned tokens may match, so aligned positions
  // get keys that cannot collide.
  Tokens hyp_stems(hyp.size()), ref_stems(ref.size());
  std::vector<bool> ref_taken(ref.size(), false);
  for (int r : exact.hyp_to_ref)
    if (r >= 0) ref_taken[static_cast<std::size_t>(r)] = true;
  for (std::size_t i = 0; i < hyp.size(); ++i)
    hyp_stems[i] = exact.hyp_to_ref[i] >= 0 ? "\x01h" : porter_stem(hyp[i]);
  for (std::size_t j = 0; j < ref.size(); ++j) ref_stems[j] = ref_taken[j] ? "\x01r" : porter_stem(ref[j]);
  auto full = align_min_chunks(hyp_stems, ref_stems, exact.hyp_to_ref);

  d.matches = full.matches;
  d.chunks = full.chunks;
  if (d.matches == 0) return d;
  const double m = static_cast<double>(d.matches);
  d.precision = m / static_cast<double>(hyp.size());
  d.recall = m / static_cast<double>(ref.size());
  d.fmean = 10.0 * d.precision * d.recall / (d.recall + 9.0 * d.precision);
  const double frag = static_cast<double>(d.chunks) / m;
  d.penalty = 0.5 * frag * frag * frag;
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor_lite(std::span<const EvalPair> pairs) {
  if (pairs.empty()) return 0.0;
  std::vector<double> scores(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    scores[static_cast<std::size_t>(i)] = meteor_sentence(p.hypothesis, p.reference).score;
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(pairs.size());
}

// -------------------------------------------------------- training metrics

double per_token_accuracy(const std::vector<std::vector<double>>& distributions, std::span<const int> targets,
                          int pad_id) {
  if (distributions.size() != targets.size())
    throw Error("length_mismatch", "one distribution per target position is required");
  std::size_t scored = 0, correct = 0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (targets[t] == pad_id) continue;
    ++scored;
    const auto& d = distributions[t];
    std::size_t best = 0;
    for (std::size_t k = 1; k < d.size(); ++k)
      if (d[k] > d[best]) best = k;
    if (static_cast<int>(best) == targets[t]) ++correct;
  }
  if (scored == 0) throw Error("no_scorable_positions", "every target position is padding");
  return static_cast<double>(correct) / static_cast<double>(scored);
}

double perplexity(double total_nll, std::size_t token_count) {
  if (token_count == 0) throw Error("no_scorable_positions", "perplexity needs at least one token");
  return std::exp(total_nll / static_cast<double>(token_count));
}

MetricReport evaluate_pairs(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw Error("empty_input", "no hypothesis/reference pairs to evaluate");
  MetricReport r;
  r.n = pairs.size();
  auto bleu = corpus_bleu(pairs);
  r.bleu = bleu.score;
  r.bleu_warning = bleu.warning;
  r.rouge_l_f1 = rouge_l(pairs);
  r.meteor = meteor_lite(pairs);
  return r;
}

std::string to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["bleu"] = report.bleu;
  j["rouge_l_f1"] = report.rouge_l_f1;
  j["meteor"] = report.meteor;
  j["n"] = report.n;
  j["scale"] = "0-1";
  if (report.bleu_warning) j["warning"] = "no hypothesis tokens; BLEU reported as 0";
  return j.dump(2);
}

}  // namespace whymine::metrics
