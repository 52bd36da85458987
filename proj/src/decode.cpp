#include "whymine/decode.h"

#include <algorithm>
#include <cmath>

#include "whymine/error.h"

namespace whymine::nn {

const char* to_string(DecodeMode mode) { return mode == DecodeMode::greedy ? "greedy" : "beam"; }

DecodeMode parse_decode_mode(const std::string& s) {
  if (s == "greedy") return DecodeMode::greedy;
  if (s == "beam") return DecodeMode::beam;
  throw Error("usage", "unknown decode mode '" + s + "'", ExitCode::usage);
}

DecodeResult greedy_decode(const StepModel& model, std::span<const int> source, const DecodeOptions& opts) {
  DecodeResult result;
  result.mode = DecodeMode::greedy;
  Candidate cand;
  if (opts.max_len == 0) {
    result.candidates.push_back(cand);
    return result;
  }
  auto state = model.start(source);
  while (true) {
    const auto& lp = state.log_probs;
    std::size_t best = 0;
    for (std::size_t k = 1; k < lp.size(); ++k)
      if (lp[k] > lp[best]) best = k;
    const int tok = static_cast<int>(best);
    cand.tokens.push_back(tok);
    cand.score += lp[best];
    if (tok == opts.eos_id || cand.tokens.size() >= opts.max_len) break;
    state = model.advance(state, tok);
  }
  result.candidates.push_back(std::move(cand));
  return result;
}

namespace {

struct Hypothesis {
  std::vector<int> tokens;
  double score = 0.0;
  DecoderState state;
};

double ranked_score(const Candidate& c, std::optional<double> alpha) {
  if (!alpha || c.tokens.empty()) return c.score;
  return c.score / std::pow(static_cast<double>(c.tokens.size()), *alpha);
}

bool better(double sa, const std::vector<int>& ta, double sb, const std::vector<int>& tb) {
  if (sa != sb) return sa > sb;
  return ta < tb;
}

}  // namespace

DecodeResult beam_decode(const StepModel& model, std::span<const int> source, std::size_t beam_size,
                         const DecodeOptions& opts, std::optional<double> length_norm) {
  if (beam_size < 1) throw Error("usage", "beam_size must be >= 1", ExitCode::usage);
  DecodeResult result;
  result.mode = DecodeMode::beam;
  result.beam_size = beam_size;

  std::vector<Candidate> pool;
  std::vector<Hypothesis> live;
  if (opts.max_len == 0) {
    result.candidates.push_back({});
    return result;
  }
  live.push_back({{}, 0.0, model.start(source)});

  for (std::size_t len = 1; len <= opts.max_len && !live.empty(); ++len) {
    struct Expansion {
      std::size_t parent;
      int token;
      double score;
    };
    std::vector<Expansion> expansions;
    for (std::size_t h = 0; h < live.size(); ++h) {
      const auto& lp = live[h].state.log_probs;
      for (std::size_t k = 0; k < lp.size(); ++k)
        expansions.push_back({h, static_cast<int>(k), live[h].score + lp[k]});
    }
    // Live hypotheses share a length, so lexicographic order of the extended
    // sequences is parent order, then token.
    auto expansion_better = [&](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return live[a.parent].tokens < live[b.parent].tokens;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(beam_size, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                      expansion_better);

    std::vector<Hypothesis> next;
    for (std::size_t e = 0; e < keep; ++e) {
      const auto& ex = expansions[e];
      auto tokens = live[ex.parent].tokens;
      tokens.push_back(ex.token);
      if (ex.token == opts.eos_id || len == opts.max_len) {
        pool.push_back({std::move(tokens), ex.score});
        continue;
      }
      next.push_back({std::move(tokens), ex.score, model.advance(live[ex.parent].state, ex.token)});
    }
    live = std::move(next);
  }
  for (auto& h : live) pool.push_back({std::move(h.tokens), h.score});

  std::vector<std::pair<double, Candidate>> ranked;
  for (auto& c : pool) {
    double s = ranked_score(c, length_norm);
    c.score = s;
    ranked.emplace_back(s, std::move(c));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return better(a.first, a.second.tokens, b.first, b.second.tokens);
  });
  for (std::size_t i = 0; i < ranked.size() && i < beam_size; ++i) result.candidates.push_back(std::move(ranked[i].second));
  return result;
}

}  // namespace whymine::nn
