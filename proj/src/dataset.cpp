#include "whymine/dataset.h"

#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "whymine/error.h"

namespace whymine {

const char* to_string(Task task) { return task == Task::L2E ? "L2E" : "L2EC"; }

Task parse_task(const std::string& s) {
  if (s == "L2E") return Task::L2E;
  if (s == "L2EC") return Task::L2EC;
  throw Error("usage", "unknown task '" + s + "' (expected L2E or L2EC)", ExitCode::usage);
}

ExampleSet make_examples(const std::vector<ExplanationPair>& pairs, const Vocabulary& vocab,
                         const ExampleOptions& opts) {
  ExampleSet out;
  for (std::size_t id = 0; id < pairs.size(); ++id) {
    const auto& pair = pairs[id];
    auto s1 = vocab.encode(pair.s1);
    auto s2 = vocab.encode(pair.s2);
    if (s1.empty() || s2.empty()) {
      ++out.skipped;
      continue;
    }
    Example ex;
    ex.pair_id = id;
    ex.target = std::move(s2);
    ex.target.push_back(kEos);

    if (s1.size() > opts.max_src_len) s1.erase(s1.begin(), s1.end() - static_cast<std::ptrdiff_t>(opts.max_src_len));

    std::vector<std::vector<int>> blocks;
    if (opts.task == Task::L2EC) {
      std::size_t first = pair.context.size() > 5 ? pair.context.size() - 5 : 0;
      for (std::size_t c = first; c < pair.context.size(); ++c) blocks.push_back(vocab.encode(pair.context[c]));
      std::size_t total = s1.size();
      for (const auto& b : blocks) total += b.size() + 1;
      std::size_t drop = 0;
      while (total > opts.max_src_len && drop < blocks.size()) total -= blocks[drop++].size() + 1;
      blocks.erase(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    for (const auto& b : blocks) {
      ex.source.insert(ex.source.end(), b.begin(), b.end());
      ex.source.push_back(kSep);
    }
    ex.n_context = blocks.size();
    ex.source.insert(ex.source.end(), s1.begin(), s1.end());
    out.examples.push_back(std::move(ex));
  }
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Bounded draws by rejection so the permutation does not depend on the
  // standard library's distribution implementation.
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do r = rng();
    while (r >= limit);
    return r % bound;
  };
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[below(i)]);
  return idx;
}

DatasetSplit split(std::vector<Example> examples, std::uint64_t seed) {
  const std::size_t n = examples.size();
  if (n < kMinSplitSize)
    throw Error("too_small", "need at least " + std::to_string(kMinSplitSize) + " examples to split, got " +
                                 std::to_string(n));
  const auto n_valid = static_cast<std::size_t>(std::lround(kValidFraction * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(std::lround(kTestFraction * static_cast<double>(n)));
  const std::size_t n_train = n - n_valid - n_test;

  DatasetSplit s;
  s.seed = seed;
  const auto order = shuffled_indices(n, seed);
  for (std::size_t k = 0; k < n; ++k) {
    auto& dst = k < n_train ? s.train : (k < n_train + n_valid ? s.valid : s.test);
    dst.push_back(std::move(examples[order[k]]));
  }
  return s;
}

PromptKind parse_prompt_kind(const std::string& s) {
  if (s == "winograd") return PromptKind::winograd;
  if (s == "copa") return PromptKind::copa;
  if (s == "raw") return PromptKind::raw;
  throw Error("usage", "unknown prompt kind '" + s + "'", ExitCode::usage);
}

namespace {

bool is_sentence_punct(char c) { return c == '.' || c == '!' || c == '?' || c == ';' || c == ':' || c == ','; }

}  // namespace

std::vector<std::string> adapt_prompt(PromptKind, const std::vector<std::string>& text) {
  std::vector<std::string> out;
  for (const auto& t : text) out.push_back(t == kSepToken ? t : to_lower(t));
  while (!out.empty()) {
    auto& last = out.back();
    while (!last.empty() && is_sentence_punct(last.back())) last.pop_back();
    if (!last.empty()) break;
    out.pop_back();
  }
  if (out.empty()) throw Error("empty_prompt", "prompt is empty");
  if (out.back() != "because") out.emplace_back("because");
  return out;
}

std::vector<int> prompt_source(const std::vector<std::string>& prompt, const Vocabulary& vocab) {
  auto tokens = adapt_prompt(PromptKind::raw, prompt);
  tokens.pop_back();
  return vocab.encode(tokens);
}

std::string example_to_jsonl(const Example& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.pair_id;
  j["n_context"] = ex.n_context;
  j["source"] = ex.source;
  j["target"] = ex.target;
  return j.dump();
}

Example example_from_jsonl(const std::string& line) {
  try {
    auto j = nlohmann::json::parse(line);
    Example ex;
    ex.pair_id = j.value("id", std::size_t{0});
    ex.n_context = j.value("n_context", std::size_t{0});
    ex.source = j.at("source").get<std::vector<int>>();
    ex.target = j.at("target").get<std::vector<int>>();
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_record", std::string("malformed example record: ") + e.what());
  }
}

}  // namespace whymine
