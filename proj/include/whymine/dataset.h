#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "whymine/extract.h"
#include "whymine/vocab.h"

namespace whymine {

enum class Task { L2E, L2EC };

const char* to_string(Task task);
Task parse_task(const std::string& s);

struct Example {
  std::vector<int> source;
  std::vector<int> target;  // ends with EOS
  std::size_t pair_id = 0;
  std::size_t n_context = 0;  // SEP-delimited context blocks kept in source

  bool operator==(const Example&) const = default;
};

struct ExampleOptions {
  Task task = Task::L2E;
  std::size_t max_src_len = 200;
};

struct ExampleSet {
  std::vector<Example> examples;
  std::size_t skipped = 0;  // pairs whose s1 or s2 encoded to nothing
};

// L2E: source = S1. L2EC: source = C1 <SEP> ... Ck <SEP> S1 with k <= 5.
// Over-long sources lose their oldest context blocks first, then leading S1
// tokens.
ExampleSet make_examples(const std::vector<ExplanationPair>& pairs, const Vocabulary& vocab,
                         const ExampleOptions& opts);

inline constexpr double kTrainFraction = 0.90;
inline constexpr double kValidFraction = 0.05;
inline constexpr double kTestFraction = 0.05;
inline constexpr std::size_t kMinSplitSize = 20;

struct DatasetSplit {
  std::vector<Example> train, valid, test;
  std::uint64_t seed = 0;
};

// Seeded Fisher-Yates shuffle, then contiguous train/valid/test slices with
// |valid| = |test| = round(0.05 n). Throws Error("too_small") for n < 20.
DatasetSplit split(std::vector<Example> examples, std::uint64_t seed);

// Permutation used by split(); exposed for tests.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

enum class PromptKind { winograd, copa, raw };
PromptKind parse_prompt_kind(const std::string& s);

// Lowercases, drops trailing sentence punctuation and appends "because"
// unless it is already the last word. Throws Error("empty_prompt").
std::vector<std::string> adapt_prompt(PromptKind kind, const std::vector<std::string>& text);

// The model-side source for a prompt: adapt_prompt without the trailing
// marker, encoded.
std::vector<int> prompt_source(const std::vector<std::string>& prompt, const Vocabulary& vocab);

std::string example_to_jsonl(const Example& ex);
Example example_from_jsonl(const std::string& line);

}  // namespace whymine
