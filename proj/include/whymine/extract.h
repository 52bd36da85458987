#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whymine/conllu.h"

namespace whymine {

enum class ClauseOrder { s1_first, s2_first };

// A phenomenon clause (s1) and the explanation clause (s2) cut out of one
// "because" sentence, plus up to five preceding sentences of context.
struct ExplanationPair {
  std::vector<std::string> s1;
  std::vector<std::string> s2;
  std::vector<std::vector<std::string>> context;
  std::string doc_id;
  int sent_index = 0;
  ClauseOrder order = ClauseOrder::s1_first;

  bool operator==(const ExplanationPair&) const = default;
};

enum class RejectReason {
  none,
  no_because,
  because_of,
  no_advcl,
  incomplete_clause,
  clause_too_long,
  multiple_because,
};

const char* to_string(RejectReason reason);
const char* to_string(ClauseOrder order);
ClauseOrder parse_clause_order(const std::string& s);

struct ExtractionConfig {
  std::size_t min_clause_len = 3;
  std::size_t max_clause_len = 50;
  std::size_t context_window = 5;
};

struct ExtractOutcome {
  std::optional<ExplanationPair> pair;
  RejectReason reason = RejectReason::none;
};

struct ExtractionStats {
  std::size_t sentences_seen = 0;
  std::size_t because_sentences = 0;
  std::size_t pairs_emitted = 0;
  // Rejections among sentences that do contain "because".
  std::map<std::string, std::size_t> rejected_by_reason;
};

// `sent` must already be label-normalized.
ExtractOutcome extract_pair(const DepSentence& sent, const ExtractionConfig& cfg = {});

struct ExtractionResult {
  std::vector<ExplanationPair> pairs;
  ExtractionStats stats;
};

// Runs extract_pair over every sentence and attaches the preceding context
// window. Documents are processed in parallel; output order follows the
// input document order and sentence order.
ExtractionResult extract_corpus(const std::vector<Document>& docs, const ExtractionConfig& cfg = {});

struct LengthReport {
  std::size_t count = 0;
  std::optional<double> mean_pair_len;          // |s1| + |s2|
  std::optional<double> mean_with_context_len;  // plus all context tokens
};

LengthReport corpus_stats(const std::vector<ExplanationPair>& pairs);

std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<std::string> split_tokens(const std::string& text);

// One JSON object per line: {"id","doc_id","sent_index","s1","s2","context","order"}.
std::string pair_to_jsonl(const ExplanationPair& pair, std::size_t id);
ExplanationPair pair_from_jsonl(const std::string& line);

}  // namespace whymine
