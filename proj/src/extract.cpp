#include "whymine/extract.h"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "whymine/error.h"

namespace whymine {

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::none: return "none";
    case RejectReason::no_because: return "no_because";
    case RejectReason::because_of: return "because_of";
    case RejectReason::no_advcl: return "no_advcl";
    case RejectReason::incomplete_clause: return "incomplete_clause";
    case RejectReason::clause_too_long: return "clause_too_long";
    case RejectReason::multiple_because: return "multiple_because";
  }
  return "unknown";
}

const char* to_string(ClauseOrder order) {
  return order == ClauseOrder::s1_first ? "s1_first" : "s2_first";
}

ClauseOrder parse_clause_order(const std::string& s) {
  if (s == "s1_first") return ClauseOrder::s1_first;
  if (s == "s2_first") return ClauseOrder::s2_first;
  throw Error("bad_record", "unknown clause order '" + s + "'");
}

namespace {

bool is_punct(const Token& t) { return t.upos == "PUNCT"; }
bool is_verbal(const Token& t) { return t.upos == "VERB" || t.upos == "AUX"; }

void trim_punct(const DepSentence& sent, std::vector<int>& idx) {
  while (!idx.empty() && is_punct(sent.at(idx.back()))) idx.pop_back();
  auto first = std::find_if(idx.begin(), idx.end(), [&](int i) { return !is_punct(sent.at(i)); });
  idx.erase(idx.begin(), first);
}

std::vector<std::string> forms_of(const DepSentence& sent, const std::vector<int>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(sent.at(i).form);
  return out;
}

RejectReason check_clause(const DepSentence& sent, const std::vector<int>& idx, const ExtractionConfig& cfg) {
  if (idx.size() < cfg.min_clause_len) return RejectReason::incomplete_clause;
  if (std::none_of(idx.begin(), idx.end(), [&](int i) { return is_verbal(sent.at(i)); }))
    return RejectReason::incomplete_clause;
  if (idx.size() > cfg.max_clause_len) return RejectReason::clause_too_long;
  return RejectReason::none;
}

}  // namespace

ExtractOutcome extract_pair(const DepSentence& sent, const ExtractionConfig& cfg) {
  std::vector<int> markers;
  for (const auto& t : sent.tokens)
    if (to_lower(t.form) == "because") markers.push_back(t.index);
  if (markers.empty()) return {std::nullopt, RejectReason::no_because};
  if (markers.size() > 1) return {std::nullopt, RejectReason::multiple_because};

  const Token& marker = sent.at(markers.front());
  const int n = static_cast<int>(sent.size());
  if (marker.index < n && to_lower(sent.at(marker.index + 1).form) == "of")
    return {std::nullopt, RejectReason::because_of};
  if (marker.deprel != "mark" || marker.head == 0) return {std::nullopt, RejectReason::no_advcl};

  const Token& clause_head = sent.at(marker.head);
  if (clause_head.deprel != "advcl" || clause_head.head == 0) return {std::nullopt, RejectReason::no_advcl};
  const int governor = clause_head.head;

  const auto explanation_tree = sent.subtree(clause_head.index);
  std::vector<int> s2;
  for (int i : explanation_tree)
    if (i != marker.index) s2.push_back(i);
  trim_punct(sent, s2);

  // The excised span; commas touching it on either side go with it.
  const int lo = explanation_tree.front();
  const int hi = explanation_tree.back();
  std::vector<int> s1;
  for (int i : sent.subtree(governor)) {
    if (std::binary_search(explanation_tree.begin(), explanation_tree.end(), i)) continue;
    if ((i == lo - 1 || i == hi + 1) && sent.at(i).form == ",") continue;
    s1.push_back(i);
  }
  trim_punct(sent, s1);

  for (const auto* clause : {&s1, &s2}) {
    auto reason = check_clause(sent, *clause, cfg);
    if (reason != RejectReason::none) return {std::nullopt, reason};
  }

  ExplanationPair pair;
  pair.s1 = forms_of(sent, s1);
  pair.s2 = forms_of(sent, s2);
  pair.doc_id = sent.doc_id;
  pair.sent_index = sent.sent_index;
  pair.order = marker.index < governor ? ClauseOrder::s2_first : ClauseOrder::s1_first;
  return {std::move(pair), RejectReason::none};
}

ExtractionResult extract_corpus(const std::vector<Document>& docs, const ExtractionConfig& cfg) {
  struct DocOutput {
    std::vector<ExplanationPair> pairs;
    std::vector<RejectReason> rejections;
    std::size_t seen = 0;
    std::size_t with_because = 0;
  };
  std::vector<DocOutput> per_doc(docs.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(docs.size()); ++d) {
    const auto& doc = docs[static_cast<std::size_t>(d)];
    auto& out = per_doc[static_cast<std::size_t>(d)];
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      ++out.seen;
      auto outcome = extract_pair(doc.sentences[s], cfg);
      if (outcome.reason != RejectReason::no_because) ++out.with_because;
      if (!outcome.pair) {
        if (outcome.reason != RejectReason::no_because) out.rejections.push_back(outcome.reason);
        continue;
      }
      auto& pair = *outcome.pair;
      std::size_t begin = s >= cfg.context_window ? s - cfg.context_window : 0;
      for (std::size_t c = begin; c < s; ++c) pair.context.push_back(doc.sentences[c].forms());
      out.pairs.push_back(std::move(pair));
    }
  }

  ExtractionResult result;
  for (auto& out : per_doc) {
    result.stats.sentences_seen += out.seen;
    result.stats.because_sentences += out.with_because;
    for (auto reason : out.rejections) ++result.stats.rejected_by_reason[to_string(reason)];
    for (auto& p : out.pairs) result.pairs.push_back(std::move(p));
  }
  result.stats.pairs_emitted = result.pairs.size();
  return result;
}

LengthReport corpus_stats(const std::vector<ExplanationPair>& pairs) {
  LengthReport report;
  report.count = pairs.size();
  if (pairs.empty()) return report;
  double pair_total = 0.0;
  double ctx_total = 0.0;
  for (const auto& p : pairs) {
    double len = static_cast<double>(p.s1.size() + p.s2.size());
    pair_total += len;
    ctx_total += len;
    for (const auto& c : p.context) ctx_total += static_cast<double>(c.size());
  }
  const double n = static_cast<double>(pairs.size());
  report.mean_pair_len = pair_total / n;
  report.mean_with_context_len = ctx_total / n;
  return report;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string pair_to_jsonl(const ExplanationPair& pair, std::size_t id) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["doc_id"] = pair.doc_id;
  j["sent_index"] = pair.sent_index;
  j["s1"] = join_tokens(pair.s1);
  j["s2"] = join_tokens(pair.s2);
  auto ctx = nlohmann::ordered_json::array();
  for (const auto& c : pair.context) ctx.push_back(join_tokens(c));
  j["context"] = std::move(ctx);
  j["order"] = to_string(pair.order);
  return j.dump();
}

ExplanationPair pair_from_jsonl(const std::string& line) {
  try {
    auto j = nlohmann::json::parse(line);
    ExplanationPair p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.sent_index = j.at("sent_index").get<int>();
    p.s1 = split_tokens(j.at("s1").get<std::string>());
    p.s2 = split_tokens(j.at("s2").get<std::string>());
    for (const auto& c : j.at("context")) p.context.push_back(split_tokens(c.get<std::string>()));
    p.order = parse_clause_order(j.at("order").get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad_record", std::string("malformed pair record: ") + e.what());
  }
}

}  // namespace whymine
