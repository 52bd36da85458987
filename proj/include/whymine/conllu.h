#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace whymine {

struct Token {
  int index = 0;   // 1-based
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;    // 0 = root
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const Token&) const = default;
};

struct DepSentence {
  std::vector<Token> tokens;
  std::string doc_id;
  int sent_index = 0;

  std::size_t size() const { return tokens.size(); }
  const Token& at(int index) const { return tokens.at(static_cast<std::size_t>(index - 1)); }
  int root() const;
  // Dependents of `index` (0 for the root) in surface order.
  std::vector<int> children(int index) const;
  // All token indices in the subtree rooted at `index`, sorted.
  std::vector<int> subtree(int index) const;
  std::vector<std::string> forms() const;

  bool operator==(const DepSentence&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<DepSentence> sentences;

  bool operator==(const Document&) const = default;
};

struct ParseError {
  std::size_t line = 0;  // 1-based line number in the input
  std::string message;
};

struct ParseResult {
  std::vector<Document> documents;
  std::vector<ParseError> errors;  // one entry per dropped sentence
  std::size_t dropped() const { return errors.size(); }
};

// Reads CoNLL-U text. Sentences that are malformed or not a single-rooted
// tree are dropped and reported in `errors`; parsing continues after them.
// Sentences before the first `# newdoc id` go to a document named
// `default_doc_id`.
ParseResult parse_conllu(std::istream& in, const std::string& default_doc_id = "doc0");
ParseResult parse_conllu_string(std::string_view text, const std::string& default_doc_id = "doc0");

std::string to_conllu(const DepSentence& sent);
std::string to_conllu(const std::vector<Document>& docs);

enum class LabelScheme { stanford, ud2 };

LabelScheme parse_label_scheme(std::string_view name);
std::string normalize_label(std::string_view deprel, LabelScheme scheme);
DepSentence normalize_labels(DepSentence sent, LabelScheme scheme);

// Checks the single-root and acyclicity invariants. Returns an empty string
// when the sentence is a valid tree, otherwise a description of the defect.
std::string tree_defect(const DepSentence& sent);

std::string to_lower(std::string_view s);

}  // namespace whymine
