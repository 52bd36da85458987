#pragma once

#include <optional>
#include <string>
#include <vector>

#include "whymine/conllu.h"
#include "whymine/error.h"

namespace whymine {

enum class RewriteRule { do_support, aux_copy };
enum class RewriteFailure { no_subject, no_aux, not_why_question };

const char* to_string(RewriteRule rule);
const char* to_string(RewriteFailure failure);

class RewriteError : public Error {
 public:
  explicit RewriteError(RewriteFailure reason);
  RewriteFailure reason() const noexcept { return reason_; }

 private:
  RewriteFailure reason_;
};

// Declarative statement recovered from a why-question, with the token
// indices (into the question parse) each part came from.
struct RewriteResult {
  std::vector<std::string> statement;
  std::vector<int> subj_span;
  std::optional<int> aux_token;
  std::vector<int> vp_span;
  RewriteRule applied_rule = RewriteRule::aux_copy;
};

// Turns a label-normalized parse of "Why ...?" into a statement: drop "why",
// take the root's subject, the first aux/cop/auxpass dependent and the rest
// of the verb phrase; do/does/did is removed and its tense moved onto the
// main verb. Throws RewriteError.
RewriteResult rewrite(const DepSentence& question);

// statement + "because"
std::vector<std::string> to_prompt(const RewriteResult& r);

}  // namespace whymine
