#include "whymine/rewrite.h"

#include <algorithm>

#include "whymine/inflect.h"

namespace whymine {

const char* to_string(RewriteRule rule) {
  return rule == RewriteRule::do_support ? "do_support" : "aux_copy";
}

const char* to_string(RewriteFailure failure) {
  switch (failure) {
    case RewriteFailure::no_subject: return "no_subject";
    case RewriteFailure::no_aux: return "no_aux";
    case RewriteFailure::not_why_question: return "not_why_question";
  }
  return "unknown";
}

RewriteError::RewriteError(RewriteFailure reason)
    : Error("rewrite_error", std::string("rewrite failed: ") + to_string(reason)), reason_(reason) {}

namespace {

bool is_finite_verb(const Token& t) {
  if (t.upos != "VERB" && t.upos != "AUX") return false;
  if (t.feats.find("VerbForm=Fin") != std::string::npos) return true;
  return t.xpos == "VBD" || t.xpos == "VBZ" || t.xpos == "VBP" || t.xpos == "MD";
}

}  // namespace

RewriteResult rewrite(const DepSentence& q) {
  if (q.tokens.empty() || to_lower(q.tokens.front().form) != "why")
    throw RewriteError(RewriteFailure::not_why_question);
  const int why = q.tokens.front().index;
  const int root = q.root();
  const auto deps = q.children(root);

  RewriteResult r;
  int subj = 0;
  for (int d : deps) {
    const auto& rel = q.at(d).deprel;
    if (rel == "nsubj" || rel == "nsubjpass") {
      subj = d;
      break;
    }
  }
  if (subj == 0) throw RewriteError(RewriteFailure::no_subject);

  for (int d : deps) {
    const auto& rel = q.at(d).deprel;
    if (rel == "aux" || rel == "cop" || rel == "auxpass") {
      r.aux_token = d;
      break;
    }
  }
  if (!r.aux_token && !is_finite_verb(q.at(root))) throw RewriteError(RewriteFailure::no_aux);

  auto keep = [&](int i) { return i != why && q.at(i).form != "?"; };
  for (int i : q.subtree(subj))
    if (keep(i)) r.subj_span.push_back(i);

  r.vp_span.push_back(root);
  for (int d : deps) {
    if (d == subj || (r.aux_token && d == *r.aux_token)) continue;
    for (int i : q.subtree(d))
      if (keep(i)) r.vp_span.push_back(i);
  }
  std::sort(r.vp_span.begin(), r.vp_span.end());

  std::string root_form = q.at(root).form;
  if (r.aux_token) {
    const std::string aux = to_lower(q.at(*r.aux_token).form);
    if (aux == "do" || aux == "does" || aux == "did") {
      r.applied_rule = RewriteRule::do_support;
      Inflection target = aux == "did" ? Inflection::past
                          : aux == "does" ? Inflection::third_singular
                                          : Inflection::base;
      root_form = inflect(to_lower(q.at(root).lemma), target);
    }
  }

  for (int i : r.subj_span) r.statement.push_back(q.at(i).form);
  if (r.aux_token && r.applied_rule == RewriteRule::aux_copy) r.statement.push_back(q.at(*r.aux_token).form);
  for (int i : r.vp_span) r.statement.push_back(i == root ? root_form : q.at(i).form);

  const Token& first = q.at(r.subj_span.empty() ? root : r.subj_span.front());
  if (!r.statement.empty() && first.upos != "PROPN" && r.statement.front() != "I")
    r.statement.front() = to_lower(r.statement.front());
  return r;
}

std::vector<std::string> to_prompt(const RewriteResult& r) {
  auto out = r.statement;
  out.emplace_back("because");
  return out;
}

}  // namespace whymine
