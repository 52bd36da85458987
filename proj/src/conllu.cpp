#include "whymine/conllu.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "whymine/error.h"

namespace whymine {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

int DepSentence::root() const {
  for (const auto& t : tokens)
    if (t.head == 0) return t.index;
  return 0;
}

std::vector<int> DepSentence::children(int index) const {
  std::vector<int> out;
  for (const auto& t : tokens)
    if (t.head == index && t.index != index) out.push_back(t.index);
  return out;
}

std::vector<int> DepSentence::subtree(int index) const {
  std::vector<int> out;
  std::vector<int> stack{index};
  while (!stack.empty()) {
    int cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    for (int child : children(cur)) stack.push_back(child);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> DepSentence::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.form);
  return out;
}

std::string tree_defect(const DepSentence& sent) {
  const int n = static_cast<int>(sent.tokens.size());
  if (n == 0) return "empty sentence";
  int roots = 0;
  for (const auto& t : sent.tokens) {
    if (t.head < 0 || t.head > n) return "head out of range at token " + std::to_string(t.index);
    if (t.head == t.index) return "self-loop at token " + std::to_string(t.index);
    if (t.head == 0) ++roots;
  }
  if (roots != 1) return "expected exactly one root, found " + std::to_string(roots);
  // Every token must reach the root within n steps.
  for (const auto& t : sent.tokens) {
    int cur = t.index;
    int steps = 0;
    while (cur != 0 && steps <= n) {
      cur = sent.tokens[static_cast<std::size_t>(cur - 1)].head;
      ++steps;
    }
    if (cur != 0) return "cycle through token " + std::to_string(t.index);
  }
  return {};
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

class Reader {
 public:
  explicit Reader(std::string default_doc_id) { current_doc_.doc_id = std::move(default_doc_id); }

  void feed(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      finish_sentence();
      return;
    }
    if (line.front() == '#') {
      constexpr std::string_view marker = "# newdoc id";
      if (line.starts_with(marker)) {
        finish_sentence();
        auto eq = line.find('=');
        std::string id = eq == std::string_view::npos ? std::string{} : std::string(line.substr(eq + 1));
        id.erase(0, id.find_first_not_of(' '));
        id.erase(id.find_last_not_of(' ') + 1);
        start_document(std::move(id));
      }
      return;
    }
    if (block_start_ == 0) block_start_ = line_no;
    if (block_error_) return;
    auto cols = split_tabs(line);
    if (cols.size() != 10) {
      fail(line_no, "expected 10 columns, found " + std::to_string(cols.size()));
      return;
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) return;
    Token tok;
    if (!parse_int(id, tok.index)) {
      fail(line_no, "non-numeric token id '" + std::string(id) + "'");
      return;
    }
    if (tok.index != static_cast<int>(current_.tokens.size()) + 1) {
      fail(line_no, "token id " + std::to_string(tok.index) + " out of sequence");
      return;
    }
    if (!parse_int(cols[6], tok.head)) {
      fail(line_no, "non-numeric head '" + std::string(cols[6]) + "'");
      return;
    }
    tok.form = cols[1];
    if (tok.form.empty()) {
      fail(line_no, "empty form");
      return;
    }
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.xpos = cols[4];
    tok.feats = cols[5];
    tok.deprel = cols[7];
    tok.deps = cols[8];
    tok.misc = cols[9];
    current_.tokens.push_back(std::move(tok));
  }

  ParseResult finish() {
    finish_sentence();
    flush_document();
    return std::move(result_);
  }

 private:
  void fail(std::size_t line_no, std::string message) {
    block_error_ = true;
    result_.errors.push_back({line_no, std::move(message)});
  }

  void finish_sentence() {
    if (!block_error_ && !current_.tokens.empty()) {
      auto defect = tree_defect(current_);
      if (!defect.empty()) {
        result_.errors.push_back({block_start_, defect});
      } else {
        current_.doc_id = current_doc_.doc_id;
        current_.sent_index = static_cast<int>(current_doc_.sentences.size());
        current_doc_.sentences.push_back(std::move(current_));
      }
    }
    current_ = DepSentence{};
    block_error_ = false;
    block_start_ = 0;
  }

  void flush_document() {
    if (!current_doc_.sentences.empty() || explicit_doc_)
      result_.documents.push_back(std::move(current_doc_));
    current_doc_ = Document{};
  }

  void start_document(std::string id) {
    flush_document();
    current_doc_.doc_id = std::move(id);
    explicit_doc_ = true;
  }

  ParseResult result_;
  Document current_doc_;
  DepSentence current_;
  bool explicit_doc_ = false;
  bool block_error_ = false;
  std::size_t block_start_ = 0;
};

}  // namespace

ParseResult parse_conllu(std::istream& in, const std::string& default_doc_id) {
  Reader reader(default_doc_id);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) reader.feed(line, ++line_no);
  return reader.finish();
}

ParseResult parse_conllu_string(std::string_view text, const std::string& default_doc_id) {
  Reader reader(default_doc_id);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    reader.feed(text.substr(start, pos - start), ++line_no);
    start = pos + 1;
  }
  return reader.finish();
}

std::string to_conllu(const DepSentence& sent) {
  std::ostringstream os;
  for (const auto& t : sent.tokens) {
    os << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << '\t'
       << t.feats << '\t' << t.head << '\t' << t.deprel << '\t' << t.deps << '\t' << t.misc << '\n';
  }
  os << '\n';
  return os.str();
}

std::string to_conllu(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    out += "# newdoc id = " + doc.doc_id + "\n";
    for (const auto& s : doc.sentences) out += to_conllu(s);
  }
  return out;
}

LabelScheme parse_label_scheme(std::string_view name) {
  if (name == "stanford") return LabelScheme::stanford;
  if (name == "ud2") return LabelScheme::ud2;
  throw Error("usage", "unknown label scheme '" + std::string(name) + "'", ExitCode::usage);
}

std::string normalize_label(std::string_view deprel, LabelScheme scheme) {
  if (scheme == LabelScheme::stanford) return std::string(deprel);
  if (deprel == "nsubj:pass") return "nsubjpass";
  if (deprel == "aux:pass") return "auxpass";
  if (deprel == "csubj:pass") return "csubjpass";
  auto colon = deprel.find(':');
  if (colon != std::string_view::npos) {
    auto base = deprel.substr(0, colon);
    if (base == "advcl" || base == "obl" || base == "acl" || base == "nmod") return std::string(base);
  }
  return std::string(deprel);
}

DepSentence normalize_labels(DepSentence sent, LabelScheme scheme) {
  for (auto& t : sent.tokens) t.deprel = normalize_label(t.deprel, scheme);
  return sent;
}

}  // namespace whymine
