#include "whymine/inflect.h"

#include <utility>

#include "whymine/conllu.h"

namespace whymine {

namespace {

// base -> simple past
constexpr std::pair<const char*, const char*> kIrregularPast[] = {
    {"arise", "arose"},     {"awake", "awoke"},       {"be", "was"},           {"bear", "bore"},
    {"beat", "beat"},       {"become", "became"},     {"begin", "began"},      {"bend", "bent"},
    {"bet", "bet"},         {"bid", "bid"},           {"bind", "bound"},       {"bite", "bit"},
    {"bleed", "bled"},      {"blow", "blew"},         {"break", "broke"},      {"breed", "bred"},
    {"bring", "brought"},   {"broadcast", "broadcast"}, {"build", "built"},    {"burn", "burnt"},
    {"burst", "burst"},     {"buy", "bought"},        {"cast", "cast"},        {"catch", "caught"},
    {"choose", "chose"},    {"cling", "clung"},       {"come", "came"},        {"cost", "cost"},
    {"creep", "crept"},     {"cut", "cut"},           {"deal", "dealt"},       {"dig", "dug"},
    {"dive", "dove"},       {"do", "did"},            {"draw", "drew"},        {"dream", "dreamt"},
    {"drink", "drank"},     {"drive", "drove"},       {"eat", "ate"},          {"fall", "fell"},
    {"feed", "fed"},        {"feel", "felt"},         {"fight", "fought"},     {"find", "found"},
    {"flee", "fled"},       {"fling", "flung"},       {"fly", "flew"},         {"forbid", "forbade"},
    {"forecast", "forecast"}, {"forget", "forgot"},   {"forgive", "forgave"},  {"forsake", "forsook"},
    {"freeze", "froze"},    {"get", "got"},           {"give", "gave"},        {"go", "went"},
    {"grind", "ground"},    {"grow", "grew"},         {"hang", "hung"},        {"have", "had"},
    {"hear", "heard"},      {"hide", "hid"},          {"hit", "hit"},          {"hold", "held"},
    {"hurt", "hurt"},       {"keep", "kept"},         {"kneel", "knelt"},      {"know", "knew"},
    {"lay", "laid"},        {"lead", "led"},          {"lean", "leant"},       {"leap", "leapt"},
    {"learn", "learnt"},    {"leave", "left"},        {"lend", "lent"},        {"let", "let"},
    {"lie", "lay"},         {"light", "lit"},         {"lose", "lost"},        {"make", "made"},
    {"mean", "meant"},      {"meet", "met"},          {"mislead", "misled"},   {"mistake", "mistook"},
    {"misunderstand", "misunderstood"}, {"overcome", "overcame"}, {"overhear", "overheard"},
    {"overtake", "overtook"}, {"overthrow", "overthrew"}, {"pay", "paid"},      {"prove", "proved"},
    {"put", "put"},         {"quit", "quit"},         {"read", "read"},        {"rebuild", "rebuilt"},
    {"redo", "redid"},      {"repay", "repaid"},      {"rethink", "rethought"}, {"rewrite", "rewrote"},
    {"rid", "rid"},         {"ride", "rode"},         {"ring", "rang"},        {"rise", "rose"},
    {"run", "ran"},         {"say", "said"},          {"see", "saw"},          {"seek", "sought"},
    {"sell", "sold"},       {"send", "sent"},         {"set", "set"},          {"sew", "sewed"},
    {"shake", "shook"},     {"shed", "shed"},         {"shine", "shone"},      {"shoot", "shot"},
    {"show", "showed"},     {"shrink", "shrank"},     {"shut", "shut"},        {"sing", "sang"},
    {"sink", "sank"},       {"sit", "sat"},           {"slay", "slew"},        {"sleep", "slept"},
    {"slide", "slid"},      {"sling", "slung"},       {"slit", "slit"},        {"smell", "smelt"},
    {"speak", "spoke"},     {"speed", "sped"},        {"spell", "spelt"},      {"spend", "spent"},
    {"spill", "spilt"},     {"spin", "spun"},         {"spit", "spat"},        {"split", "split"},
    {"spoil", "spoilt"},    {"spread", "spread"},     {"spring", "sprang"},    {"stand", "stood"},
    {"steal", "stole"},     {"stick", "stuck"},       {"sting", "stung"},      {"stink", "stank"},
    {"stride", "strode"},   {"strike", "struck"},     {"string", "strung"},    {"strive", "strove"},
    {"swear", "swore"},     {"sweep", "swept"},       {"swell", "swelled"},    {"swim", "swam"},
    {"swing", "swung"},     {"take", "took"},         {"teach", "taught"},     {"tear", "tore"},
    {"tell", "told"},       {"think", "thought"},     {"throw", "threw"},      {"thrust", "thrust"},
    {"tread", "trod"},      {"undergo", "underwent"}, {"understand", "understood"},
    {"undertake", "undertook"}, {"undo", "undid"},    {"upset", "upset"},      {"wake", "woke"},
    {"wear", "wore"},       {"weave", "wove"},        {"weep", "wept"},        {"win", "won"},
    {"wind", "wound"},      {"withdraw", "withdrew"}, {"withhold", "withheld"}, {"withstand", "withstood"},
    {"wring", "wrung"},     {"write", "wrote"},       {"can", "could"},        {"will", "would"},
    {"shall", "should"},    {"may", "might"},         {"befall", "befell"},    {"behold", "beheld"},
    {"beset", "beset"},     {"foresee", "foresaw"},  {"inlay", "inlaid"},
    {"input", "input"},     {"mislay", "mislaid"},    {"outdo", "outdid"},     {"outgrow", "outgrew"},
    {"outrun", "outran"},   {"oversee", "oversaw"},   {"oversleep", "overslept"}, {"partake", "partook"},
    {"uphold", "upheld"},   {"babysit", "babysat"},
};

// Multi-syllable verbs with final stress double their last consonant.
constexpr const char* kDoubleFinal[] = {
    "admit", "commit", "compel", "concur", "confer", "control", "deter", "equip", "excel",
    "expel", "incur", "occur", "omit", "patrol", "permit", "prefer", "propel", "rebel",
    "recur", "refer", "regret", "repel", "submit", "transfer", "transmit",
};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

int vowel_groups(std::string_view w) {
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return groups;
}

bool doubles_final(std::string_view w) {
  for (const char* d : kDoubleFinal)
    if (w == d) return true;
  if (w.size() < 3 || vowel_groups(w) != 1) return false;
  char c3 = w[w.size() - 1], c2 = w[w.size() - 2], c1 = w[w.size() - 3];
  if (is_vowel(c3) || c3 == 'w' || c3 == 'x' || c3 == 'y') return false;
  return is_vowel(c2) && !is_vowel(c1);
}

std::string regular_past(const std::string& w) {
  if (w.empty()) return w;
  if (w.back() == 'e') return w + "d";
  if (w.size() >= 2 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) return w.substr(0, w.size() - 1) + "ied";
  if (doubles_final(w)) return w + w.back() + "ed";
  return w + "ed";
}

std::string regular_third(const std::string& w) {
  if (w.empty()) return w;
  auto ends = [&](std::string_view s) { return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0; };
  if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) return w + "es";
  if (w.size() >= 2 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) return w.substr(0, w.size() - 1) + "ies";
  if (w.size() >= 2 && w.back() == 'o' && !is_vowel(w[w.size() - 2])) return w + "es";
  return w + "s";
}

}  // namespace

Conjugator::Conjugator() {
  for (const auto& [base, past] : kIrregularPast) irregular_past_.emplace(base, past);
  irregular_third_ = {{"be", "is"}, {"have", "has"}, {"do", "does"}, {"go", "goes"},
                      {"can", "can"}, {"will", "will"}, {"shall", "shall"}, {"may", "may"},
                      {"must", "must"}, {"might", "might"}, {"could", "could"}, {"would", "would"},
                      {"should", "should"}};
}

const Conjugator& Conjugator::instance() {
  static const Conjugator conj;
  return conj;
}

std::string Conjugator::inflect(std::string_view lemma, Inflection target) const {
  const std::string w = to_lower(lemma);
  switch (target) {
    case Inflection::base:
      return w;
    case Inflection::past:
      if (auto it = irregular_past_.find(w); it != irregular_past_.end()) return it->second;
      return regular_past(w);
    case Inflection::third_singular:
      if (auto it = irregular_third_.find(w); it != irregular_third_.end()) return it->second;
      return regular_third(w);
  }
  return w;
}

}  // namespace whymine
