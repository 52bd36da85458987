#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "metric_oracles.h"
#include "whymine/error.h"
#include "whymine/metrics.h"
#include "whymine/stemmer.h"

using namespace whymine;
using namespace whymine::metrics;

namespace {

EvalPair pair_of(const std::string& hyp, const std::string& ref) { return {tokenize(hyp), tokenize(ref)}; }

// Every one-to-one alignment of equal keys; returns the best (matches, -chunks).
std::pair<std::size_t, std::size_t> brute_alignment(const Tokens& hyp, const Tokens& ref) {
  std::size_t best_m = 0, best_c = 0;
  std::vector<int> map(hyp.size(), -1);
  std::vector<bool> used(ref.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == hyp.size()) {
      std::size_t m = 0;
      for (int r : map) m += r >= 0;
      const std::size_t c = count_chunks(map);
      if (m > best_m || (m == best_m && c < best_c)) {
        best_m = m;
        best_c = c;
      }
      return;
    }
    map[i] = -1;
    rec(i + 1);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (used[j] || ref[j] != hyp[i]) continue;
      used[j] = true;
      map[i] = static_cast<int>(j);
      rec(i + 1);
      map[i] = -1;
      used[j] = false;
    }
  };
  rec(0);
  return {best_m, best_c};
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("bleu hand-counted fixture") {
  std::vector<EvalPair> pairs = {pair_of("the cat sat on the mat", "the cat is on the mat")};
  auto r = corpus_bleu(pairs);
  REQUIRE(r.precisions.size() == 4);
  CHECK(r.precisions[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(r.precisions[1] == doctest::Approx(3.0 / 5.0).epsilon(1e-12));
  CHECK(r.precisions[2] == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
  CHECK(r.precisions[3] == 0.0);
  CHECK(r.score == 0.0);
  CHECK(r.brevity_penalty == 1.0);

  auto s = corpus_bleu(pairs, 4, true);
  const double expected = std::exp((std::log(5.0 / 6.0) + std::log(0.6) + std::log(0.25) + std::log(1e-9)) / 4.0);
  CHECK(std::abs(s.score - expected) < 1e-12);
  CHECK(s.score > 0.0);

  auto three = corpus_bleu(pairs, 3);
  CHECK(three.score == doctest::Approx(std::cbrt(5.0 / 6.0 * 0.6 * 0.25)).epsilon(1e-12));
}

TEST_CASE("bleu brevity penalty and clipping") {
  std::vector<EvalPair> pairs = {pair_of("the the the", "the cat is on the mat")};
  auto r = corpus_bleu(pairs, 1);
  CHECK(r.precisions[0] == doctest::Approx(2.0 / 3.0));
  CHECK(r.brevity_penalty == doctest::Approx(std::exp(1.0 - 6.0 / 3.0)));
  CHECK(r.score == doctest::Approx(std::exp(-1.0) * 2.0 / 3.0));
}

TEST_CASE("bleu identity, empty hypothesis and case folding") {
  std::vector<EvalPair> same = {pair_of("A b c d e", "a B c d e"), pair_of("x y z w", "x y z w")};
  CHECK(corpus_bleu(same).score == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<EvalPair> empty = {pair_of("", "a b c")};
  auto r = corpus_bleu(empty);
  CHECK(r.score == 0.0);
  CHECK(r.warning);
  CHECK(corpus_bleu(std::vector<EvalPair>{}).warning);
}

TEST_CASE("bleu sums counts over the corpus and is permutation invariant") {
  std::vector<EvalPair> pairs = {pair_of("a b c d", "a b c d"), pair_of("e f", "e g")};
  auto r = corpus_bleu(pairs, 2);
  CHECK(r.precisions[0] == doctest::Approx(5.0 / 6.0));
  CHECK(r.precisions[1] == doctest::Approx(3.0 / 4.0));
  std::mt19937_64 rng(3);
  std::vector<EvalPair> corpus;
  for (int i = 0; i < 30; ++i) corpus.emplace_back(testing::random_tokens(rng, 8, 3), testing::random_tokens(rng, 8, 3));
  const auto base = corpus_bleu(corpus, 2);
  const auto rouge = rouge_l(corpus);
  const auto met = meteor_lite(corpus);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(corpus.begin(), corpus.end(), rng);
    CHECK(corpus_bleu(corpus, 2).score == base.score);
    CHECK(rouge_l(corpus) == doctest::Approx(rouge).epsilon(1e-12));
    CHECK(meteor_lite(corpus) == doctest::Approx(met).epsilon(1e-12));
  }
}

TEST_CASE("rouge-l fixtures") {
  CHECK(lcs_length(tokenize("a b c d"), tokenize("a c d b")) == 3);
  CHECK(rouge_l_f1(tokenize("a b c d"), tokenize("a c d b")) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rouge_l_f1(tokenize("a b"), tokenize("a b")) == 1.0);
  CHECK(rouge_l_f1(tokenize("a b"), tokenize("c d")) == 0.0);
  CHECK(rouge_l_f1({}, tokenize("c d")) == 0.0);
  std::vector<EvalPair> pairs = {pair_of("a b c d", "a c d b"), pair_of("x", "x")};
  CHECK(rouge_l(pairs) == doctest::Approx(0.875));
}

TEST_CASE("lcs dynamic program matches exhaustive enumeration") {
  std::mt19937_64 rng(11);
  int cases = 0;
  for (; cases < 3000; ++cases) {
    auto a = testing::random_tokens(rng, 7, 1 + cases % 4);
    auto b = testing::random_tokens(rng, 7, 1 + cases % 4);
    CAPTURE(cases);
    REQUIRE(lcs_length(a, b) == testing::brute_lcs(a, b));
  }
  CHECK(cases >= 1000);
}

TEST_CASE("meteor fixtures") {
  auto id = meteor_sentence(tokenize("the sky is"), tokenize("the sky is"));
  CHECK(id.matches == 3);
  CHECK(id.chunks == 1);
  CHECK(id.score == doctest::Approx(0.981481).epsilon(1e-6));
  CHECK(std::abs(id.score - (1.0 - 0.5 / 27.0)) < 1e-12);

  auto stem = meteor_sentence(tokenize("cats"), tokenize("cat"));
  CHECK(stem.matches == 1);
  CHECK(stem.score == doctest::Approx(0.5));

  auto none = meteor_sentence(tokenize("a b"), tokenize("c d"));
  CHECK(none.matches == 0);
  CHECK(none.score == 0.0);

  // m = 2 of hyp 3 / ref 4, two chunks.
  auto d = meteor_sentence(tokenize("a x b"), tokenize("a y z b"));
  const double p = 2.0 / 3.0, r = 0.5;
  const double fmean = 10 * p * r / (r + 9 * p);
  CHECK(d.chunks == 2);
  CHECK(d.fmean == doctest::Approx(fmean).epsilon(1e-12));
  CHECK(d.score == doctest::Approx(fmean * (1.0 - 0.5 * std::pow(1.0, 3))).epsilon(1e-12));

  // Reordered: "b a" vs "a b" has m = 2, chunks = 2.
  auto swapped = meteor_sentence(tokenize("b a"), tokenize("a b"));
  CHECK(swapped.chunks == 2);
  CHECK(swapped.score == doctest::Approx(1.0 - 0.5).epsilon(1e-12));
}

TEST_CASE("meteor identity follows the closed form") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto t = testing::random_tokens(rng, 9, 5);
    if (t.empty()) continue;
    const double m = static_cast<double>(t.size());
    CHECK(meteor_sentence(t, t).score == doctest::Approx(1.0 - 0.5 * std::pow(1.0 / m, 3)).epsilon(1e-12));
  }
}

TEST_CASE("alignment is maximal with the fewest chunks") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1500; ++i) {
    auto h = testing::random_tokens(rng, 6, 1 + i % 3);
    auto r = testing::random_tokens(rng, 6, 1 + i % 3);
    auto oracle = brute_alignment(h, r);
    auto got = align_min_chunks(h, r, std::vector<int>(h.size(), -1));
    CAPTURE(i);
    REQUIRE(got.matches == oracle.first);
    REQUIRE(got.chunks == oracle.second);
    REQUIRE(count_chunks(got.hyp_to_ref) == got.chunks);
  }
}

TEST_CASE("porter stemmer") {
  const std::map<std::string, std::string> cases = {
      {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},          {"caress", "caress"},
      {"cats", "cat"},        {"feed", "feed"},         {"agreed", "agre"},      {"plastered", "plaster"},
      {"motoring", "motor"},  {"sing", "sing"},         {"conflated", "conflat"}, {"troubled", "troubl"},
      {"sized", "size"},      {"hopping", "hop"},       {"tanned", "tan"},       {"falling", "fall"},
      {"hissing", "hiss"},    {"fizzed", "fizz"},       {"failing", "fail"},     {"filing", "file"},
      {"happy", "happi"},     {"sky", "sky"},           {"relational", "relat"}, {"conditional", "condit"},
      {"rational", "ration"}, {"digitizer", "digit"},   {"operator", "oper"},    {"feudalism", "feudal"},
      {"hopefulness", "hope"}, {"callousness", "callous"}, {"triplicate", "triplic"}, {"formative", "form"},
      {"formalize", "formal"}, {"electrical", "electr"}, {"hopeful", "hope"},    {"goodness", "good"},
      {"revival", "reviv"},   {"allowance", "allow"},   {"inference", "infer"},  {"airliner", "airlin"},
      {"adjustable", "adjust"}, {"defensible", "defens"}, {"irritant", "irrit"}, {"replacement", "replac"},
      {"adjustment", "adjust"}, {"dependent", "depend"}, {"adoption", "adopt"},  {"communism", "commun"},
      {"activate", "activ"},  {"effective", "effect"},  {"bowdlerize", "bowdler"}, {"probate", "probat"},
      {"rate", "rate"},       {"cease", "ceas"},        {"controlling", "control"}, {"roll", "roll"},
      {"generalizations", "gener"}, {"oscillators", "oscil"}, {"a", "a"},      {"is", "is"},
  };
  for (const auto& [word, stem] : cases) {
    CAPTURE(word);
    CHECK(porter_stem(word) == stem);
  }
}

TEST_CASE("per-token accuracy") {
  std::vector<std::vector<double>> perfect = {{0.1, 0.9}, {0.8, 0.2}, {0.5, 0.5}};
  std::vector<int> targets = {1, 0, 0};
  CHECK(per_token_accuracy(perfect, targets, -1) == 1.0);
  std::vector<int> with_pad = {1, kPad, kPad};
  CHECK(per_token_accuracy(perfect, with_pad) == 1.0);
  std::vector<int> short_targets = {1};
  CHECK_THROWS_AS(per_token_accuracy(perfect, short_targets), Error);
  std::vector<int> all_pad = {kPad, kPad, kPad};
  CHECK_THROWS_AS(per_token_accuracy(perfect, all_pad), Error);

  // A near-uniform model over V = 50: argmax is effectively random.
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> jitter(0.0, 1e-6);
  std::uniform_int_distribution<int> target(0, 49);
  std::vector<std::vector<double>> dists(1000, std::vector<double>(50));
  std::vector<int> ts(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    for (auto& p : dists[i]) p = 0.02 + jitter(rng);
    ts[i] = target(rng);
  }
  const double acc = per_token_accuracy(dists, ts, -1);
  CHECK(std::abs(acc - 0.02) <= 0.015);
}

TEST_CASE("perplexity") {
  CHECK(perplexity(0.0, 7) == 1.0);
  CHECK(perplexity(12 * std::log(37.0), 12) == doctest::Approx(37.0).epsilon(1e-12));
  const std::vector<double> probs = {0.5, 0.25, 0.8, 0.1, 0.4};
  double nll = 0.0, product = 1.0;
  for (double p : probs) {
    nll -= std::log(p);
    product *= p;
  }
  CHECK(perplexity(nll, 5) == doctest::Approx(std::pow(product, -1.0 / 5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(perplexity(1.0, 0), Error);
}

TEST_CASE("report json") {
  std::vector<EvalPair> pairs = {pair_of("a b c d", "a b c d")};
  auto rep = evaluate_pairs(pairs);
  CHECK(rep.bleu == doctest::Approx(1.0));
  CHECK(rep.rouge_l_f1 == 1.0);
  CHECK(rep.meteor == doctest::Approx(1.0 - 0.5 / 64.0));
  auto json = to_json(rep);
  CHECK(json.find("\"bleu\"") != std::string::npos);
  CHECK(json.find("\"meteor\"") != std::string::npos);
}

}
