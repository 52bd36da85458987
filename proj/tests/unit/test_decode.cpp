#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "decode_oracle.h"
#include "doctest.h"
#include "whymine/error.h"
#include "whymine/decode.h"
#include "whymine/optim.h"

using namespace whymine;
using namespace whymine::nn;

namespace {

// Next-token log-probabilities as an explicit function of the emitted prefix.
class TableModel : public StepModel {
 public:
  using Table = std::function<std::vector<double>(const std::vector<int>&)>;
  TableModel(std::size_t vocab, Table table) : vocab_(vocab), table_(std::move(table)) {}

  std::size_t vocab_size() const override { return vocab_; }
  DecoderState start(std::span<const int>) const override {
    DecoderState st;
    st.log_probs = table_(st.prefix);
    return st;
  }
  DecoderState advance(const DecoderState& state, int token) const override {
    DecoderState st = state;
    st.prefix.push_back(token);
    st.log_probs = table_(st.prefix);
    return st;
  }

 private:
  std::size_t vocab_;
  Table table_;
};

std::vector<double> logs(std::vector<double> p) {
  for (auto& x : p) x = std::log(x);
  return p;
}

}  // namespace

TEST_SUITE("decode") {

TEST_CASE("greedy breaks ties toward the lowest id") {
  TableModel m(10, [](const std::vector<int>&) {
    std::vector<double> p(10, 0.02);
    p[4] = p[9] = 0.42;
    return logs(p);
  });
  DecodeOptions opts;
  opts.max_len = 2;
  auto r = greedy_decode(m, {}, opts);
  CHECK(r.candidates.at(0).tokens == std::vector<int>{4, 4});
  CHECK(r.candidates[0].score == doctest::Approx(2 * std::log(0.42)));
  auto b = beam_decode(m, {}, 1, opts);
  CHECK(b.candidates.at(0).tokens == std::vector<int>{4, 4});
}

TEST_CASE("max_len 1 emits exactly one token") {
  TableModel m(5, [](const std::vector<int>&) { return logs({0.1, 0.1, 0.1, 0.1, 0.6}); });
  DecodeOptions opts;
  opts.max_len = 1;
  CHECK(greedy_decode(m, {}, opts).candidates[0].tokens == std::vector<int>{4});
  auto b = beam_decode(m, {}, 3, opts);
  REQUIRE(b.candidates.size() == 3);
  CHECK(b.candidates[0].tokens == std::vector<int>{4});
  CHECK(b.candidates[1].tokens == std::vector<int>{0});
}

TEST_CASE("greedy stops at EOS") {
  TableModel m(5, [](const std::vector<int>& prefix) {
    if (prefix.size() < 2) return logs({0.1, 0.1, 0.1, 0.1, 0.6});
    return logs({0.1, 0.1, 0.1, 0.6, 0.1});
  });
  auto r = greedy_decode(m, {});
  CHECK(r.candidates[0].tokens == std::vector<int>{4, 4, kEos});
}

TEST_CASE("beam 2 beats greedy on a hand-built table") {
  TableModel m(3, [](const std::vector<int>& prefix) {
    if (prefix.empty()) return logs({0.5, 0.4, 0.1});
    if (prefix.size() == 1) return prefix[0] == 0 ? logs({0.4, 0.3, 0.3}) : logs({0.9, 0.05, 0.05});
    return logs({0.2, 0.7, 0.1});
  });
  DecodeOptions opts;
  opts.max_len = 3;
  opts.eos_id = -1;
  auto oracle = testing::brute_force(m, {}, 3, -1);
  CHECK(oracle.tokens == std::vector<int>{1, 0, 1});
  auto greedy = greedy_decode(m, {}, opts).candidates[0];
  CHECK(greedy.tokens == std::vector<int>{0, 0, 1});
  auto beam = beam_decode(m, {}, 2, opts);
  CHECK(beam.candidates[0].tokens == oracle.tokens);
  CHECK(beam.candidates[0].score == doctest::Approx(oracle.score).epsilon(1e-12));
  CHECK(beam.candidates[0].score > greedy.score);
}

TEST_CASE("beam 1 equals greedy on random models") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    std::uniform_int_distribution<std::size_t> vocab_dist(5, 12);
    const std::size_t v = vocab_dist(rng);
    ModelConfig cfg{trial % 2 ? ModelKind::lm : ModelKind::seq2seq, v, 4, 6, 1 + static_cast<std::size_t>(trial % 3 == 0), false};
    auto model = make_model(cfg);
    model->params().init_uniform(1.0, 1000 + trial);
    std::uniform_int_distribution<int> id(4, static_cast<int>(v) - 1);
    std::vector<int> source(1 + trial % 5);
    for (auto& s : source) s = id(rng);
    DecodeOptions opts;
    opts.max_len = 12;
    auto g = greedy_decode(*model, source, opts);
    auto b = beam_decode(*model, source, 1, opts);
    REQUIRE(b.candidates.size() == 1);
    CHECK(g.candidates[0].tokens == b.candidates[0].tokens);
    CHECK(g.candidates[0].score == b.candidates[0].score);
  }
}

TEST_CASE("full-width beam finds the exhaustive optimum") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    Seq2SeqModel model({ModelKind::seq2seq, 4, 3, 4, 1, false});
    model.params().init_uniform(2.0, seed);
    std::vector<int> source = {static_cast<int>(seed % 4), 2};
    DecodeOptions opts;
    opts.max_len = 3;
    auto oracle = testing::brute_force(model, source, 3, kEos);
    auto beam = beam_decode(model, source, 64, opts);
    CHECK(beam.candidates[0].tokens == oracle.tokens);
    CHECK(beam.candidates[0].score == doctest::Approx(oracle.score).epsilon(1e-12));
  }
}

TEST_CASE("candidates come best first") {
  Seq2SeqModel model({ModelKind::seq2seq, 9, 4, 5, 1, false});
  model.params().init_uniform(1.0, 77);
  std::vector<int> source = {5, 6, 7};
  for (auto norm : {std::optional<double>{}, std::optional<double>{0.7}}) {
    auto r = beam_decode(model, source, 5, {}, norm);
    REQUIRE(r.candidates.size() == 5);
    for (std::size_t i = 1; i < r.candidates.size(); ++i) CHECK(r.candidates[i - 1].score >= r.candidates[i].score);
  }
}

TEST_CASE("length normalization favours longer hypotheses") {
  // EOS right away costs log 0.3; continuing costs log 0.6 then a certain EOS.
  TableModel m(5, [](const std::vector<int>& prefix) {
    if (prefix.empty()) return logs({0.025, 0.025, 0.05, 0.3, 0.6});
    return logs({0.0025, 0.0025, 0.0025, 0.99, 0.0025});
  });
  auto plain = beam_decode(m, {}, 2, {});
  CHECK(plain.candidates[0].tokens == std::vector<int>{4, kEos});
  auto normed = beam_decode(m, {}, 2, {}, 1.0);
  const double two = (std::log(0.6) + std::log(0.99)) / 2.0;
  CHECK(normed.candidates[0].tokens == std::vector<int>{4, kEos});
  CHECK(normed.candidates[0].score == doctest::Approx(two));
  CHECK(normed.candidates[1].score == doctest::Approx(std::log(0.3)));

  TableModel short_wins(5, [](const std::vector<int>& prefix) {
    if (prefix.empty()) return logs({0.05, 0.05, 0.05, 0.45, 0.4});
    return logs({0.05, 0.05, 0.05, 0.8, 0.05});
  });
  CHECK(beam_decode(short_wins, {}, 2, {}).candidates[0].tokens == std::vector<int>{kEos});
  // 0.45 vs sqrt(0.4 * 0.8) = 0.566: normalization flips the ranking.
  CHECK(beam_decode(short_wins, {}, 2, {}, 1.0).candidates[0].tokens == std::vector<int>{4, kEos});
}

TEST_CASE("a memorized pair is reproduced exactly") {
  Seq2SeqModel model({ModelKind::seq2seq, 12, 8, 16, 1, false});
  model.params().init_uniform(0.1, 5);
  std::vector<Example> data = {{{5, 6, 7}, {8, 9, 10, 11, kEos}, 0, 0}};
  OptimizerConfig oc;
  oc.lr = 0.3;
  Optimizer opt(oc, model.params());
  Parameters g;
  for (int step = 0; step < 300; ++step) {
    loss_and_grads(model, data, g);
    opt.step(model.params(), g);
  }
  auto r = greedy_decode(model, data[0].source);
  CHECK(r.candidates[0].tokens == data[0].target);
  CHECK(beam_decode(model, data[0].source, 4).candidates[0].tokens == data[0].target);
}

}
