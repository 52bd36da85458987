#include <cmath>
#include <random>

#include "doctest.h"
#include "whymine/error.h"
#include "grad_check.h"
#include "whymine/models.h"
#include "whymine/optim.h"

using namespace whymine;
using namespace whymine::nn;

namespace {

ModelConfig tiny(ModelKind kind, std::size_t layers = 1, bool shared = false) {
  return {kind, 7, 4, 5, layers, shared};
}

std::vector<Example> tiny_batch() {
  return {{{5, 6, 4}, {6, 5, kEos}, 0, 0}, {{6}, {5, kPad, kEos}, 1, 0}, {{4, 4, 5, 6}, {kEos}, 2, 0}};
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("parameter layout") {
  Seq2SeqModel s2s(tiny(ModelKind::seq2seq, 2));
  CHECK(s2s.params().contains("enc.embed"));
  CHECK(s2s.params().contains("dec.embed"));
  CHECK(s2s.params().contains("enc.lstm.1.w"));
  CHECK(s2s.params().at("dec.lstm.0.w").rows == 20);
  CHECK(s2s.params().at("dec.lstm.0.w").cols == 9);
  CHECK(s2s.params().at("dec.lstm.1.w").cols == 10);
  CHECK(s2s.params().at("out.w").rows == 7);
  Seq2SeqModel shared(tiny(ModelKind::seq2seq, 1, true));
  CHECK_FALSE(shared.params().contains("dec.embed"));
  LanguageModel lm(tiny(ModelKind::lm));
  CHECK(lm.params().tensor_count() == 5);
}

TEST_CASE("zero parameters give uniform distributions") {
  LanguageModel lm(ModelConfig::lm_defaults(100));
  std::vector<int> ids = {2, 10, 20, 30, 40};
  auto r = lm.forward(ids);
  REQUIRE(r.distributions.size() == 4);
  for (const auto& d : r.distributions)
    for (double p : d) CHECK(p == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(r.log_likelihood == doctest::Approx(-4.0 * std::log(100.0)).epsilon(1e-12));

  Seq2SeqModel s2s(ModelConfig::seq2seq_defaults(50));
  std::vector<int> src = {5, 6, 7}, tgt = {8, 9, kEos};
  auto q = s2s.forward(src, tgt);
  CHECK(q.log_likelihood == doctest::Approx(-3.0 * std::log(50.0)).epsilon(1e-12));
}

TEST_CASE("language model is causal") {
  LanguageModel lm(tiny(ModelKind::lm));
  lm.params().init_uniform(0.5, 3);
  std::vector<int> a = {2, 5, 6, 4}, b = {2, 5, 6, 1};
  auto ra = lm.forward(a), rb = lm.forward(b);
  REQUIRE(ra.distributions.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) CHECK(ra.distributions[t] == rb.distributions[t]);
  for (const auto& d : ra.distributions) CHECK(sum(d) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(lm.forward(std::vector<int>{2}), Error);
}

TEST_CASE("seq2seq decoder conditions on the source") {
  Seq2SeqModel s2s(tiny(ModelKind::seq2seq));
  s2s.params().init_uniform(0.5, 4);
  std::vector<int> tgt = {5, kEos};
  auto a = s2s.forward(std::vector<int>{5, 6}, tgt);
  auto b = s2s.forward(std::vector<int>{6, 5}, tgt);
  CHECK(a.distributions[0] != b.distributions[0]);
  for (const auto& d : a.distributions) CHECK(sum(d) == doctest::Approx(1.0).epsilon(1e-6));
  // Decoding API agrees with the teacher-forced forward pass.
  auto st = s2s.start(std::vector<int>{5, 6});
  for (std::size_t k = 0; k < 7; ++k) CHECK(std::exp(st.log_probs[k]) == doctest::Approx(a.distributions[0][k]).epsilon(1e-12));
  auto st2 = s2s.advance(st, 5);
  for (std::size_t k = 0; k < 7; ++k) CHECK(std::exp(st2.log_probs[k]) == doctest::Approx(a.distributions[1][k]).epsilon(1e-12));
}

TEST_CASE("out-of-vocabulary ids are rejected") {
  LanguageModel lm(tiny(ModelKind::lm));
  try {
    lm.forward(std::vector<int>{2, 7});
    FAIL("expected out_of_vocab_id");
  } catch (const Error& e) {
    CHECK(e.code() == "out_of_vocab_id");
  }
  Seq2SeqModel s2s(tiny(ModelKind::seq2seq));
  CHECK_THROWS_AS(s2s.forward(std::vector<int>{-1}, std::vector<int>{3}), Error);
}

TEST_CASE("analytic gradients match central differences") {
  auto batch = tiny_batch();
  struct Case {
    const char* name;
    ModelConfig cfg;
  } cases[] = {
      {"lm", tiny(ModelKind::lm)},
      {"lm 2 layers", tiny(ModelKind::lm, 2)},
      {"seq2seq", tiny(ModelKind::seq2seq)},
      {"seq2seq 2 layers", tiny(ModelKind::seq2seq, 2)},
      {"seq2seq shared embeddings", tiny(ModelKind::seq2seq, 1, true)},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    auto model = make_model(c.cfg);
    model->params().init_uniform(0.5, 11);
    auto r = testing::grad_check(*model, batch);
    INFO(r.worst);
    CHECK(r.checked == model->params().scalar_count());
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradients stay exact with replayed dropout masks") {
  auto model = make_model(tiny(ModelKind::seq2seq));
  model->params().init_uniform(0.5, 12);
  auto r = testing::grad_check(*model, tiny_batch(), 1e-5, 0.3, 99);
  INFO(r.worst);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("parallel backend produces the same gradients") {
  auto model = make_model(tiny(ModelKind::seq2seq, 2));
  model->params().init_uniform(0.3, 5);
  auto batch = tiny_batch();
  Parameters g1, g2;
  auto a = loss_and_grads(*model, batch, g1);
  model->set_backend(kernels::Backend::parallel);
  auto b = loss_and_grads(*model, batch, g2);
  CHECK(a.mean_nll == b.mean_nll);
  CHECK(g1 == g2);
}

TEST_CASE("padding contributes nothing") {
  auto model = make_model(tiny(ModelKind::seq2seq));
  model->params().init_uniform(0.5, 6);
  std::vector<Example> pads = {{{5, 6}, {kPad, kPad}, 0, 0}};
  Parameters g;
  auto r = loss_and_grads(*model, pads, g);
  CHECK(r.tokens == 0);
  CHECK(r.total_nll == 0.0);
  CHECK(g.squared_norm() == 0.0);
}

TEST_CASE("mean loss is invariant to duplicating an example") {
  auto model = make_model(tiny(ModelKind::lm));
  model->params().init_uniform(0.5, 7);
  std::vector<Example> one = {tiny_batch()[0]};
  std::vector<Example> two = {one[0], one[0]};
  Parameters g1, g2;
  auto a = loss_and_grads(*model, one, g1);
  auto b = loss_and_grads(*model, two, g2);
  CHECK(a.mean_nll == doctest::Approx(b.mean_nll).epsilon(1e-14));
  for (const auto& [name, t] : g1)
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t.data[i] == doctest::Approx(g2.at(name).data[i]).epsilon(1e-12));
}

TEST_CASE("non-finite loss raises numeric_failure with the batch id") {
  auto model = make_model(tiny(ModelKind::seq2seq));
  model->params().at("out.b").data[3] = std::nan("");
  Parameters g;
  try {
    loss_and_grads(*model, tiny_batch(), g, {}, 4, 17);
    FAIL("expected numeric_failure");
  } catch (const NumericFailure& e) {
    CHECK(e.code() == "numeric_failure");
    CHECK(e.batch() == 17);
    CHECK(e.epoch() == 4);
    CHECK(e.exit_code() == ExitCode::numeric);
  }
}

TEST_CASE("dropout only acts with a generator") {
  auto model = make_model(tiny(ModelKind::seq2seq));
  model->params().init_uniform(0.5, 8);
  auto batch = tiny_batch();
  Parameters g;
  auto plain = loss_and_grads(*model, batch, g).mean_nll;
  CHECK(loss_and_grads(*model, batch, g, Dropout{0.5, nullptr}).mean_nll == plain);
  std::mt19937_64 rng(1);
  CHECK(loss_and_grads(*model, batch, g, Dropout{0.5, &rng}).mean_nll != plain);
}

TEST_CASE("a memorized bigram reaches near-zero loss") {
  LanguageModel lm(tiny(ModelKind::lm));
  lm.params().init_uniform(0.1, 9);
  std::vector<Example> data = {{{5}, {6}, 0, 0}};
  OptimizerConfig oc;
  oc.lr = 0.5;
  Optimizer opt(oc, lm.params());
  Parameters g;
  for (int step = 0; step < 300; ++step) {
    loss_and_grads(lm, data, g);
    opt.step(lm.params(), g);
  }
  auto r = lm.forward(std::vector<int>{kBos, 5, 6});
  CHECK(-r.log_likelihood < 0.01);
  CHECK(r.distributions[1][6] > 0.99);
}

TEST_CASE("evaluate sums per-example losses in order") {
  auto model = make_model(tiny(ModelKind::seq2seq));
  model->params().init_uniform(0.5, 10);
  auto batch = tiny_batch();
  auto r = evaluate(*model, batch);
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : batch) {
    auto one = model->accumulate(ex, nullptr, {});
    total += one.total_nll;
    tokens += one.tokens;
  }
  CHECK(r.total_nll == total);
  CHECK(r.tokens == tokens);
  CHECK(r.tokens == 6);
}

}
