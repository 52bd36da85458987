#include "whymine/models.h"

#include <algorithm>
#include <cmath>

#include "whymine/lstm.h"
#include "whymine/vocab.h"

namespace whymine::nn {

const char* to_string(ModelKind kind) { return kind == ModelKind::lm ? "lm" : "seq2seq"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "lm") return ModelKind::lm;
  if (s == "seq2seq") return ModelKind::seq2seq;
  throw Error("usage", "unknown model kind '" + s + "'", ExitCode::usage);
}

void SequenceModel::check_ids(std::span<const int> ids) const {
  for (int id : ids)
    if (id < 0 || static_cast<std::size_t>(id) >= cfg_.vocab)
      throw Error("out_of_vocab_id", "token id " + std::to_string(id) + " outside vocabulary of size " +
                                         std::to_string(cfg_.vocab));
}

namespace {

using kernels::Backend;

struct Stack {
  const Tensor* embed = nullptr;
  std::vector<const Tensor*> w, b;
};

struct StackGrad {
  Tensor* embed = nullptr;
  std::vector<Tensor*> w, b;
};

struct State {
  std::vector<std::vector<double>> h, c;
};

struct Trace {
  std::vector<int> ids;
  std::vector<std::vector<double>> emb_mask;
  std::vector<std::vector<LstmCache>> cache;  // [t][layer]
};

std::string layer_name(const std::string& prefix, std::size_t l, const char* what) {
  return prefix + "lstm." + std::to_string(l) + "." + what;
}

void add_stack(Parameters& p, const ModelConfig& cfg, const std::string& embed, const std::string& prefix) {
  if (!p.contains(embed)) p.add(embed, cfg.vocab, cfg.embed_dim);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::size_t in = l == 0 ? cfg.embed_dim : cfg.hidden_dim;
    p.add(layer_name(prefix, l, "w"), 4 * cfg.hidden_dim, in + cfg.hidden_dim);
    p.add(layer_name(prefix, l, "b"), 4 * cfg.hidden_dim, 1);
  }
}

Stack stack_view(const Parameters& p, const std::string& embed, const std::string& prefix, std::size_t layers) {
  Stack s;
  s.embed = &p.at(embed);
  for (std::size_t l = 0; l < layers; ++l) {
    s.w.push_back(&p.at(layer_name(prefix, l, "w")));
    s.b.push_back(&p.at(layer_name(prefix, l, "b")));
  }
  return s;
}

StackGrad stack_grad(Parameters& p, const std::string& embed, const std::string& prefix, std::size_t layers) {
  StackGrad s;
  s.embed = &p.at(embed);
  for (std::size_t l = 0; l < layers; ++l) {
    s.w.push_back(&p.at(layer_name(prefix, l, "w")));
    s.b.push_back(&p.at(layer_name(prefix, l, "b")));
  }
  return s;
}

State zero_state(std::size_t layers, std::size_t hidden) {
  return {std::vector<std::vector<double>>(layers, std::vector<double>(hidden, 0.0)),
          std::vector<std::vector<double>>(layers, std::vector<double>(hidden, 0.0))};
}

std::vector<double> dropout_mask(std::size_t n, const Dropout& d) {
  std::vector<double> mask(n);
  const double keep = 1.0 / (1.0 - d.rate);
  for (auto& m : mask) m = (static_cast<double>((*d.rng)() >> 11) * 0x1.0p-53) < d.rate ? 0.0 : keep;
  return mask;
}

// Runs the stack over `ids` starting from `state`; returns the final state.
State run_stack(const Stack& s, std::span<const int> ids, State state, const Dropout& dropout, Trace* trace,
                Backend be) {
  const std::size_t layers = s.w.size();
  LstmCache scratch;
  if (trace) {
    trace->ids.assign(ids.begin(), ids.end());
    trace->cache.assign(ids.size(), std::vector<LstmCache>(layers));
    trace->emb_mask.assign(ids.size(), {});
  }
  for (std::size_t t = 0; t < ids.size(); ++t) {
    auto row = s.embed->row(static_cast<std::size_t>(ids[t]));
    std::vector<double> x(row.begin(), row.end());
    if (dropout.active()) {
      auto mask = dropout_mask(x.size(), dropout);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] *= mask[k];
      if (trace) trace->emb_mask[t] = std::move(mask);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      LstmCache& cache = trace ? trace->cache[t][l] : scratch;
      lstm_step(*s.w[l], *s.b[l], x, state.h[l], state.c[l], cache, be);
      state.h[l] = cache.h;
      state.c[l] = cache.c;
      x = cache.h;
    }
  }
  return state;
}

// Backpropagation through time. `dtop[t]` is dL/d(top h at step t); returns
// dL/d(initial state).
State backprop_stack(const Stack& s, const Trace& tr, const std::vector<std::vector<double>>& dtop, State dfinal,
                     StackGrad& g, Backend be) {
  const std::size_t layers = s.w.size();
  auto dh = std::move(dfinal.h);
  auto dc = std::move(dfinal.c);
  for (std::size_t t = tr.cache.size(); t-- > 0;) {
    std::vector<double> from_above = dtop[t];
    for (std::size_t l = layers; l-- > 0;) {
      const auto& cache = tr.cache[t][l];
      const std::size_t hidden = cache.h.size();
      std::vector<double> dh_total(hidden);
      for (std::size_t k = 0; k < hidden; ++k) dh_total[k] = dh[l][k] + from_above[k];
      std::vector<double> dx(cache.input.size() - hidden), dh_prev(hidden), dc_prev(hidden);
      lstm_step_backward(*s.w[l], cache, dh_total, dc[l], *g.w[l], *g.b[l], dx, dh_prev, dc_prev, be);
      dh[l] = std::move(dh_prev);
      dc[l] = std::move(dc_prev);
      from_above = std::move(dx);
    }
    if (!tr.emb_mask[t].empty())
      for (std::size_t k = 0; k < from_above.size(); ++k) from_above[k] *= tr.emb_mask[t][k];
    auto row = g.embed->row(static_cast<std::size_t>(tr.ids[t]));
    for (std::size_t k = 0; k < from_above.size(); ++k) row[k] += from_above[k];
  }
  return {std::move(dh), std::move(dc)};
}

void head_log_probs(const Tensor& w, const Tensor& b, std::span<const double> h, std::vector<double>& logp,
                    Backend be) {
  std::vector<double> logits(w.rows);
  kernels::matvec(be, w.data, w.rows, w.cols, h, logits);
  for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += b.data[k];
  logp.resize(w.rows);
  kernels::log_softmax(logits, logp);
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

// Scores the top-layer outputs of `tr` against `targets` and, if `grads`,
// accumulates the projection gradients and fills dtop.
LossResult score_outputs(const Parameters& p, const Trace& tr, std::span<const int> targets, Parameters* grads,
                         const Dropout& dropout, std::vector<std::vector<double>>& dtop, Backend be) {
  const Tensor& w = p.at("out.w");
  const Tensor& b = p.at("out.b");
  LossResult r;
  std::vector<double> logp;
  dtop.assign(targets.size(), std::vector<double>(w.cols, 0.0));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const int y = targets[t];
    if (y == kPad) continue;
    std::vector<double> h = tr.cache[t].back().h;
    std::vector<double> mask;
    if (dropout.active()) {
      mask = dropout_mask(h.size(), dropout);
      for (std::size_t k = 0; k < h.size(); ++k) h[k] *= mask[k];
    }
    head_log_probs(w, b, h, logp, be);
    r.total_nll -= logp[static_cast<std::size_t>(y)];
    ++r.tokens;
    if (argmax_lowest(logp) == static_cast<std::size_t>(y)) ++r.correct;
    if (!grads) continue;
    std::vector<double> dlogits(logp.size());
    for (std::size_t k = 0; k < logp.size(); ++k) dlogits[k] = std::exp(logp[k]);
    dlogits[static_cast<std::size_t>(y)] -= 1.0;
    Tensor& gw = grads->at("out.w");
    Tensor& gb = grads->at("out.b");
    kernels::outer_acc(be, gw.data, gw.rows, gw.cols, dlogits, h);
    for (std::size_t k = 0; k < dlogits.size(); ++k) gb.data[k] += dlogits[k];
    kernels::matvec_t_acc(be, w.data, w.rows, w.cols, dlogits, dtop[t]);
    if (!mask.empty())
      for (std::size_t k = 0; k < mask.size(); ++k) dtop[t][k] *= mask[k];
  }
  return r;
}

void add_head(Parameters& p, const ModelConfig& cfg) {
  p.add("out.w", cfg.vocab, cfg.hidden_dim);
  p.add("out.b", cfg.vocab, 1);
}

DecoderState feed(const Parameters& p, const Stack& s, DecoderState st, int token, Backend be) {
  State state{std::move(st.h), std::move(st.c)};
  const int ids[1] = {token};
  state = run_stack(s, ids, std::move(state), {}, nullptr, be);
  st.h = std::move(state.h);
  st.c = std::move(state.c);
  head_log_probs(p.at("out.w"), p.at("out.b"), st.h.back(), st.log_probs, be);
  return st;
}

std::vector<std::vector<double>> to_distributions(const Parameters& p, const Trace& tr, Backend be) {
  std::vector<std::vector<double>> out;
  std::vector<double> logp;
  for (const auto& step : tr.cache) {
    head_log_probs(p.at("out.w"), p.at("out.b"), step.back().h, logp, be);
    std::vector<double> probs(logp.size());
    for (std::size_t k = 0; k < logp.size(); ++k) probs[k] = std::exp(logp[k]);
    out.push_back(std::move(probs));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- LanguageModel

LanguageModel::LanguageModel(ModelConfig cfg) : SequenceModel(cfg) {
  cfg_.kind = ModelKind::lm;
  add_stack(params_, cfg_, "embed", "");
  add_head(params_, cfg_);
}

ForwardResult LanguageModel::forward(std::span<const int> ids) const {
  if (ids.size() < 2) throw Error("too_short", "language model forward needs at least two tokens");
  check_ids(ids);
  const auto stack = stack_view(params_, "embed", "", cfg_.layers);
  Trace tr;
  run_stack(stack, ids.first(ids.size() - 1), zero_state(cfg_.layers, cfg_.hidden_dim), {}, &tr, backend_);
  ForwardResult r;
  r.distributions = to_distributions(params_, tr, backend_);
  for (std::size_t t = 0; t < r.distributions.size(); ++t)
    r.log_likelihood += std::log(r.distributions[t][static_cast<std::size_t>(ids[t + 1])]);
  return r;
}

LossResult LanguageModel::accumulate(const Example& ex, Parameters* grads, const Dropout& dropout) const {
  std::vector<int> seq;
  seq.reserve(ex.source.size() + ex.target.size() + 1);
  seq.push_back(kBos);
  seq.insert(seq.end(), ex.source.begin(), ex.source.end());
  seq.insert(seq.end(), ex.target.begin(), ex.target.end());
  check_ids(seq);
  if (seq.size() < 2) return {};

  const auto stack = stack_view(params_, "embed", "", cfg_.layers);
  const std::span<const int> all(seq);
  Trace tr;
  run_stack(stack, all.first(seq.size() - 1), zero_state(cfg_.layers, cfg_.hidden_dim), dropout, &tr, backend_);
  std::vector<std::vector<double>> dtop;
  auto r = score_outputs(params_, tr, all.subspan(1), grads, dropout, dtop, backend_);
  if (grads) {
    auto g = stack_grad(*grads, "embed", "", cfg_.layers);
    backprop_stack(stack, tr, dtop, zero_state(cfg_.layers, cfg_.hidden_dim), g, backend_);
  }
  return r;
}

DecoderState LanguageModel::start(std::span<const int> source) const {
  check_ids(source);
  const auto stack = stack_view(params_, "embed", "", cfg_.layers);
  auto zero = zero_state(cfg_.layers, cfg_.hidden_dim);
  DecoderState st{std::move(zero.h), std::move(zero.c), {}, {}};
  st = feed(params_, stack, std::move(st), kBos, backend_);
  for (int id : source) st = feed(params_, stack, std::move(st), id, backend_);
  return st;
}

DecoderState LanguageModel::advance(const DecoderState& state, int token) const {
  const auto stack = stack_view(params_, "embed", "", cfg_.layers);
  auto next = feed(params_, stack, state, token, backend_);
  next.prefix.push_back(token);
  return next;
}

// ----------------------------------------------------------------- Seq2SeqModel

namespace {
const char* decoder_embed(const ModelConfig& cfg) { return cfg.shared_embeddings ? "enc.embed" : "dec.embed"; }
}  // namespace

Seq2SeqModel::Seq2SeqModel(ModelConfig cfg) : SequenceModel(cfg) {
  cfg_.kind = ModelKind::seq2seq;
  add_stack(params_, cfg_, "enc.embed", "enc.");
  add_stack(params_, cfg_, decoder_embed(cfg_), "dec.");
  add_head(params_, cfg_);
}

ForwardResult Seq2SeqModel::forward(std::span<const int> source, std::span<const int> target) const {
  check_ids(source);
  check_ids(target);
  const auto enc = stack_view(params_, "enc.embed", "enc.", cfg_.layers);
  const auto dec = stack_view(params_, decoder_embed(cfg_), "dec.", cfg_.layers);
  auto state = run_stack(enc, source, zero_state(cfg_.layers, cfg_.hidden_dim), {}, nullptr, backend_);
  std::vector<int> inputs{kBos};
  if (!target.empty()) inputs.insert(inputs.end(), target.begin(), target.end() - 1);
  Trace tr;
  run_stack(dec, std::span<const int>(inputs).first(target.size()), std::move(state), {}, &tr, backend_);
  ForwardResult r;
  r.distributions = to_distributions(params_, tr, backend_);
  for (std::size_t t = 0; t < target.size(); ++t)
    r.log_likelihood += std::log(r.distributions[t][static_cast<std::size_t>(target[t])]);
  return r;
}

LossResult Seq2SeqModel::accumulate(const Example& ex, Parameters* grads, const Dropout& dropout) const {
  check_ids(ex.source);
  check_ids(ex.target);
  if (ex.target.empty()) return {};
  const auto enc = stack_view(params_, "enc.embed", "enc.", cfg_.layers);
  const auto dec = stack_view(params_, decoder_embed(cfg_), "dec.", cfg_.layers);

  Trace enc_tr;
  auto state = run_stack(enc, ex.source, zero_state(cfg_.layers, cfg_.hidden_dim), dropout, &enc_tr, backend_);
  std::vector<int> inputs{kBos};
  inputs.insert(inputs.end(), ex.target.begin(), ex.target.end() - 1);
  Trace dec_tr;
  run_stack(dec, inputs, std::move(state), dropout, &dec_tr, backend_);

  std::vector<std::vector<double>> dtop;
  auto r = score_outputs(params_, dec_tr, ex.target, grads, dropout, dtop, backend_);
  if (grads) {
    auto gdec = stack_grad(*grads, decoder_embed(cfg_), "dec.", cfg_.layers);
    auto dstate = backprop_stack(dec, dec_tr, dtop, zero_state(cfg_.layers, cfg_.hidden_dim), gdec, backend_);
    auto genc = stack_grad(*grads, "enc.embed", "enc.", cfg_.layers);
    std::vector<std::vector<double>> no_top(ex.source.size(), std::vector<double>(cfg_.hidden_dim, 0.0));
    backprop_stack(enc, enc_tr, no_top, std::move(dstate), genc, backend_);
  }
  return r;
}

DecoderState Seq2SeqModel::start(std::span<const int> source) const {
  check_ids(source);
  const auto enc = stack_view(params_, "enc.embed", "enc.", cfg_.layers);
  const auto dec = stack_view(params_, decoder_embed(cfg_), "dec.", cfg_.layers);
  auto state = run_stack(enc, source, zero_state(cfg_.layers, cfg_.hidden_dim), {}, nullptr, backend_);
  DecoderState st{std::move(state.h), std::move(state.c), {}, {}};
  return feed(params_, dec, std::move(st), kBos, backend_);
}

DecoderState Seq2SeqModel::advance(const DecoderState& state, int token) const {
  const auto dec = stack_view(params_, decoder_embed(cfg_), "dec.", cfg_.layers);
  auto next = feed(params_, dec, state, token, backend_);
  next.prefix.push_back(token);
  return next;
}

// ------------------------------------------------------------------- free functions

std::unique_ptr<SequenceModel> make_model(const ModelConfig& cfg) {
  if (cfg.kind == ModelKind::lm) return std::make_unique<LanguageModel>(cfg);
  return std::make_unique<Seq2SeqModel>(cfg);
}

LossResult loss_and_grads(const SequenceModel& model, std::span<const Example> batch, Parameters& grads,
                          const Dropout& dropout, std::size_t epoch, std::size_t batch_id) {
  if (batch.empty()) throw Error("empty_batch", "loss_and_grads needs a non-empty batch");
  grads = model.params().zeros_like();
  LossResult total;
  for (const auto& ex : batch) {
    auto r = model.accumulate(ex, &grads, dropout);
    total.total_nll += r.total_nll;
    total.tokens += r.tokens;
    total.correct += r.correct;
  }
  if (!std::isfinite(total.total_nll)) throw NumericFailure(epoch, batch_id);
  if (total.tokens > 0) {
    total.mean_nll = total.total_nll / static_cast<double>(total.tokens);
    grads.scale(1.0 / static_cast<double>(total.tokens));
  }
  return total;
}

LossResult evaluate(const SequenceModel& model, std::span<const Example> examples) {
  std::vector<LossResult> parts(examples.size());
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    parts[static_cast<std::size_t>(i)] = model.accumulate(examples[static_cast<std::size_t>(i)], nullptr, {});
  LossResult total;
  for (const auto& r : parts) {
    total.total_nll += r.total_nll;
    total.tokens += r.tokens;
    total.correct += r.correct;
  }
  if (total.tokens > 0) total.mean_nll = total.total_nll / static_cast<double>(total.tokens);
  return total;
}

}  // namespace whymine::nn
