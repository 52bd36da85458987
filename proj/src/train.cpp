#include "whymine/train.h"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "whymine/error.h"

namespace whymine::nn {

const char* to_string(Precision p) { return p == Precision::high ? "high" : "fast"; }

Precision parse_precision(const std::string& s) {
  if (s == "high") return Precision::high;
  if (s == "fast") return Precision::fast;
  throw Error("usage", "unknown precision '" + s + "'", ExitCode::usage);
}

kernels::Backend backend_for(Precision p) {
  return p == Precision::high ? kernels::Backend::serial : kernels::Backend::parallel;
}

std::string to_json_line(const EpochMetrics& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss ? nlohmann::ordered_json(*m.train_loss) : nlohmann::ordered_json(nullptr);
  j["valid_ppl"] = m.valid_ppl;
  j["valid_acc"] = m.valid_acc;
  return j.dump();
}

namespace {

EpochMetrics validate(const SequenceModel& model, const DatasetSplit& data, std::size_t epoch) {
  EpochMetrics m;
  m.epoch = epoch;
  auto r = evaluate(model, data.valid);
  if (r.tokens == 0) throw Error("empty_valid", "validation split has no scorable tokens");
  m.valid_ppl = std::exp(r.mean_nll);
  m.valid_acc = static_cast<double>(r.correct) / static_cast<double>(r.tokens);
  return m;
}

}  // namespace

TrainResult train(SequenceModel& model, const DatasetSplit& data, const TrainConfig& cfg, Optimizer& optimizer,
                  const TrainHooks& hooks) {
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw Error("usage", "dropout must be in [0, 1)", ExitCode::usage);
  if (cfg.batch_size == 0) throw Error("usage", "batch_size must be positive", ExitCode::usage);
  if (data.train.empty()) throw Error("empty_train", "training split is empty");
  model.set_backend(backend_for(cfg.precision));

  TrainResult result;
  auto initial = validate(model, data, hooks.start_epoch);
  result.log.push_back(initial);
  if (hooks.on_epoch) hooks.on_epoch(initial);
  result.best_params = model.params();
  result.best_epoch = hooks.start_epoch;
  result.best_valid_ppl = initial.valid_ppl;

  Parameters grads;
  std::vector<std::size_t> order(data.train.size());
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    const std::size_t epoch = hooks.start_epoch + e;
    order = shuffled_indices(data.train.size(), cfg.seed + 7919 * epoch);
    std::mt19937_64 dropout_rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * epoch));
    Dropout dropout{cfg.dropout, &dropout_rng};

    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    std::vector<Example> batch;
    std::size_t batch_id = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_id) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + cfg.batch_size); ++k)
        batch.push_back(data.train[order[k]]);
      auto r = loss_and_grads(model, batch, grads, dropout, epoch, batch_id);
      if (r.tokens == 0) continue;
      clip_grad_norm(grads, cfg.clip_norm);
      optimizer.step(model.params(), grads);
      if (!model.params().all_finite()) throw NumericFailure(epoch, batch_id);
      loss_sum += r.total_nll;
      token_sum += r.tokens;
    }

    auto m = validate(model, data, epoch);
    m.train_loss = token_sum ? loss_sum / static_cast<double>(token_sum) : 0.0;
    result.log.push_back(m);
    if (hooks.on_epoch) hooks.on_epoch(m);
    if (m.valid_ppl < result.best_valid_ppl) {
      result.best_valid_ppl = m.valid_ppl;
      result.best_epoch = epoch;
      result.best_params = model.params();
    }
  }
  return result;
}

TrainResult train(SequenceModel& model, const DatasetSplit& data, const TrainConfig& cfg) {
  Optimizer optimizer(cfg.optimizer, model.params());
  return train(model, data, cfg, optimizer);
}

}  // namespace whymine::nn
