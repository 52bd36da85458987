#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "whymine/dataset.h"
#include "whymine/models.h"
#include "whymine/optim.h"

namespace whymine::nn {

enum class Precision { high, fast };

const char* to_string(Precision p);
Precision parse_precision(const std::string& s);
kernels::Backend backend_for(Precision p);

struct TrainConfig {
  OptimizerConfig optimizer;
  double dropout = 0.2;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  Precision precision = Precision::high;
  double clip_norm = 5.0;
  double init_scale = 0.1;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::optional<double> train_loss;  // absent for the pre-training evaluation
  double valid_ppl = 0.0;
  double valid_acc = 0.0;
};

std::string to_json_line(const EpochMetrics& m);

struct TrainResult {
  std::vector<EpochMetrics> log;  // first entry is epoch `start_epoch` (before any update)
  Parameters best_params;
  std::size_t best_epoch = 0;
  double best_valid_ppl = 0.0;
};

struct TrainHooks {
  std::size_t start_epoch = 0;          // for resumed runs
  std::function<void(const EpochMetrics&)> on_epoch;
};

// Minibatch training with a seeded per-epoch shuffle. The model is updated
// in place and ends at its final-epoch parameters; the best-validation
// parameters are returned. Bitwise deterministic for a given seed.
TrainResult train(SequenceModel& model, const DatasetSplit& data, const TrainConfig& cfg, Optimizer& optimizer,
                  const TrainHooks& hooks = {});

TrainResult train(SequenceModel& model, const DatasetSplit& data, const TrainConfig& cfg);

}  // namespace whymine::nn
