#pragma once

#include <cstddef>
#include <string>

#include "whymine/tensor.h"

namespace whymine::nn {

enum class OptimizerKind { adagrad, noam_adam };

const char* to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adagrad;
  double lr = 0.1;             // adagrad step size
  double weight_decay = 1e-6;
  double adagrad_eps = 1e-10;
  // Noam: lr(step) = factor * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5)
  std::size_t d_model = 128;
  std::size_t warmup_steps = 400;
  double noam_factor = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
};

double noam_rate(std::size_t step, std::size_t d_model, std::size_t warmup, double factor = 1.0);

// AdaGrad: acc += g^2; p -= lr * g / (sqrt(acc) + eps) + lr * wd * p.
// Noam-Adam: Adam with bias correction, L2 weight decay folded into the
// gradient and the Noam learning-rate schedule.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, const Parameters& like);

  void step(Parameters& params, const Parameters& grads);
  std::size_t steps() const { return step_; }
  double current_lr() const;
  const OptimizerConfig& config() const { return cfg_; }

  // Slot tensors prefixed "opt.first." / "opt.second." plus the step count,
  // for checkpointing.
  Parameters state() const;
  void load_state(const Parameters& state);

 private:
  OptimizerConfig cfg_;
  Parameters first_;   // adam m
  Parameters second_;  // adagrad accumulator / adam v
  std::size_t step_ = 0;
};

// Scales grads so their global L2 norm is at most max_norm (0 disables).
// Returns the norm before clipping.
double clip_grad_norm(Parameters& grads, double max_norm);

}  // namespace whymine::nn
