#include "whymine/optim.h"

#include <algorithm>
#include <cmath>

#include "whymine/error.h"

namespace whymine::nn {

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::adagrad ? "adagrad" : "noam_adam"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adagrad") return OptimizerKind::adagrad;
  if (s == "noam_adam" || s == "noam") return OptimizerKind::noam_adam;
  throw Error("usage", "unknown optimizer '" + s + "'", ExitCode::usage);
}

double noam_rate(std::size_t step, std::size_t d_model, std::size_t warmup, double factor) {
  const double s = static_cast<double>(std::max<std::size_t>(step, 1));
  const double w = static_cast<double>(std::max<std::size_t>(warmup, 1));
  return factor * std::pow(static_cast<double>(d_model), -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

Optimizer::Optimizer(OptimizerConfig cfg, const Parameters& like)
    : cfg_(cfg), first_(like.zeros_like()), second_(like.zeros_like()) {
  if (cfg_.kind == OptimizerKind::adagrad && !(cfg_.lr > 0.0))
    throw Error("usage", "learning rate must be positive", ExitCode::usage);
}

double Optimizer::current_lr() const {
  if (cfg_.kind == OptimizerKind::adagrad) return cfg_.lr;
  return noam_rate(step_ == 0 ? 1 : step_, cfg_.d_model, cfg_.warmup_steps, cfg_.noam_factor);
}

void Optimizer::step(Parameters& params, const Parameters& grads) {
  ++step_;
  auto g_it = grads.begin();
  auto m_it = first_.begin();
  auto v_it = second_.begin();
  if (cfg_.kind == OptimizerKind::adagrad) {
    const double lr = cfg_.lr;
    for (auto& [name, p] : params) {
      const auto& g = g_it->second.data;
      auto& acc = v_it->second.data;
      for (std::size_t k = 0; k < p.data.size(); ++k) {
        acc[k] += g[k] * g[k];
        p.data[k] -= lr * g[k] / (std::sqrt(acc[k]) + cfg_.adagrad_eps) + lr * cfg_.weight_decay * p.data[k];
      }
      ++g_it;
      ++v_it;
    }
    return;
  }
  const double lr = noam_rate(step_, cfg_.d_model, cfg_.warmup_steps, cfg_.noam_factor);
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (auto& [name, p] : params) {
    const auto& g = g_it->second.data;
    auto& m = m_it->second.data;
    auto& v = v_it->second.data;
    for (std::size_t k = 0; k < p.data.size(); ++k) {
      const double gk = g[k] + cfg_.weight_decay * p.data[k];
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gk;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gk * gk;
      p.data[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.adam_eps);
    }
    ++g_it;
    ++m_it;
    ++v_it;
  }
}

Parameters Optimizer::state() const {
  Parameters out;
  for (const auto& [name, t] : first_) out.add("opt.first." + name, t.rows, t.cols) = t;
  for (const auto& [name, t] : second_) out.add("opt.second." + name, t.rows, t.cols) = t;
  out.add("opt.step", 1, 1).data[0] = static_cast<double>(step_);
  return out;
}

void Optimizer::load_state(const Parameters& state) {
  for (auto& [name, t] : first_) t = state.at("opt.first." + name);
  for (auto& [name, t] : second_) t = state.at("opt.second." + name);
  step_ = static_cast<std::size_t>(state.at("opt.step").data[0]);
}

double clip_grad_norm(Parameters& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace whymine::nn
