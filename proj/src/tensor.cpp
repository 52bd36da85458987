#include "whymine/tensor.h"

#include <cmath>
#include <random>

#include "whymine/error.h"

namespace whymine::nn {

Tensor& Parameters::add(std::string name, std::size_t rows, std::size_t cols) {
  if (contains(name)) throw Error("duplicate_parameter", "parameter '" + name + "' already exists");
  entries_.emplace_back(std::move(name), Tensor(rows, cols));
  return entries_.back().second;
}

Tensor& Parameters::at(std::string_view name) {
  for (auto& [n, t] : entries_)
    if (n == name) return t;
  throw Error("missing_parameter", "no parameter named '" + std::string(name) + "'");
}

const Tensor& Parameters::at(std::string_view name) const {
  return const_cast<Parameters*>(this)->at(name);
}

bool Parameters::contains(std::string_view name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return true;
  return false;
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

Parameters Parameters::zeros_like() const {
  Parameters out;
  for (const auto& [name, t] : entries_) out.add(name, t.rows, t.cols);
  return out;
}

void Parameters::fill(double value) {
  for (auto& [name, t] : entries_) std::fill(t.data.begin(), t.data.end(), value);
}

void Parameters::scale(double factor) {
  for (auto& [name, t] : entries_)
    for (auto& v : t.data) v *= factor;
}

bool Parameters::all_finite() const {
  for (const auto& [name, t] : entries_)
    for (double v : t.data)
      if (!std::isfinite(v)) return false;
  return true;
}

double Parameters::squared_norm() const {
  double s = 0.0;
  for (const auto& [name, t] : entries_)
    for (double v : t.data) s += v * v;
  return s;
}

void Parameters::init_uniform(double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& [name, t] : entries_)
    for (auto& v : t.data) v = scale * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
}

}  // namespace whymine::nn
