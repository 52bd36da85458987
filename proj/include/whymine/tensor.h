#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace whymine::nn {

// Row-major dense matrix of doubles; vectors are rows x 1.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::size_t size() const { return data.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Tensor&) const = default;
};

// Named tensors in insertion order. Names are unique.
class Parameters {
 public:
  Tensor& add(std::string name, std::size_t rows, std::size_t cols);
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t tensor_count() const { return entries_.size(); }
  std::size_t scalar_count() const;
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  Parameters zeros_like() const;
  void fill(double value);
  void scale(double factor);
  bool all_finite() const;
  double squared_norm() const;
  // Seeded uniform(-scale, scale) initialization in name order.
  void init_uniform(double scale, std::uint64_t seed);

  bool operator==(const Parameters&) const = default;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace whymine::nn
