#include <algorithm>
#include <cmath>

#include "whymine/kernels.h"

namespace whymine::kernels {

const char* to_string(Backend backend) { return backend == Backend::serial ? "serial" : "parallel"; }

namespace serial {

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                  std::span<double> dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dx[c] += row[c] * g;
  }
}

void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = dw.data() + r * cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += g * x[c];
  }
}

}  // namespace serial

void matvec(Backend b, std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
  if (b == Backend::parallel)
    parallel::matvec(w, rows, cols, x, y);
  else
    serial::matvec(w, rows, cols, x, y);
}

void matvec_t_acc(Backend b, std::span<const double> w, std::size_t rows, std::size_t cols,
                  std::span<const double> dy, std::span<double> dx) {
  if (b == Backend::parallel)
    parallel::matvec_t_acc(w, rows, cols, dy, dx);
  else
    serial::matvec_t_acc(w, rows, cols, dy, dx);
}

void outer_acc(Backend b, std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x) {
  if (b == Backend::parallel)
    parallel::outer_acc(dw, rows, cols, dy, x);
  else
    serial::outer_acc(dw, rows, cols, dy, x);
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
  double mx = -INFINITY;
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

}  // namespace whymine::kernels
