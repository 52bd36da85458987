#include <cstddef>

#include <omp.h>

#include "whymine/kernels.h"

namespace whymine::kernels::parallel {

namespace {
// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kMinWork = 1 << 14;
}

void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kMinWork)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const double* row = w.data() + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[static_cast<std::size_t>(r)] = acc;
  }
}

void matvec_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                  std::span<double> dx) {
  // Threads own contiguous column blocks and sweep rows in ascending order,
  // so each dx[c] sees the same sequence of additions as the serial loop.
#pragma omp parallel if (rows * cols >= kMinWork)
  {
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t lo = cols * t / nt, hi = cols * (t + 1) / nt;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = w.data() + r * cols;
      const double g = dy[r];
      for (std::size_t c = lo; c < hi; ++c) dx[c] += row[c] * g;
    }
  }
}

void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kMinWork)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double* row = dw.data() + static_cast<std::size_t>(r) * cols;
    const double g = dy[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < cols; ++c) row[c] += g * x[c];
  }
}

}  // namespace whymine::kernels::parallel
