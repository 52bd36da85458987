#include <chrono>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include <omp.h>

#include "whymine/kernels.h"

namespace k = whymine::kernels;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, std::size_t rows, std::size_t cols, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-13s %5zu x %-5zu serial %9.4f ms  parallel %9.4f ms  speedup %5.2fx  identical %s\n", name, rows,
              cols, serial_ms, parallel_ms, serial_ms / parallel_ms, same ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 50;
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // Shapes of LSTM gate blocks (4H x (E+H)) and output layers (V x H).
  const std::size_t shapes[][2] = {{512, 192}, {1024, 512}, {5000, 128}, {20000, 256}};
  for (const auto& s : shapes) {
    const std::size_t rows = s[0], cols = s[1];
    std::vector<double> w(rows * cols), x(cols), dy(rows);
    for (auto& v : w) v = u(rng);
    for (auto& v : x) v = u(rng);
    for (auto& v : dy) v = u(rng);

    std::vector<double> ys(rows), yp(rows);
    double ts = time_ms([&] { k::serial::matvec(w, rows, cols, x, ys); }, reps);
    double tp = time_ms([&] { k::parallel::matvec(w, rows, cols, x, yp); }, reps);
    report("matvec", rows, cols, ts, tp, ys == yp);

    std::vector<double> dxs(cols, 0.0), dxp(cols, 0.0);
    ts = time_ms([&] { k::serial::matvec_t_acc(w, rows, cols, dy, dxs); }, reps);
    tp = time_ms([&] { k::parallel::matvec_t_acc(w, rows, cols, dy, dxp); }, reps);
    report("matvec_t_acc", rows, cols, ts, tp, dxs == dxp);

    std::vector<double> dws(rows * cols, 0.0), dwp(rows * cols, 0.0);
    ts = time_ms([&] { k::serial::outer_acc(dws, rows, cols, dy, x); }, reps);
    tp = time_ms([&] { k::parallel::outer_acc(dwp, rows, cols, dy, x); }, reps);
    report("outer_acc", rows, cols, ts, tp, dws == dwp);
  }
  return 0;
}
