#include <cmath>
#include <random>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "whymine/error.h"
#include "whymine/kernels.h"

namespace k = whymine::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Restores the OpenMP thread count when leaving scope.
struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("serial kernels match long-hand sums") {
  std::mt19937_64 rng(1);
  const std::size_t rows = 7, cols = 5;
  auto w = random_vec(rows * cols, rng), x = random_vec(cols, rng), dy = random_vec(rows, rng);
  std::vector<double> y(rows);
  k::serial::matvec(w, rows, cols, x, y);
  for (std::size_t r = 0; r < rows; ++r) {
    long double acc = 0;
    for (std::size_t c = 0; c < cols; ++c) acc += static_cast<long double>(w[r * cols + c]) * x[c];
    CHECK(y[r] == doctest::Approx(static_cast<double>(acc)).epsilon(1e-14));
  }
  std::vector<double> dx(cols, 1.0);
  k::serial::matvec_t_acc(w, rows, cols, dy, dx);
  for (std::size_t c = 0; c < cols; ++c) {
    long double acc = 1.0;
    for (std::size_t r = 0; r < rows; ++r) acc += static_cast<long double>(w[r * cols + c]) * dy[r];
    CHECK(dx[c] == doctest::Approx(static_cast<double>(acc)).epsilon(1e-14));
  }
  std::vector<double> dw(rows * cols, 0.5);
  k::serial::outer_acc(dw, rows, cols, dy, x);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) CHECK(dw[r * cols + c] == doctest::Approx(0.5 + dy[r] * x[c]));
}

TEST_CASE("parallel kernels are bitwise identical to the serial reference") {
  std::mt19937_64 rng(2);
  const std::size_t shapes[][2] = {{3, 4}, {64, 32}, {512, 96}, {1000, 33}, {37, 1200}};
  for (int threads : {1, 2, 3, 4}) {
    Threads scope(threads);
    for (const auto& s : shapes) {
      const std::size_t rows = s[0], cols = s[1];
      auto w = random_vec(rows * cols, rng), x = random_vec(cols, rng), dy = random_vec(rows, rng);
      std::vector<double> ys(rows), yp(rows);
      k::serial::matvec(w, rows, cols, x, ys);
      k::parallel::matvec(w, rows, cols, x, yp);
      CHECK(ys == yp);

      auto base = random_vec(cols, rng);
      auto dxs = base, dxp = base;
      k::serial::matvec_t_acc(w, rows, cols, dy, dxs);
      k::parallel::matvec_t_acc(w, rows, cols, dy, dxp);
      CHECK(dxs == dxp);

      auto dws = random_vec(rows * cols, rng);
      auto dwp = dws;
      k::serial::outer_acc(dws, rows, cols, dy, x);
      k::parallel::outer_acc(dwp, rows, cols, dy, x);
      CHECK(dws == dwp);
    }
  }
}

TEST_CASE("backend dispatch") {
  std::mt19937_64 rng(3);
  auto w = random_vec(600 * 40, rng), x = random_vec(40, rng);
  std::vector<double> a(600), b(600);
  k::matvec(k::Backend::serial, w, 600, 40, x, a);
  k::matvec(k::Backend::parallel, w, 600, 40, x, b);
  CHECK(a == b);
  CHECK(std::string(k::to_string(k::Backend::parallel)) == "parallel");
}

TEST_CASE("log_softmax normalizes and is shift invariant") {
  std::vector<double> logits = {1.0, 2.0, 3.0, -1.0}, out(4), shifted_out(4);
  k::log_softmax(logits, out);
  double sum = 0.0;
  for (double v : out) sum += std::exp(v);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> shifted = {1001.0, 1002.0, 1003.0, 999.0};
  k::log_softmax(shifted, shifted_out);
  for (std::size_t i = 0; i < 4; ++i) CHECK(shifted_out[i] == doctest::Approx(out[i]).epsilon(1e-12));
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0) + std::exp(-1.0));
  CHECK(out[2] == doctest::Approx(3.0 - lse).epsilon(1e-14));
  std::vector<double> zeros(10, 0.0), uz(10);
  k::log_softmax(zeros, uz);
  for (double v : uz) CHECK(v == doctest::Approx(-std::log(10.0)).epsilon(1e-15));
}

}
