#include "whymine/lstm.h"

#include <cmath>

namespace whymine::nn {

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

void lstm_step(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev, LstmCache& cache, kernels::Backend backend) {
  const std::size_t hidden = h_prev.size();
  cache.input.assign(x.begin(), x.end());
  cache.input.insert(cache.input.end(), h_prev.begin(), h_prev.end());

  std::vector<double> z(4 * hidden);
  kernels::matvec(backend, w.data, w.rows, w.cols, cache.input, z);

  cache.i.resize(hidden);
  cache.f.resize(hidden);
  cache.g.resize(hidden);
  cache.o.resize(hidden);
  cache.c.resize(hidden);
  cache.tanh_c.resize(hidden);
  cache.h.resize(hidden);
  cache.c_prev.assign(c_prev.begin(), c_prev.end());
  for (std::size_t k = 0; k < hidden; ++k) {
    cache.i[k] = sigmoid(z[k] + b.data[k]);
    cache.f[k] = sigmoid(z[hidden + k] + b.data[hidden + k]);
    cache.g[k] = std::tanh(z[2 * hidden + k] + b.data[2 * hidden + k]);
    cache.o[k] = sigmoid(z[3 * hidden + k] + b.data[3 * hidden + k]);
    cache.c[k] = cache.f[k] * c_prev[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = cache.o[k] * cache.tanh_c[k];
  }
}

void lstm_step_backward(const Tensor& w, const LstmCache& cache, std::span<const double> dh,
                        std::span<const double> dc, Tensor& dw, Tensor& db, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev, kernels::Backend backend) {
  const std::size_t hidden = cache.h.size();
  const std::size_t in = cache.input.size() - hidden;
  std::vector<double> dz(4 * hidden);
  for (std::size_t k = 0; k < hidden; ++k) {
    const double i = cache.i[k], f = cache.f[k], g = cache.g[k], o = cache.o[k], tc = cache.tanh_c[k];
    const double dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
    dz[k] = dct * g * i * (1.0 - i);
    dz[hidden + k] = dct * cache.c_prev[k] * f * (1.0 - f);
    dz[2 * hidden + k] = dct * i * (1.0 - g * g);
    dz[3 * hidden + k] = dh[k] * tc * o * (1.0 - o);
    dc_prev[k] = dct * f;
  }
  kernels::outer_acc(backend, dw.data, dw.rows, dw.cols, dz, cache.input);
  for (std::size_t k = 0; k < 4 * hidden; ++k) db.data[k] += dz[k];

  std::vector<double> dinput(in + hidden, 0.0);
  kernels::matvec_t_acc(backend, w.data, w.rows, w.cols, dz, dinput);
  for (std::size_t k = 0; k < in; ++k) dx[k] = dinput[k];
  for (std::size_t k = 0; k < hidden; ++k) dh_prev[k] = dinput[in + k];
}

}  // namespace whymine::nn
