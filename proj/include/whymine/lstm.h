#pragma once

#include <span>
#include <vector>

#include "whymine/kernels.h"
#include "whymine/tensor.h"

namespace whymine::nn {

// Activations kept from one LSTM step for backpropagation. Gate order in the
// fused weight matrix is input, forget, cell, output.
struct LstmCache {
  std::vector<double> input;  // [x; h_prev]
  std::vector<double> i, f, g, o;
  std::vector<double> c_prev, c, tanh_c, h;
};

// w: 4H x (in + H), b: 4H x 1
void lstm_step(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev, LstmCache& cache, kernels::Backend backend);

// Given dL/dh and dL/dc at this step, accumulates dw/db and writes dL/dx,
// dL/dh_prev, dL/dc_prev.
void lstm_step_backward(const Tensor& w, const LstmCache& cache, std::span<const double> dh,
                        std::span<const double> dc, Tensor& dw, Tensor& db, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev, kernels::Backend backend);

}  // namespace whymine::nn
