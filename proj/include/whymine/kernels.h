#pragma once

#include <cstddef>
#include <span>

// Dense inner loops of the recurrent models. `serial` is the reference
// implementation; `parallel` splits the same loops across OpenMP threads.
// Each output element is reduced in the same order in both, so their
// results are bitwise identical.
namespace whymine::kernels {

enum class Backend { serial, parallel };

const char* to_string(Backend backend);

namespace serial {
// y = W x, W row-major rows x cols
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);
// dx += W^T dy
void matvec_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                  std::span<double> dx);
// dW += dy x^T
void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x);
}  // namespace serial

namespace parallel {
void matvec(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);
void matvec_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                  std::span<double> dx);
void outer_acc(std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x);
}  // namespace parallel

void matvec(Backend b, std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
            std::span<double> y);
void matvec_t_acc(Backend b, std::span<const double> w, std::size_t rows, std::size_t cols,
                  std::span<const double> dy, std::span<double> dx);
void outer_acc(Backend b, std::span<double> dw, std::size_t rows, std::size_t cols, std::span<const double> dy,
               std::span<const double> x);

// out = logits - logsumexp(logits)
void log_softmax(std::span<const double> logits, std::span<double> out);

}  // namespace whymine::kernels
