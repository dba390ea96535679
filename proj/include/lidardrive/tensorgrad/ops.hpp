#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lidardrive/tensorgrad/tape.hpp"

namespace lidardrive::tensorgrad {

struct Conv2dParams {
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t dilation_h = 1, dilation_w = 1;
  std::size_t pad_h = 0, pad_w = 0;

  static Conv2dParams same(std::size_t kernel, std::size_t dilation = 1) {
    const std::size_t pad = dilation * (kernel - 1) / 2;
    return {1, 1, dilation, dilation, pad, pad};
  }
};

/// floor((n + 2 pad - dilation (k - 1) - 1) / stride) + 1; throws ShapeError
/// when the result is not positive.
std::size_t conv_output_size(std::size_t n, std::size_t k, std::size_t stride,
                             std::size_t dilation, std::size_t pad);

/// Cross-correlation of a C x H x W input with a Co x C x kh x kw kernel.
/// `bias` (Co) may be an invalid Var.
Var conv2d(Tape& t, Var input, Var kernel, Var bias, const Conv2dParams& p);

/// Non-zero entries of a constant C x H x W input.
struct SparseEntry {
  std::uint32_t channel = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

struct SparseInput {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<SparseEntry> entries;

  Tensor to_dense() const;
};

/// conv2d over a constant sparse input: same result as conv2d on
/// input.to_dense(), at a cost proportional to the number of entries.
/// Gradients flow to kernel and bias only.
Var sparse_conv2d(Tape& t, const SparseInput& input, Var kernel, Var bias, const Conv2dParams& p);

enum class PoolKind { kMax, kAvg };

/// Sliding-window pooling over each channel of a C x H x W tensor. Max
/// pooling routes the gradient to the first maximal element in scan order.
Var pool2d(Tape& t, Var input, PoolKind kind, std::size_t window_h, std::size_t window_w,
           std::size_t stride_h, std::size_t stride_w);

/// 1x1 convolution: C x H x W with a C' x C kernel (and optional C' bias).
Var pointwise_conv(Tape& t, Var input, Var kernel, Var bias = {});

/// Per-channel mean of C x H x W, returning shape [C].
Var global_avg_pool(Tape& t, Var input);

/// weight (m x n) * input (n) + bias (m); bias may be invalid.
Var dense(Tape& t, Var input, Var weight, Var bias = {});

/// Per-channel zero-mean, unit-variance normalization of C x H x W.
Var channel_standardize(Tape& t, Var input, double eps = 1e-5);

/// Concatenation along the leading dimension; trailing dims must agree.
Var concat(Tape& t, const std::vector<Var>& parts);

Var relu(Tape& t, Var x);
Var tanh(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);

Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
/// scale * x + shift, elementwise.
Var affine(Tape& t, Var x, double scale, double shift = 0.0);
/// Sum of all elements, shape [1].
Var sum(Tape& t, Var x);
/// Elements [begin, begin + len) of a flattened tensor, shape [len].
Var slice(Tape& t, Var x, std::size_t begin, std::size_t len);

/// Mean absolute error over all elements, shape [1].
Var l1_loss(Tape& t, Var pred, Var target);

/// Standard GRU weights: gates z (update), r (reset) and the candidate n.
/// W_* are hidden x input, U_* hidden x hidden, b_* hidden.
struct GruParams {
  Var w_z, u_z, b_z;
  Var w_r, u_r, b_r;
  Var w_n, u_n, b_n;
};

/// z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r),
/// n = tanh(W_n x + U_n (r * h) + b_n), h' = (1 - z) * n + z * h.
Var gru_cell(Tape& t, Var x, Var h, const GruParams& p);

}  // namespace lidardrive::tensorgrad
