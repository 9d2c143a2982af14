#pragma once

#include "corrmap/tensor/tensor.hpp"

// Differentiable op library. Shapes are checked eagerly; every op records a
// backward closure over its parents. Heavy kernels go through corrmap::kern
// with deterministic multithreading (contiguous row blocks).

namespace corrmap::ops {

// ---- elementwise / linear algebra ----
Tensor add(const Tensor& a, const Tensor& b);              // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);              // hadamard
Tensor scale(const Tensor& a, float s);
Tensor add_bias(const Tensor& x, const Tensor& b);         // x[...,N] + b[N]
Tensor matmul(const Tensor& a, const Tensor& b);           // [M,K]x[K,N]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor transpose2d(const Tensor& x);                       // [M,N] -> [N,M]

// ---- shape plumbing ----
Tensor reshape(const Tensor& x, std::vector<int> shape);   // copying
Tensor slice_rows(const Tensor& x, int r0, int r1);        // [M,N] rows
Tensor slice_cols(const Tensor& x, int c0, int c1);        // [M,N] cols
Tensor concat_rows(const Tensor& a, const Tensor& b);      // [Ma+Mb, N]
Tensor concat_ch(const Tensor& a, const Tensor& b);        // [Ca+Cb,H,W]

// ---- attention plumbing ----
Tensor split_heads(const Tensor& x, int heads);            // [N,D]->[H,N,D/H]
Tensor merge_heads(const Tensor& x);                       // [H,N,dh]->[N,D]
Tensor bmm(const Tensor& a, const Tensor& b);              // [B,M,K]x[B,K,N]
Tensor bmm_bt(const Tensor& a, const Tensor& bt);          // [B,M,K]x[B,N,K]^T

// ---- nonlinearities / norms ----
Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);                              // erf form
Tensor sigmoid(const Tensor& x);
Tensor softmax_lastdim(const Tensor& x);
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 float eps = 1e-5f);

// ---- image-shaped ops (channel-major [C,H,W]) ----
// 'same' convolution, stride 1, odd kernel (1 or 3 used here).
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor upsample2x_bilinear(const Tensor& x);
// [3,H,W] -> [N, 3*P*P] rows over patches in raster order.
Tensor patchify(const Tensor& img, int patch);
// tokens [G*G, D] -> grid [D, G, G].
Tensor tokens_to_grid(const Tensor& tokens, int g);
// Learned positional table [(G0*G0+1), D] resampled to [(G*G+1), D];
// row 0 (readout slot) passes through, the grid part is bilinear.
Tensor resample_pos_table(const Tensor& pos, int g0, int g);

// ---- reductions / scalar assembly ----
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
// Scalar dot with a constant probe vector (gradient-check helper).
Tensor weighted_sum(const Tensor& x, std::vector<float> weights);
// y = sum_i w[i] * terms[i]; all terms scalar.
Tensor affine_combine(const std::vector<Tensor>& terms,
                      const std::vector<float>& weights);

// Multithreaded gemm helpers shared with the loss module.
void gemm_mt(const float* a, const float* b, float* c, int m, int n, int k,
             bool acc);
void gemm_bt_mt(const float* a, const float* bt, float* c, int m, int n, int k,
                bool acc);
void gemm_at_mt(const float* at, const float* b, float* c, int m, int n, int k,
                bool acc);

}  // namespace corrmap::ops
