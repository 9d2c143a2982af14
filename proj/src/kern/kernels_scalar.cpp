#include "corrmap/kern/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

// Reference lane. Plain loops, no blocking; ground truth for the SIMD lane.

namespace corrmap::kern {
namespace {

void gemm_scalar(const float* a, const float* b, float* c, int m, int n, int k,
                 bool acc) {
  for (int i = 0; i < m; ++i) {
    float* ci = c + (int64_t)i * n;
    if (!acc) std::memset(ci, 0, sizeof(float) * n);
    const float* ai = a + (int64_t)i * k;
    for (int l = 0; l < k; ++l) {
      const float av = ai[l];
      if (av == 0.0f) continue;
      const float* bl = b + (int64_t)l * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

void gemm_bt_scalar(const float* a, const float* bt, float* c, int m, int n,
                    int k, bool acc) {
  for (int i = 0; i < m; ++i) {
    const float* ai = a + (int64_t)i * k;
    float* ci = c + (int64_t)i * n;
    for (int j = 0; j < n; ++j) {
      const float* bj = bt + (int64_t)j * k;
      float s = 0.0f;
      for (int l = 0; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = acc ? ci[j] + s : s;
    }
  }
}

void gemm_at_scalar(const float* at, const float* b, float* c, int m, int n,
                    int k, bool acc) {
  if (!acc) std::memset(c, 0, sizeof(float) * (int64_t)m * n);
  for (int l = 0; l < k; ++l) {
    const float* al = at + (int64_t)l * m;
    const float* bl = b + (int64_t)l * n;
    for (int i = 0; i < m; ++i) {
      const float av = al[i];
      if (av == 0.0f) continue;
      float* ci = c + (int64_t)i * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

void add_scalar(float* dst, const float* src, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

void axpy_scalar(float* dst, float alpha, const float* src, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dst[i] += alpha * src[i];
}

void scale_scalar(float* dst, float alpha, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dst[i] *= alpha;
}

void hadamard_scalar(float* dst, const float* src, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dst[i] *= src[i];
}

float dot_scalar(const float* a, const float* b, int64_t n) {
  float s = 0.0f;
  for (int64_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const float* a, int64_t n) {
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void exp_scalar(const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void sigmoid_scalar(const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void softmax_row_scalar(const float* x, float* y, int n) {
  float mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    s += y[i];
  }
  const float inv = (float)(1.0 / s);
  for (int i = 0; i < n; ++i) y[i] *= inv;
}

void relu_fwd_scalar(const float* x, float* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_scalar(const float* x, const float* gy, float* gx, int64_t n) {
  for (int64_t i = 0; i < n; ++i)
    if (x[i] > 0.0f) gx[i] += gy[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable t = {
      "scalar",         gemm_scalar,   gemm_bt_scalar, gemm_at_scalar,
      add_scalar,       axpy_scalar,   scale_scalar,   hadamard_scalar,
      dot_scalar,       sum_scalar,    exp_scalar,     sigmoid_scalar,
      softmax_row_scalar, relu_fwd_scalar, relu_bwd_scalar,
  };
  return t;
}

}  // namespace corrmap::kern
