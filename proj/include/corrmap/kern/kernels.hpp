#pragma once

#include <cstdint>

// Data-parallel inner-loop kernels. Every entry has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant selected once at startup
// based on cpuid. The two lanes are equivalence-tested against each other;
// within one process the selected lane never changes, so results are
// reproducible run to run on the same machine.
//
// Matrix arguments are dense row-major float32.

namespace corrmap::kern {

struct KernelTable {
  const char* name;

  // c[m,n] = (acc ? c : 0) + a[m,k] * b[k,n]
  void (*gemm)(const float* a, const float* b, float* c, int m, int n, int k,
               bool acc);
  // b supplied transposed: bt has shape [n,k]; c[m,n] += a[m,k] * bt^T
  void (*gemm_bt)(const float* a, const float* bt, float* c, int m, int n,
                  int k, bool acc);
  // a supplied transposed: at has shape [k,m]; c[m,n] += at^T * b[k,n]
  void (*gemm_at)(const float* at, const float* b, float* c, int m, int n,
                  int k, bool acc);

  void (*add)(float* dst, const float* src, int64_t n);        // dst += src
  void (*axpy)(float* dst, float alpha, const float* src, int64_t n);
  void (*scale)(float* dst, float alpha, int64_t n);
  void (*hadamard)(float* dst, const float* src, int64_t n);   // dst *= src
  float (*dot)(const float* a, const float* b, int64_t n);
  double (*sum)(const float* a, int64_t n);

  void (*exp_vec)(const float* x, float* y, int64_t n);
  void (*sigmoid_vec)(const float* x, float* y, int64_t n);
  // y = softmax(x) over one row of length n (max-shifted, numerically stable)
  void (*softmax_row)(const float* x, float* y, int n);
  void (*relu_fwd)(const float* x, float* y, int64_t n);
  // gx += gy where x > 0
  void (*relu_bwd)(const float* x, const float* gy, float* gx, int64_t n);
};

// Active table, chosen once: AVX2 when the CPU supports AVX2+FMA, otherwise
// scalar. Overridable with CORRMAP_KERNELS=scalar|avx2 (forcing avx2 on an
// unsupported CPU falls back to scalar).
const KernelTable& kernels();

const KernelTable& scalar_kernels();
// Null when this build carries no AVX2 translation unit or the CPU lacks it.
const KernelTable* avx2_kernels();

bool cpu_has_avx2_fma();

}  // namespace corrmap::kern
