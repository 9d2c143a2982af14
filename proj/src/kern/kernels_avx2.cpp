#include "corrmap/kern/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

// AVX2+FMA lane. This TU is compiled with -mavx2 -mfma and must only be
// entered after a cpuid check (see dispatch.cpp).

namespace corrmap::kern {
namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

// Cephes-style expf: range reduction by ln2 then degree-5 polynomial.
// Max observed error vs std::exp is ~2 ulp; the equivalence tests pin it.
inline __m256 exp8(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-87.3365478515625f);
  const __m256 log2e = _mm256_set1_ps(1.44269504088896341f);
  const __m256 ln2_hi = _mm256_set1_ps(0.693359375f);
  const __m256 ln2_lo = _mm256_set1_ps(-2.12194440e-4f);
  const __m256 one = _mm256_set1_ps(1.0f);

  x = _mm256_min_ps(x, hi);
  x = _mm256_max_ps(x, lo);

  __m256 n = _mm256_round_ps(_mm256_mul_ps(x, log2e),
                             _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256 r = _mm256_fnmadd_ps(n, ln2_hi, x);
  r = _mm256_fnmadd_ps(n, ln2_lo, r);

  __m256 p = _mm256_set1_ps(1.9875691500e-4f);
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(1.3981999507e-3f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(8.3334519073e-3f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(4.1665795894e-2f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(1.6666665459e-1f));
  p = _mm256_fmadd_ps(p, r, _mm256_set1_ps(5.0000001201e-1f));
  __m256 r2 = _mm256_mul_ps(r, r);
  p = _mm256_fmadd_ps(p, r2, _mm256_add_ps(r, one));

  __m256i ni = _mm256_cvtps_epi32(n);
  ni = _mm256_add_epi32(ni, _mm256_set1_epi32(127));
  ni = _mm256_slli_epi32(ni, 23);
  return _mm256_mul_ps(p, _mm256_castsi256_ps(ni));
}

void gemm_avx2(const float* a, const float* b, float* c, int m, int n, int k,
               bool acc) {
  constexpr int MR = 4;
  if (!acc) std::memset(c, 0, sizeof(float) * (int64_t)m * n);
  int i = 0;
  for (; i + MR <= m; i += MR) {
    const float* a0 = a + (int64_t)(i + 0) * k;
    const float* a1 = a + (int64_t)(i + 1) * k;
    const float* a2 = a + (int64_t)(i + 2) * k;
    const float* a3 = a + (int64_t)(i + 3) * k;
    float* c0 = c + (int64_t)(i + 0) * n;
    float* c1 = c + (int64_t)(i + 1) * n;
    float* c2 = c + (int64_t)(i + 2) * n;
    float* c3 = c + (int64_t)(i + 3) * n;
    int j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 s00 = _mm256_loadu_ps(c0 + j), s01 = _mm256_loadu_ps(c0 + j + 8);
      __m256 s10 = _mm256_loadu_ps(c1 + j), s11 = _mm256_loadu_ps(c1 + j + 8);
      __m256 s20 = _mm256_loadu_ps(c2 + j), s21 = _mm256_loadu_ps(c2 + j + 8);
      __m256 s30 = _mm256_loadu_ps(c3 + j), s31 = _mm256_loadu_ps(c3 + j + 8);
      for (int l = 0; l < k; ++l) {
        const float* bl = b + (int64_t)l * n + j;
        __m256 b0 = _mm256_loadu_ps(bl);
        __m256 b1 = _mm256_loadu_ps(bl + 8);
        __m256 av;
        av = _mm256_broadcast_ss(a0 + l);
        s00 = _mm256_fmadd_ps(av, b0, s00);
        s01 = _mm256_fmadd_ps(av, b1, s01);
        av = _mm256_broadcast_ss(a1 + l);
        s10 = _mm256_fmadd_ps(av, b0, s10);
        s11 = _mm256_fmadd_ps(av, b1, s11);
        av = _mm256_broadcast_ss(a2 + l);
        s20 = _mm256_fmadd_ps(av, b0, s20);
        s21 = _mm256_fmadd_ps(av, b1, s21);
        av = _mm256_broadcast_ss(a3 + l);
        s30 = _mm256_fmadd_ps(av, b0, s30);
        s31 = _mm256_fmadd_ps(av, b1, s31);
      }
      _mm256_storeu_ps(c0 + j, s00);
      _mm256_storeu_ps(c0 + j + 8, s01);
      _mm256_storeu_ps(c1 + j, s10);
      _mm256_storeu_ps(c1 + j + 8, s11);
      _mm256_storeu_ps(c2 + j, s20);
      _mm256_storeu_ps(c2 + j + 8, s21);
      _mm256_storeu_ps(c3 + j, s30);
      _mm256_storeu_ps(c3 + j + 8, s31);
    }
    for (; j + 8 <= n; j += 8) {
      __m256 s0 = _mm256_loadu_ps(c0 + j);
      __m256 s1 = _mm256_loadu_ps(c1 + j);
      __m256 s2 = _mm256_loadu_ps(c2 + j);
      __m256 s3 = _mm256_loadu_ps(c3 + j);
      for (int l = 0; l < k; ++l) {
        __m256 bv = _mm256_loadu_ps(b + (int64_t)l * n + j);
        s0 = _mm256_fmadd_ps(_mm256_broadcast_ss(a0 + l), bv, s0);
        s1 = _mm256_fmadd_ps(_mm256_broadcast_ss(a1 + l), bv, s1);
        s2 = _mm256_fmadd_ps(_mm256_broadcast_ss(a2 + l), bv, s2);
        s3 = _mm256_fmadd_ps(_mm256_broadcast_ss(a3 + l), bv, s3);
      }
      _mm256_storeu_ps(c0 + j, s0);
      _mm256_storeu_ps(c1 + j, s1);
      _mm256_storeu_ps(c2 + j, s2);
      _mm256_storeu_ps(c3 + j, s3);
    }
    for (; j < n; ++j) {
      float s0 = c0[j], s1 = c1[j], s2 = c2[j], s3 = c3[j];
      for (int l = 0; l < k; ++l) {
        const float bv = b[(int64_t)l * n + j];
        s0 += a0[l] * bv;
        s1 += a1[l] * bv;
        s2 += a2[l] * bv;
        s3 += a3[l] * bv;
      }
      c0[j] = s0;
      c1[j] = s1;
      c2[j] = s2;
      c3[j] = s3;
    }
  }
  for (; i < m; ++i) {
    const float* ai = a + (int64_t)i * k;
    float* ci = c + (int64_t)i * n;
    int j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256 s = _mm256_loadu_ps(ci + j);
      for (int l = 0; l < k; ++l)
        s = _mm256_fmadd_ps(_mm256_broadcast_ss(ai + l),
                            _mm256_loadu_ps(b + (int64_t)l * n + j), s);
      _mm256_storeu_ps(ci + j, s);
    }
    for (; j < n; ++j) {
      float s = ci[j];
      for (int l = 0; l < k; ++l) s += ai[l] * b[(int64_t)l * n + j];
      ci[j] = s;
    }
  }
}

void gemm_bt_avx2(const float* a, const float* bt, float* c, int m, int n,
                  int k, bool acc) {
  for (int i = 0; i < m; ++i) {
    const float* ai = a + (int64_t)i * k;
    float* ci = c + (int64_t)i * n;
    for (int j = 0; j < n; ++j) {
      const float* bj = bt + (int64_t)j * k;
      __m256 s0 = _mm256_setzero_ps();
      __m256 s1 = _mm256_setzero_ps();
      int l = 0;
      for (; l + 16 <= k; l += 16) {
        s0 = _mm256_fmadd_ps(_mm256_loadu_ps(ai + l), _mm256_loadu_ps(bj + l),
                             s0);
        s1 = _mm256_fmadd_ps(_mm256_loadu_ps(ai + l + 8),
                             _mm256_loadu_ps(bj + l + 8), s1);
      }
      for (; l + 8 <= k; l += 8)
        s0 = _mm256_fmadd_ps(_mm256_loadu_ps(ai + l), _mm256_loadu_ps(bj + l),
                             s0);
      float s = hsum8(_mm256_add_ps(s0, s1));
      for (; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = acc ? ci[j] + s : s;
    }
  }
}

void gemm_at_avx2(const float* at, const float* b, float* c, int m, int n,
                  int k, bool acc) {
  if (!acc) std::memset(c, 0, sizeof(float) * (int64_t)m * n);
  for (int l = 0; l < k; ++l) {
    const float* al = at + (int64_t)l * m;
    const float* bl = b + (int64_t)l * n;
    for (int i = 0; i < m; ++i) {
      const float av = al[i];
      if (av == 0.0f) continue;
      float* ci = c + (int64_t)i * n;
      const __m256 avv = _mm256_set1_ps(av);
      int j = 0;
      for (; j + 8 <= n; j += 8)
        _mm256_storeu_ps(
            ci + j,
            _mm256_fmadd_ps(avv, _mm256_loadu_ps(bl + j),
                            _mm256_loadu_ps(ci + j)));
      for (; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

void add_avx2(float* dst, const float* src, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_add_ps(_mm256_loadu_ps(dst + i),
                                            _mm256_loadu_ps(src + i)));
  for (; i < n; ++i) dst[i] += src[i];
}

void axpy_avx2(float* dst, float alpha, const float* src, int64_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(src + i),
                                              _mm256_loadu_ps(dst + i)));
  for (; i < n; ++i) dst[i] += alpha * src[i];
}

void scale_avx2(float* dst, float alpha, int64_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_mul_ps(av, _mm256_loadu_ps(dst + i)));
  for (; i < n; ++i) dst[i] *= alpha;
}

void hadamard_avx2(float* dst, const float* src, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(dst + i, _mm256_mul_ps(_mm256_loadu_ps(dst + i),
                                            _mm256_loadu_ps(src + i)));
  for (; i < n; ++i) dst[i] *= src[i];
}

float dot_avx2(const float* a, const float* b, int64_t n) {
  __m256 s0 = _mm256_setzero_ps();
  __m256 s1 = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s0);
    s1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8),
                         _mm256_loadu_ps(b + i + 8), s1);
  }
  for (; i + 8 <= n; i += 8)
    s0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), s0);
  float s = hsum8(_mm256_add_ps(s0, s1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_avx2(const float* a, int64_t n) {
  // Double accumulators so the reductions feeding loss values stay accurate.
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(a + i);
    s0 = _mm256_add_pd(s0, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
    s1 = _mm256_add_pd(s1, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
  }
  s0 = _mm256_add_pd(s0, s1);
  alignas(32) double tmp[4];
  _mm256_store_pd(tmp, s0);
  double s = tmp[0] + tmp[1] + tmp[2] + tmp[3];
  for (; i < n; ++i) s += a[i];
  return s;
}

void exp_avx2(const float* x, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, exp8(_mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = std::exp(x[i]);
}

void sigmoid_avx2(const float* x, float* y, int64_t n) {
  const __m256 one = _mm256_set1_ps(1.0f);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 e = exp8(_mm256_sub_ps(_mm256_setzero_ps(), _mm256_loadu_ps(x + i)));
    _mm256_storeu_ps(y + i, _mm256_div_ps(one, _mm256_add_ps(one, e)));
  }
  for (; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void softmax_row_avx2(const float* x, float* y, int n) {
  __m256 mv = _mm256_set1_ps(-std::numeric_limits<float>::infinity());
  int i = 0;
  for (; i + 8 <= n; i += 8) mv = _mm256_max_ps(mv, _mm256_loadu_ps(x + i));
  alignas(32) float tmp[8];
  _mm256_store_ps(tmp, mv);
  float mx = tmp[0];
  for (int t = 1; t < 8; ++t) mx = std::max(mx, tmp[t]);
  for (; i < n; ++i) mx = std::max(mx, x[i]);

  const __m256 mxv = _mm256_set1_ps(mx);
  __m256 sv = _mm256_setzero_ps();
  i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 e = exp8(_mm256_sub_ps(_mm256_loadu_ps(x + i), mxv));
    _mm256_storeu_ps(y + i, e);
    sv = _mm256_add_ps(sv, e);
  }
  float s = hsum8(sv);
  for (; i < n; ++i) {
    y[i] = std::exp(x[i] - mx);
    s += y[i];
  }
  const float inv = 1.0f / s;
  scale_avx2(y, inv, n);
}

void relu_fwd_avx2(const float* x, float* y, int64_t n) {
  const __m256 z = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_max_ps(z, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_avx2(const float* x, const float* gy, float* gx, int64_t n) {
  const __m256 z = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), z, _CMP_GT_OQ);
    __m256 g = _mm256_and_ps(mask, _mm256_loadu_ps(gy + i));
    _mm256_storeu_ps(gx + i, _mm256_add_ps(_mm256_loadu_ps(gx + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0f) gx[i] += gy[i];
}

}  // namespace

const KernelTable* avx2_kernels_impl() {
  static const KernelTable t = {
      "avx2",         gemm_avx2,   gemm_bt_avx2, gemm_at_avx2,
      add_avx2,       axpy_avx2,   scale_avx2,   hadamard_avx2,
      dot_avx2,       sum_avx2,    exp_avx2,     sigmoid_avx2,
      softmax_row_avx2, relu_fwd_avx2, relu_bwd_avx2,
  };
  return &t;
}

}  // namespace corrmap::kern
