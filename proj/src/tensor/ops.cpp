#include "corrmap/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "corrmap/core/thread_pool.hpp"
#include "corrmap/kern/kernels.hpp"

namespace corrmap::ops {

using detail::Node;
using detail::make_op;
using kern::kernels;

namespace {

void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

int64_t rows_of(const std::vector<int>& s) {
  int64_t r = 1;
  for (size_t i = 0; i + 1 < s.size(); ++i) r *= s[i];
  return r;
}

}  // namespace

// Split row ranges across workers; each worker owns a disjoint block of a, c.
void gemm_mt(const float* a, const float* b, float* c, int m, int n, int k,
             bool acc) {
  const int64_t flops = 2ll * m * n * k;
  if (flops < (1 << 20)) {
    kernels().gemm(a, b, c, m, n, k, acc);
    return;
  }
  parallel_for(m, [&](int64_t lo, int64_t hi) {
    kernels().gemm(a + lo * k, b, c + lo * n, (int)(hi - lo), n, k, acc);
  });
}

void gemm_bt_mt(const float* a, const float* bt, float* c, int m, int n, int k,
                bool acc) {
  const int64_t flops = 2ll * m * n * k;
  if (flops < (1 << 20)) {
    kernels().gemm_bt(a, bt, c, m, n, k, acc);
    return;
  }
  parallel_for(m, [&](int64_t lo, int64_t hi) {
    kernels().gemm_bt(a + lo * k, bt, c + lo * n, (int)(hi - lo), n, k, acc);
  });
}

// at is [k,m]: split k; per-worker partial outputs are reduced in worker
// order, keeping the result independent of scheduling.
void gemm_at_mt(const float* at, const float* b, float* c, int m, int n, int k,
                bool acc) {
  const int64_t flops = 2ll * m * n * k;
  const int workers = worker_count();
  if (flops < (1 << 21) || workers == 1 || k < workers) {
    kernels().gemm_at(at, b, c, m, n, k, acc);
    return;
  }
  const int chunks = workers;
  const int64_t per = (k + chunks - 1) / chunks;
  std::vector<std::vector<float>> partials(chunks);
  parallel_for(chunks, [&](int64_t clo, int64_t chi) {
    for (int64_t ci = clo; ci < chi; ++ci) {
      const int64_t l0 = ci * per, l1 = std::min<int64_t>(k, l0 + per);
      if (l0 >= l1) continue;
      partials[ci].assign((size_t)m * n, 0.0f);
      kernels().gemm_at(at + l0 * m, b + l0 * n, partials[ci].data(), m, n,
                        (int)(l1 - l0), true);
    }
  });
  if (!acc) std::memset(c, 0, sizeof(float) * (size_t)m * n);
  for (int ci = 0; ci < chunks; ++ci)
    if (!partials[ci].empty())
      kernels().add(c, partials[ci].data(), (int64_t)m * n);
}

Tensor add(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "add: shape mismatch");
  auto an = a.node(), bn = b.node();
  Tensor y = make_op(a.shape(), {an, bn}, [an, bn](Node& n) {
    if (an->requires_grad) kernels().add(an->grad_ptr(), n.grad.data(), n.numel);
    if (bn->requires_grad) kernels().add(bn->grad_ptr(), n.grad.data(), n.numel);
  });
  std::memcpy(y.data(), a.data(), sizeof(float) * a.numel());
  kernels().add(y.data(), b.data(), a.numel());
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "sub: shape mismatch");
  auto an = a.node(), bn = b.node();
  Tensor y = make_op(a.shape(), {an, bn}, [an, bn](Node& n) {
    if (an->requires_grad) kernels().add(an->grad_ptr(), n.grad.data(), n.numel);
    if (bn->requires_grad)
      kernels().axpy(bn->grad_ptr(), -1.0f, n.grad.data(), n.numel);
  });
  for (int64_t i = 0; i < a.numel(); ++i) y.data()[i] = a.data()[i] - b.data()[i];
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "mul: shape mismatch");
  auto an = a.node(), bn = b.node();
  Tensor y = make_op(a.shape(), {an, bn}, [an, bn](Node& n) {
    if (an->requires_grad) {
      float* ga = an->grad_ptr();
      for (int64_t i = 0; i < n.numel; ++i) ga[i] += n.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      float* gb = bn->grad_ptr();
      for (int64_t i = 0; i < n.numel; ++i) gb[i] += n.grad[i] * an->value[i];
    }
  });
  for (int64_t i = 0; i < a.numel(); ++i) y.data()[i] = a.data()[i] * b.data()[i];
  return y;
}

Tensor scale(const Tensor& a, float s) {
  auto an = a.node();
  Tensor y = make_op(a.shape(), {an}, [an, s](Node& n) {
    kernels().axpy(an->grad_ptr(), s, n.grad.data(), n.numel);
  });
  std::memcpy(y.data(), a.data(), sizeof(float) * a.numel());
  kernels().scale(y.data(), s, a.numel());
  return y;
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
  check(b.ndim() == 1, "add_bias: bias must be rank 1");
  const int n = x.dim(x.ndim() - 1);
  check(b.dim(0) == n, "add_bias: width mismatch");
  const int64_t rows = rows_of(x.shape());
  auto xn = x.node(), bn = b.node();
  Tensor y = make_op(x.shape(), {xn, bn}, [xn, bn, rows, n](Node& nd) {
    if (xn->requires_grad)
      kernels().add(xn->grad_ptr(), nd.grad.data(), nd.numel);
    if (bn->requires_grad) {
      float* gb = bn->grad_ptr();
      for (int64_t r = 0; r < rows; ++r)
        kernels().add(gb, nd.grad.data() + r * n, n);
    }
  });
  for (int64_t r = 0; r < rows; ++r) {
    float* yr = y.data() + r * n;
    std::memcpy(yr, x.data() + r * n, sizeof(float) * n);
    kernels().add(yr, b.data(), n);
  }
  return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.ndim() == 2 && b.ndim() == 2 && a.dim(1) == b.dim(0),
        "matmul: bad shapes");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  auto an = a.node(), bn = b.node();
  Tensor y = make_op({m, n}, {an, bn}, [an, bn, m, n, k](Node& nd) {
    if (an->requires_grad)
      gemm_bt_mt(nd.grad.data(), bn->value.data(), an->grad_ptr(), m, k, n, true);
    if (bn->requires_grad)
      gemm_at_mt(an->value.data(), nd.grad.data(), bn->grad_ptr(), k, n, m, true);
  });
  gemm_mt(a.data(), b.data(), y.data(), m, n, k, false);
  return y;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return add_bias(matmul(x, w), b);
}

Tensor transpose2d(const Tensor& x) {
  check(x.ndim() == 2, "transpose2d: rank 2 only");
  const int m = x.dim(0), n = x.dim(1);
  auto xn = x.node();
  Tensor y = make_op({n, m}, {xn}, [xn, m, n](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i) gx[(int64_t)i * n + j] += nd.grad[(int64_t)j * m + i];
  });
  const float* xd = x.data();
  float* yd = y.data();
  constexpr int B = 32;
  for (int i0 = 0; i0 < m; i0 += B)
    for (int j0 = 0; j0 < n; j0 += B)
      for (int i = i0; i < std::min(m, i0 + B); ++i)
        for (int j = j0; j < std::min(n, j0 + B); ++j)
          yd[(int64_t)j * m + i] = xd[(int64_t)i * n + j];
  return y;
}

Tensor reshape(const Tensor& x, std::vector<int> shape) {
  check(detail::shape_numel(shape) == x.numel(), "reshape: numel mismatch");
  auto xn = x.node();
  Tensor y = make_op(std::move(shape), {xn}, [xn](Node& nd) {
    kernels().add(xn->grad_ptr(), nd.grad.data(), nd.numel);
  });
  std::memcpy(y.data(), x.data(), sizeof(float) * x.numel());
  return y;
}

Tensor slice_rows(const Tensor& x, int r0, int r1) {
  check(x.ndim() == 2 && 0 <= r0 && r0 < r1 && r1 <= x.dim(0),
        "slice_rows: bad range");
  const int n = x.dim(1);
  auto xn = x.node();
  Tensor y = make_op({r1 - r0, n}, {xn}, [xn, r0, n](Node& nd) {
    kernels().add(xn->grad_ptr() + (int64_t)r0 * n, nd.grad.data(), nd.numel);
  });
  std::memcpy(y.data(), x.data() + (int64_t)r0 * n,
              sizeof(float) * (size_t)(r1 - r0) * n);
  return y;
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
  check(x.ndim() == 2 && 0 <= c0 && c0 < c1 && c1 <= x.dim(1),
        "slice_cols: bad range");
  const int m = x.dim(0), n = x.dim(1), w = c1 - c0;
  auto xn = x.node();
  Tensor y = make_op({m, w}, {xn}, [xn, c0, n, w, m](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int i = 0; i < m; ++i)
      kernels().add(gx + (int64_t)i * n + c0, nd.grad.data() + (int64_t)i * w, w);
  });
  for (int i = 0; i < m; ++i)
    std::memcpy(y.data() + (int64_t)i * w, x.data() + (int64_t)i * n + c0,
                sizeof(float) * w);
  return y;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  check(a.ndim() == 2 && b.ndim() == 2 && a.dim(1) == b.dim(1),
        "concat_rows: width mismatch");
  const int n = a.dim(1), ma = a.dim(0), mb = b.dim(0);
  auto an = a.node(), bn = b.node();
  Tensor y = make_op({ma + mb, n}, {an, bn}, [an, bn, ma, n](Node& nd) {
    if (an->requires_grad)
      kernels().add(an->grad_ptr(), nd.grad.data(), (int64_t)ma * n);
    if (bn->requires_grad)
      kernels().add(bn->grad_ptr(), nd.grad.data() + (int64_t)ma * n,
                    nd.numel - (int64_t)ma * n);
  });
  std::memcpy(y.data(), a.data(), sizeof(float) * a.numel());
  std::memcpy(y.data() + a.numel(), b.data(), sizeof(float) * b.numel());
  return y;
}

Tensor concat_ch(const Tensor& a, const Tensor& b) {
  check(a.ndim() == 3 && b.ndim() == 3 && a.dim(1) == b.dim(1) &&
            a.dim(2) == b.dim(2),
        "concat_ch: spatial mismatch");
  const int ca = a.dim(0), cb = b.dim(0), h = a.dim(1), w = a.dim(2);
  auto an = a.node(), bn = b.node();
  Tensor y = make_op({ca + cb, h, w}, {an, bn}, [an, bn, ca](Node& nd) {
    const int64_t na = an->numel;
    if (an->requires_grad) kernels().add(an->grad_ptr(), nd.grad.data(), na);
    if (bn->requires_grad)
      kernels().add(bn->grad_ptr(), nd.grad.data() + na, nd.numel - na);
    (void)ca;
  });
  std::memcpy(y.data(), a.data(), sizeof(float) * a.numel());
  std::memcpy(y.data() + a.numel(), b.data(), sizeof(float) * b.numel());
  return y;
}

Tensor split_heads(const Tensor& x, int heads) {
  check(x.ndim() == 2 && x.dim(1) % heads == 0, "split_heads: bad dims");
  const int nt = x.dim(0), d = x.dim(1), dh = d / heads;
  auto xn = x.node();
  Tensor y = make_op({heads, nt, dh}, {xn}, [xn, heads, nt, d, dh](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int h = 0; h < heads; ++h)
      for (int i = 0; i < nt; ++i)
        kernels().add(gx + (int64_t)i * d + h * dh,
                      nd.grad.data() + ((int64_t)h * nt + i) * dh, dh);
  });
  for (int h = 0; h < heads; ++h)
    for (int i = 0; i < nt; ++i)
      std::memcpy(y.data() + ((int64_t)h * nt + i) * dh,
                  x.data() + (int64_t)i * d + h * dh, sizeof(float) * dh);
  return y;
}

Tensor merge_heads(const Tensor& x) {
  check(x.ndim() == 3, "merge_heads: rank 3 required");
  const int heads = x.dim(0), nt = x.dim(1), dh = x.dim(2), d = heads * dh;
  auto xn = x.node();
  Tensor y = make_op({nt, d}, {xn}, [xn, heads, nt, dh, d](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int h = 0; h < heads; ++h)
      for (int i = 0; i < nt; ++i)
        kernels().add(gx + ((int64_t)h * nt + i) * dh,
                      nd.grad.data() + (int64_t)i * d + h * dh, dh);
  });
  for (int h = 0; h < heads; ++h)
    for (int i = 0; i < nt; ++i)
      std::memcpy(y.data() + (int64_t)i * d + h * dh,
                  x.data() + ((int64_t)h * nt + i) * dh, sizeof(float) * dh);
  return y;
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  check(a.ndim() == 3 && b.ndim() == 3 && a.dim(0) == b.dim(0) &&
            a.dim(2) == b.dim(1),
        "bmm: bad shapes");
  const int bs = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  auto an = a.node(), bn = b.node();
  Tensor y = make_op({bs, m, n}, {an, bn}, [an, bn, bs, m, n, k](Node& nd) {
    for (int i = 0; i < bs; ++i) {
      const float* g = nd.grad.data() + (int64_t)i * m * n;
      if (an->requires_grad)
        kernels().gemm_bt(g, bn->value.data() + (int64_t)i * k * n,
                          an->grad_ptr() + (int64_t)i * m * k, m, k, n, true);
      if (bn->requires_grad)
        kernels().gemm_at(an->value.data() + (int64_t)i * m * k, g,
                          bn->grad_ptr() + (int64_t)i * k * n, k, n, m, true);
    }
  });
  for (int i = 0; i < bs; ++i)
    kernels().gemm(a.data() + (int64_t)i * m * k, b.data() + (int64_t)i * k * n,
                   y.data() + (int64_t)i * m * n, m, n, k, false);
  return y;
}

Tensor bmm_bt(const Tensor& a, const Tensor& bt) {
  check(a.ndim() == 3 && bt.ndim() == 3 && a.dim(0) == bt.dim(0) &&
            a.dim(2) == bt.dim(2),
        "bmm_bt: bad shapes");
  const int bs = a.dim(0), m = a.dim(1), k = a.dim(2), n = bt.dim(1);
  auto an = a.node(), bn = bt.node();
  Tensor y = make_op({bs, m, n}, {an, bn}, [an, bn, bs, m, n, k](Node& nd) {
    for (int i = 0; i < bs; ++i) {
      const float* g = nd.grad.data() + (int64_t)i * m * n;
      if (an->requires_grad)
        kernels().gemm(g, bn->value.data() + (int64_t)i * n * k,
                       an->grad_ptr() + (int64_t)i * m * k, m, k, n, true);
      if (bn->requires_grad)
        kernels().gemm_at(g, an->value.data() + (int64_t)i * m * k,
                          bn->grad_ptr() + (int64_t)i * n * k, n, k, m, true);
    }
  });
  for (int i = 0; i < bs; ++i)
    kernels().gemm_bt(a.data() + (int64_t)i * m * k,
                      bt.data() + (int64_t)i * n * k,
                      y.data() + (int64_t)i * m * n, m, n, k, false);
  return y;
}

Tensor relu(const Tensor& x) {
  auto xn = x.node();
  Tensor y = make_op(x.shape(), {xn}, [xn](Node& nd) {
    kernels().relu_bwd(xn->value.data(), nd.grad.data(), xn->grad_ptr(),
                       nd.numel);
  });
  kernels().relu_fwd(x.data(), y.data(), x.numel());
  return y;
}

Tensor gelu(const Tensor& x) {
  auto xn = x.node();
  Tensor y = make_op(x.shape(), {xn}, [xn](Node& nd) {
    constexpr float inv_sqrt2 = 0.7071067811865476f;
    constexpr float inv_sqrt2pi = 0.3989422804014327f;
    float* gx = xn->grad_ptr();
    for (int64_t i = 0; i < nd.numel; ++i) {
      const float v = xn->value[i];
      const float cdf = 0.5f * (1.0f + std::erf(v * inv_sqrt2));
      const float pdf = inv_sqrt2pi * std::exp(-0.5f * v * v);
      gx[i] += nd.grad[i] * (cdf + v * pdf);
    }
  });
  constexpr float inv_sqrt2 = 0.7071067811865476f;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const float v = x.data()[i];
    y.data()[i] = 0.5f * v * (1.0f + std::erf(v * inv_sqrt2));
  }
  return y;
}

Tensor sigmoid(const Tensor& x) {
  auto xn = x.node();
  Tensor y = make_op(x.shape(), {xn}, [xn](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int64_t i = 0; i < nd.numel; ++i) {
      const float s = nd.value[i];
      gx[i] += nd.grad[i] * s * (1.0f - s);
    }
  });
  kernels().sigmoid_vec(x.data(), y.data(), x.numel());
  return y;
}

Tensor softmax_lastdim(const Tensor& x) {
  const int n = x.dim(x.ndim() - 1);
  const int64_t rows = rows_of(x.shape());
  auto xn = x.node();
  Tensor y = make_op(x.shape(), {xn}, [xn, rows, n](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int64_t r = 0; r < rows; ++r) {
      const float* p = nd.value.data() + r * n;
      const float* g = nd.grad.data() + r * n;
      const float gp = kernels().dot(g, p, n);
      for (int i = 0; i < n; ++i) gx[r * n + i] += (g[i] - gp) * p[i];
    }
  });
  parallel_for(rows, [&](int64_t lo, int64_t hi) {
    for (int64_t r = lo; r < hi; ++r)
      kernels().softmax_row(x.data() + r * n, y.data() + r * n, n);
  });
  return y;
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 float eps) {
  const int n = x.dim(x.ndim() - 1);
  check(gamma.ndim() == 1 && gamma.dim(0) == n && beta.ndim() == 1 &&
            beta.dim(0) == n,
        "layernorm: affine shape mismatch");
  const int64_t rows = rows_of(x.shape());
  auto xn = x.node(), gn = gamma.node(), bn = beta.node();

  // Keep normalized activations and inverse sigma for the backward pass.
  auto xhat = std::make_shared<std::vector<float>>((size_t)x.numel());
  auto inv_sigma = std::make_shared<std::vector<float>>((size_t)rows);

  Tensor y = make_op(
      x.shape(), {xn, gn, bn}, [xn, gn, bn, xhat, inv_sigma, rows, n](Node& nd) {
        for (int64_t r = 0; r < rows; ++r) {
          const float* g = nd.grad.data() + r * n;
          const float* xh = xhat->data() + r * n;
          if (gn->requires_grad) {
            float* gg = gn->grad_ptr();
            for (int i = 0; i < n; ++i) gg[i] += g[i] * xh[i];
          }
          if (bn->requires_grad) kernels().add(bn->grad_ptr(), g, n);
          if (xn->requires_grad) {
            float* gx = xn->grad_ptr() + r * n;
            // dxhat = g * gamma; dx = (dxhat - mean(dxhat)
            //          - xhat * mean(dxhat*xhat)) / sigma
            double m1 = 0, m2 = 0;
            for (int i = 0; i < n; ++i) {
              const float dxh = g[i] * gn->value[i];
              m1 += dxh;
              m2 += dxh * xh[i];
            }
            m1 /= n;
            m2 /= n;
            const float is = (*inv_sigma)[r];
            for (int i = 0; i < n; ++i) {
              const float dxh = g[i] * gn->value[i];
              gx[i] += is * (dxh - (float)m1 - xh[i] * (float)m2);
            }
          }
        }
      });

  for (int64_t r = 0; r < rows; ++r) {
    const float* xr = x.data() + r * n;
    double mu = 0;
    for (int i = 0; i < n; ++i) mu += xr[i];
    mu /= n;
    double var = 0;
    for (int i = 0; i < n; ++i) {
      const double d = xr[i] - mu;
      var += d * d;
    }
    var /= n;
    const float is = (float)(1.0 / std::sqrt(var + eps));
    (*inv_sigma)[r] = is;
    float* xh = xhat->data() + r * n;
    float* yr = y.data() + r * n;
    for (int i = 0; i < n; ++i) {
      xh[i] = (float)((xr[i] - mu) * is);
      yr[i] = xh[i] * gamma.data()[i] + beta.data()[i];
    }
  }
  return y;
}

Tensor sum_all(const Tensor& x) {
  auto xn = x.node();
  Tensor y = make_op({1}, {xn}, [xn](Node& nd) {
    const float g = nd.grad[0];
    float* gx = xn->grad_ptr();
    for (int64_t i = 0; i < xn->numel; ++i) gx[i] += g;
  });
  y.data()[0] = (float)kernels().sum(x.data(), x.numel());
  return y;
}

Tensor mean_all(const Tensor& x) { return scale(sum_all(x), 1.0f / x.numel()); }

Tensor weighted_sum(const Tensor& x, std::vector<float> weights) {
  check((int64_t)weights.size() == x.numel(), "weighted_sum: size mismatch");
  auto xn = x.node();
  auto w = std::make_shared<std::vector<float>>(std::move(weights));
  Tensor y = make_op({1}, {xn}, [xn, w](Node& nd) {
    kernels().axpy(xn->grad_ptr(), nd.grad[0], w->data(), xn->numel);
  });
  double s = 0;
  for (int64_t i = 0; i < x.numel(); ++i) s += (double)x.data()[i] * (*w)[i];
  y.data()[0] = (float)s;
  return y;
}

Tensor affine_combine(const std::vector<Tensor>& terms,
                      const std::vector<float>& weights) {
  check(terms.size() == weights.size() && !terms.empty(),
        "affine_combine: arity mismatch");
  std::vector<std::shared_ptr<Node>> parents;
  for (const auto& t : terms) {
    check(t.numel() == 1, "affine_combine: scalar terms only");
    parents.push_back(t.node());
  }
  auto w = std::make_shared<std::vector<float>>(weights);
  Tensor y = make_op({1}, parents, [w](Node& nd) {
    for (size_t i = 0; i < nd.parents.size(); ++i)
      if (nd.parents[i]->requires_grad)
        nd.parents[i]->grad_ptr()[0] += nd.grad[0] * (*w)[i];
  });
  double s = 0;
  for (size_t i = 0; i < terms.size(); ++i)
    s += (double)weights[i] * terms[i].item();
  y.data()[0] = (float)s;
  return y;
}

}  // namespace corrmap::ops
