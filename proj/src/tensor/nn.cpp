#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

#include "corrmap/core/thread_pool.hpp"
#include "corrmap/kern/kernels.hpp"
#include "corrmap/tensor/ops.hpp"

// Image-shaped ops: convolution via im2col, bilinear upsampling, patch
// extraction and the token<->grid moves.

namespace corrmap::ops {

using detail::Node;
using detail::make_op;
using kern::kernels;

namespace {

void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// col is [ci*k*k, h*w]; pad = k/2, stride 1.
void im2col(const float* x, int ci, int h, int w, int k, float* col) {
  const int pad = k / 2;
  const int64_t hw = (int64_t)h * w;
  int64_t row = 0;
  for (int c = 0; c < ci; ++c) {
    const float* xc = x + (int64_t)c * hw;
    for (int dy = 0; dy < k; ++dy)
      for (int dx = 0; dx < k; ++dx, ++row) {
        float* out = col + row * hw;
        const int sy = dy - pad, sx = dx - pad;
        for (int y = 0; y < h; ++y) {
          const int iy = y + sy;
          float* orow = out + (int64_t)y * w;
          if (iy < 0 || iy >= h) {
            std::memset(orow, 0, sizeof(float) * w);
            continue;
          }
          const float* irow = xc + (int64_t)iy * w;
          for (int xx = 0; xx < w; ++xx) {
            const int ix = xx + sx;
            orow[xx] = (ix < 0 || ix >= w) ? 0.0f : irow[ix];
          }
        }
      }
  }
}

void col2im_add(const float* col, int ci, int h, int w, int k, float* gx) {
  const int pad = k / 2;
  const int64_t hw = (int64_t)h * w;
  parallel_for(ci, [&](int64_t clo, int64_t chi) {
    for (int64_t c = clo; c < chi; ++c) {
      float* gxc = gx + c * hw;
      int64_t row = c * k * k;
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx, ++row) {
          const float* in = col + row * hw;
          const int sy = dy - pad, sx = dx - pad;
          for (int y = 0; y < h; ++y) {
            const int iy = y + sy;
            if (iy < 0 || iy >= h) continue;
            const float* irow = in + (int64_t)y * w;
            float* grow = gxc + (int64_t)iy * w;
            for (int xx = 0; xx < w; ++xx) {
              const int ix = xx + sx;
              if (ix >= 0 && ix < w) grow[ix] += irow[xx];
            }
          }
        }
    }
  });
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
  check(x.ndim() == 3 && w.ndim() == 4, "conv2d: x [C,H,W], w [Co,Ci,k,k]");
  const int ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const int co = w.dim(0), k = w.dim(2);
  check(w.dim(1) == ci && w.dim(3) == k && (k == 1 || k == 3),
        "conv2d: kernel must be 1x1 or 3x3 with matching channels");
  check(b.ndim() == 1 && b.dim(0) == co, "conv2d: bias mismatch");
  const int64_t hw = (int64_t)h * wd;
  auto xn = x.node(), wn = w.node(), bn = b.node();

  if (k == 1) {
    Tensor y = make_op({co, h, wd}, {xn, wn, bn},
                       [xn, wn, bn, ci, co, hw](Node& nd) {
      const float* g = nd.grad.data();
      if (bn->requires_grad) {
        float* gb = bn->grad_ptr();
        for (int c = 0; c < co; ++c) gb[c] += (float)kernels().sum(g + c * hw, hw);
      }
      if (wn->requires_grad)
        gemm_bt_mt(g, xn->value.data(), wn->grad_ptr(), co, ci, (int)hw, true);
      if (xn->requires_grad)
        gemm_at_mt(wn->value.data(), g, xn->grad_ptr(), ci, (int)hw, co, true);
    });
    gemm_mt(w.data(), x.data(), y.data(), co, (int)hw, ci, false);
    for (int c = 0; c < co; ++c) {
      const float bias = b.data()[c];
      float* yc = y.data() + c * hw;
      for (int64_t i = 0; i < hw; ++i) yc[i] += bias;
    }
    return y;
  }

  const int ck = ci * k * k;
  auto col = std::make_shared<std::vector<float>>((size_t)ck * hw);
  im2col(x.data(), ci, h, wd, k, col->data());

  Tensor y = make_op({co, h, wd}, {xn, wn, bn},
                     [xn, wn, bn, col, ci, co, ck, h, wd, k, hw](Node& nd) {
    const float* g = nd.grad.data();
    if (bn->requires_grad) {
      float* gb = bn->grad_ptr();
      for (int c = 0; c < co; ++c) gb[c] += (float)kernels().sum(g + c * hw, hw);
    }
    if (wn->requires_grad)
      gemm_bt_mt(g, col->data(), wn->grad_ptr(), co, ck, (int)hw, true);
    if (xn->requires_grad) {
      std::vector<float> dcol((size_t)ck * hw);
      gemm_at_mt(wn->value.data(), g, dcol.data(), ck, (int)hw, co, false);
      col2im_add(dcol.data(), ci, h, wd, k, xn->grad_ptr());
    }
  });
  gemm_mt(w.data(), col->data(), y.data(), co, (int)hw, ck, false);
  for (int c = 0; c < co; ++c) {
    const float bias = b.data()[c];
    float* yc = y.data() + c * hw;
    for (int64_t i = 0; i < hw; ++i) yc[i] += bias;
  }
  return y;
}

Tensor upsample2x_bilinear(const Tensor& x) {
  check(x.ndim() == 3, "upsample2x: [C,H,W] required");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int oh = 2 * h, ow = 2 * w;
  auto xn = x.node();

  // Per-axis taps for the half-pixel-center mapping.
  auto make_taps = [](int in, int out) {
    std::vector<std::array<float, 3>> t(out);  // i0, i1, weight of i1
    for (int o = 0; o < out; ++o) {
      const float f = (o + 0.5f) / 2.0f - 0.5f;
      int i0 = (int)std::floor(f);
      float a = f - i0;
      int i1 = i0 + 1;
      i0 = std::clamp(i0, 0, in - 1);
      i1 = std::clamp(i1, 0, in - 1);
      t[o] = {(float)i0, (float)i1, a};
    }
    return t;
  };
  auto ty = std::make_shared<std::vector<std::array<float, 3>>>(make_taps(h, oh));
  auto tx = std::make_shared<std::vector<std::array<float, 3>>>(make_taps(w, ow));

  Tensor y = make_op({c, oh, ow}, {xn}, [xn, ty, tx, c, h, w, oh, ow](Node& nd) {
    float* gx = xn->grad_ptr();
    for (int ch = 0; ch < c; ++ch) {
      const float* g = nd.grad.data() + (int64_t)ch * oh * ow;
      float* gc = gx + (int64_t)ch * h * w;
      for (int oy = 0; oy < oh; ++oy) {
        const int y0 = (int)(*ty)[oy][0], y1 = (int)(*ty)[oy][1];
        const float ay = (*ty)[oy][2];
        for (int ox = 0; ox < ow; ++ox) {
          const int x0 = (int)(*tx)[ox][0], x1 = (int)(*tx)[ox][1];
          const float ax = (*tx)[ox][2];
          const float gv = g[(int64_t)oy * ow + ox];
          gc[(int64_t)y0 * w + x0] += gv * (1 - ay) * (1 - ax);
          gc[(int64_t)y0 * w + x1] += gv * (1 - ay) * ax;
          gc[(int64_t)y1 * w + x0] += gv * ay * (1 - ax);
          gc[(int64_t)y1 * w + x1] += gv * ay * ax;
        }
      }
    }
  });

  parallel_for(c, [&](int64_t clo, int64_t chi) {
    for (int64_t ch = clo; ch < chi; ++ch) {
      const float* xc = x.data() + ch * h * w;
      float* yc = y.data() + ch * oh * ow;
      for (int oy = 0; oy < oh; ++oy) {
        const int y0 = (int)(*ty)[oy][0], y1 = (int)(*ty)[oy][1];
        const float ay = (*ty)[oy][2];
        const float* r0 = xc + (int64_t)y0 * w;
        const float* r1 = xc + (int64_t)y1 * w;
        float* out = yc + (int64_t)oy * ow;
        for (int ox = 0; ox < ow; ++ox) {
          const int x0 = (int)(*tx)[ox][0], x1 = (int)(*tx)[ox][1];
          const float ax = (*tx)[ox][2];
          const float top = r0[x0] * (1 - ax) + r0[x1] * ax;
          const float bot = r1[x0] * (1 - ax) + r1[x1] * ax;
          out[ox] = top * (1 - ay) + bot * ay;
        }
      }
    }
  });
  return y;
}

Tensor patchify(const Tensor& img, int patch) {
  check(img.ndim() == 3 && img.dim(0) == 3, "patchify: [3,H,W] required");
  const int h = img.dim(1), w = img.dim(2);
  check(h % patch == 0 && w % patch == 0, "patchify: size not divisible");
  const int gy = h / patch, gx = w / patch, n = gy * gx;
  const int pd = 3 * patch * patch;
  auto xn = img.node();

  auto scatter = [patch, gy, gx, h, w, pd](const float* rows, float* im,
                                           bool add) {
    for (int r = 0; r < gy * gx; ++r) {
      const int py = (r / gx) * patch, px = (r % gx) * patch;
      const float* src = rows + (int64_t)r * pd;
      for (int c = 0; c < 3; ++c)
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx) {
            float* dst =
                im + ((int64_t)c * h + py + dy) * w + px + dx;
            const float v = src[(c * patch + dy) * patch + dx];
            if (add)
              *dst += v;
            else
              *dst = v;
          }
    }
  };

  Tensor y = make_op({n, pd}, {xn}, [xn, scatter](Node& nd) {
    scatter(nd.grad.data(), xn->grad_ptr(), true);
  });
  // gather: inverse of scatter
  for (int r = 0; r < n; ++r) {
    const int py = (r / gx) * patch, px = (r % gx) * patch;
    float* dst = y.data() + (int64_t)r * pd;
    for (int c = 0; c < 3; ++c)
      for (int dy = 0; dy < patch; ++dy)
        for (int dx = 0; dx < patch; ++dx)
          dst[(c * patch + dy) * patch + dx] =
              img.data()[((int64_t)c * h + py + dy) * w + px + dx];
  }
  return y;
}

Tensor tokens_to_grid(const Tensor& tokens, int g) {
  check(tokens.ndim() == 2 && tokens.dim(0) == g * g,
        "tokens_to_grid: token count mismatch");
  const int d = tokens.dim(1);
  auto tn = tokens.node();
  Tensor y = make_op({d, g, g}, {tn}, [tn, g, d](Node& nd) {
    float* gt = tn->grad_ptr();
    for (int c = 0; c < d; ++c)
      for (int i = 0; i < g * g; ++i)
        gt[(int64_t)i * d + c] += nd.grad[(int64_t)c * g * g + i];
  });
  for (int c = 0; c < d; ++c)
    for (int i = 0; i < g * g; ++i)
      y.data()[(int64_t)c * g * g + i] = tokens.data()[(int64_t)i * d + c];
  return y;
}

Tensor resample_pos_table(const Tensor& pos, int g0, int g) {
  const int d = pos.dim(1);
  check(pos.ndim() == 2 && pos.dim(0) == g0 * g0 + 1,
        "resample_pos_table: table shape mismatch");
  auto pn = pos.node();
  if (g == g0) {
    Tensor y = make_op(pos.shape(), {pn}, [pn](Node& nd) {
      kernels().add(pn->grad_ptr(), nd.grad.data(), nd.numel);
    });
    std::memcpy(y.data(), pos.data(), sizeof(float) * pos.numel());
    return y;
  }

  struct Tap {
    int i00, i01, i10, i11;
    float w00, w01, w10, w11;
  };
  auto taps = std::make_shared<std::vector<Tap>>();
  taps->reserve((size_t)g * g);
  for (int oy = 0; oy < g; ++oy)
    for (int ox = 0; ox < g; ++ox) {
      const float fy = (oy + 0.5f) * g0 / g - 0.5f;
      const float fx = (ox + 0.5f) * g0 / g - 0.5f;
      int y0 = (int)std::floor(fy), x0 = (int)std::floor(fx);
      const float ay = fy - y0, ax = fx - x0;
      int y1 = std::clamp(y0 + 1, 0, g0 - 1), x1 = std::clamp(x0 + 1, 0, g0 - 1);
      y0 = std::clamp(y0, 0, g0 - 1);
      x0 = std::clamp(x0, 0, g0 - 1);
      Tap t;
      t.i00 = y0 * g0 + x0;
      t.i01 = y0 * g0 + x1;
      t.i10 = y1 * g0 + x0;
      t.i11 = y1 * g0 + x1;
      t.w00 = (1 - ay) * (1 - ax);
      t.w01 = (1 - ay) * ax;
      t.w10 = ay * (1 - ax);
      t.w11 = ay * ax;
      taps->push_back(t);
    }

  Tensor y = make_op({g * g + 1, d}, {pn}, [pn, taps, d](Node& nd) {
    float* gp = pn->grad_ptr();
    kernels().add(gp, nd.grad.data(), d);  // readout row
    for (size_t i = 0; i < taps->size(); ++i) {
      const Tap& t = (*taps)[i];
      const float* g = nd.grad.data() + (i + 1) * d;
      kernels().axpy(gp + (int64_t)(t.i00 + 1) * d, t.w00, g, d);
      kernels().axpy(gp + (int64_t)(t.i01 + 1) * d, t.w01, g, d);
      kernels().axpy(gp + (int64_t)(t.i10 + 1) * d, t.w10, g, d);
      kernels().axpy(gp + (int64_t)(t.i11 + 1) * d, t.w11, g, d);
    }
  });
  std::memcpy(y.data(), pos.data(), sizeof(float) * d);  // readout row
  for (size_t i = 0; i < taps->size(); ++i) {
    const Tap& t = (*taps)[i];
    float* out = y.data() + (i + 1) * d;
    const float* p = pos.data();
    for (int c = 0; c < d; ++c)
      out[c] = t.w00 * p[(int64_t)(t.i00 + 1) * d + c] +
               t.w01 * p[(int64_t)(t.i01 + 1) * d + c] +
               t.w10 * p[(int64_t)(t.i10 + 1) * d + c] +
               t.w11 * p[(int64_t)(t.i11 + 1) * d + c];
  }
  return y;
}

}  // namespace corrmap::ops
