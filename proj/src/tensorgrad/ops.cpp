#include "lidardrive/tensorgrad/ops.hpp"

#include <algorithm>
#include <cmath>

namespace lidardrive::tensorgrad {

namespace {

using Index = long;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

void require_rank(const Tensor& v, std::size_t rank, const char* op) {
  require(v.rank() == rank, std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got " + shape_str(v.shape()));
}

/// Output index range [lo, hi) whose input index o * stride + offset lies in [0, n).
void valid_range(Index n_out, Index n_in, Index stride, Index offset, Index& lo, Index& hi) {
  // o * stride + offset >= 0  ->  o >= ceil(-offset / stride)
  lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  // o * stride + offset <= n_in - 1
  const Index top = n_in - 1 - offset;
  hi = top < 0 ? 0 : std::min(n_out, top / stride + 1);
  if (hi < lo) hi = lo;
}

struct ConvGeometry {
  std::size_t c_in, h, w, c_out, kh, kw, ho, wo;
};

ConvGeometry conv_geometry(const Shape& in, const Tensor& k, const Conv2dParams& p, const char* op) {
  require(in.size() == 3, std::string(op) + ": input must be C x H x W");
  require_rank(k, 4, op);
  require(p.stride_h >= 1 && p.stride_w >= 1, std::string(op) + ": stride must be >= 1");
  require(p.dilation_h >= 1 && p.dilation_w >= 1, std::string(op) + ": dilation must be >= 1");
  require(k.dim(1) == in[0], std::string(op) + ": kernel expects " + std::to_string(k.dim(1)) +
                                 " input channels, input has " + std::to_string(in[0]));
  ConvGeometry g{in[0], in[1], in[2], k.dim(0), k.dim(2), k.dim(3), 0, 0};
  g.ho = conv_output_size(g.h, g.kh, p.stride_h, p.dilation_h, p.pad_h);
  g.wo = conv_output_size(g.w, g.kw, p.stride_w, p.dilation_w, p.pad_w);
  return g;
}

void check_bias(const Tape& t, Var bias, std::size_t n, const char* op) {
  if (!bias.valid()) return;
  const Tensor& b = t.value(bias);
  require(b.rank() == 1 && b.dim(0) == n, std::string(op) + ": bias must have shape [" +
                                              std::to_string(n) + "]");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                      " vs " + shape_str(b.shape()));
}

template <typename Fwd, typename Deriv>
Var unary(Tape& t, Var x, Fwd fwd, Deriv deriv) {
  const Tensor& xv = t.value(x);
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return t.record(std::move(out), {x}, [x, deriv](Tape& tp, const Tensor& y, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(x);
    if (!gx) return;
    const Tensor& xv = tp.value(x);
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * deriv(xv[i], y[i]);
  });
}

}  // namespace

std::size_t conv_output_size(std::size_t n, std::size_t k, std::size_t stride, std::size_t dilation,
                             std::size_t pad) {
  const Index span = static_cast<Index>(dilation * (k - 1) + 1);
  const Index avail = static_cast<Index>(n + 2 * pad);
  if (k == 0 || stride == 0 || avail < span) {
    throw ShapeError("conv: kernel extent " + std::to_string(span) + " exceeds padded input " +
                     std::to_string(avail));
  }
  return static_cast<std::size_t>((avail - span) / static_cast<Index>(stride) + 1);
}

Var conv2d(Tape& t, Var input, Var kernel, Var bias, const Conv2dParams& p) {
  const Tensor& x = t.value(input);
  const Tensor& k = t.value(kernel);
  const ConvGeometry g = conv_geometry(x.shape(), k, p, "conv2d");
  check_bias(t, bias, g.c_out, "conv2d");

  Tensor out({g.c_out, g.ho, g.wo});
  const std::size_t plane_out = g.ho * g.wo;
  const std::size_t plane_in = g.h * g.w;
  if (bias.valid()) {
    const Tensor& b = t.value(bias);
    for (std::size_t oc = 0; oc < g.c_out; ++oc) {
      std::fill_n(out.ptr() + oc * plane_out, plane_out, b[oc]);
    }
  }

  // Visits every (output pixel, input pixel) pair a kernel tap connects.
  auto for_each_tap = [g, p](auto&& body) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      const Index off_y = static_cast<Index>(ky * p.dilation_h) - static_cast<Index>(p.pad_h);
      Index oy_lo, oy_hi;
      valid_range(static_cast<Index>(g.ho), static_cast<Index>(g.h), static_cast<Index>(p.stride_h),
                  off_y, oy_lo, oy_hi);
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const Index off_x = static_cast<Index>(kx * p.dilation_w) - static_cast<Index>(p.pad_w);
        Index ox_lo, ox_hi;
        valid_range(static_cast<Index>(g.wo), static_cast<Index>(g.w),
                    static_cast<Index>(p.stride_w), off_x, ox_lo, ox_hi);
        body(ky, kx, oy_lo, oy_hi, off_y, ox_lo, ox_hi, off_x);
      }
    }
  };

  for (std::size_t oc = 0; oc < g.c_out; ++oc) {
    double* o = out.ptr() + oc * plane_out;
    for (std::size_t ic = 0; ic < g.c_in; ++ic) {
      const double* xi = x.ptr() + ic * plane_in;
      const double* kk = k.ptr() + (oc * g.c_in + ic) * g.kh * g.kw;
      for_each_tap([&](std::size_t ky, std::size_t kx, Index oy_lo, Index oy_hi, Index off_y,
                       Index ox_lo, Index ox_hi, Index off_x) {
        const double wv = kk[ky * g.kw + kx];
        for (Index oy = oy_lo; oy < oy_hi; ++oy) {
          const Index iy = oy * static_cast<Index>(p.stride_h) + off_y;
          double* orow = o + oy * static_cast<Index>(g.wo);
          const double* irow = xi + iy * static_cast<Index>(g.w);
          if (p.stride_w == 1) {
            for (Index ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * irow[ox + off_x];
          } else {
            for (Index ox = ox_lo; ox < ox_hi; ++ox) {
              orow[ox] += wv * irow[ox * static_cast<Index>(p.stride_w) + off_x];
            }
          }
        }
      });
    }
  }

  return t.record(std::move(out), {input, kernel, bias},
                  [input, kernel, bias, p, g, for_each_tap](Tape& tp, const Tensor&, const Tensor& gout) {
    Tensor* gx = tp.grad_buffer(input);
    Tensor* gk = tp.grad_buffer(kernel);
    Tensor* gb = tp.grad_buffer(bias);
    const Tensor& x = tp.value(input);
    const Tensor& k = tp.value(kernel);
    const std::size_t plane_out = g.ho * g.wo;
    const std::size_t plane_in = g.h * g.w;
    if (gb) {
      for (std::size_t oc = 0; oc < g.c_out; ++oc) {
        double s = 0.0;
        for (std::size_t i = 0; i < plane_out; ++i) s += gout[oc * plane_out + i];
        (*gb)[oc] += s;
      }
    }
    if (!gx && !gk) return;
    for (std::size_t oc = 0; oc < g.c_out; ++oc) {
      const double* go = gout.ptr() + oc * plane_out;
      for (std::size_t ic = 0; ic < g.c_in; ++ic) {
        const double* xi = x.ptr() + ic * plane_in;
        double* gxi = gx ? gx->ptr() + ic * plane_in : nullptr;
        const std::size_t kbase = (oc * g.c_in + ic) * g.kh * g.kw;
        for_each_tap([&](std::size_t ky, std::size_t kx, Index oy_lo, Index oy_hi, Index off_y,
                         Index ox_lo, Index ox_hi, Index off_x) {
          const double wv = k[kbase + ky * g.kw + kx];
          double acc = 0.0;
          const Index sw = static_cast<Index>(p.stride_w);
          for (Index oy = oy_lo; oy < oy_hi; ++oy) {
            const Index iy = oy * static_cast<Index>(p.stride_h) + off_y;
            const double* grow = go + oy * static_cast<Index>(g.wo);
            const double* irow = xi + iy * static_cast<Index>(g.w);
            for (Index ox = ox_lo; ox < ox_hi; ++ox) acc += grow[ox] * irow[ox * sw + off_x];
            if (gxi) {
              double* gxrow = gxi + iy * static_cast<Index>(g.w);
              for (Index ox = ox_lo; ox < ox_hi; ++ox) gxrow[ox * sw + off_x] += wv * grow[ox];
            }
          }
          if (gk) (*gk)[kbase + ky * g.kw + kx] += acc;
        });
      }
    }
  });
}

Tensor SparseInput::to_dense() const {
  Tensor out({channels, height, width});
  for (const auto& e : entries) {
    out[(e.channel * height + e.row) * width + e.col] += e.value;
  }
  return out;
}

Var sparse_conv2d(Tape& t, const SparseInput& input, Var kernel, Var bias, const Conv2dParams& p) {
  const Tensor& k = t.value(kernel);
  const ConvGeometry g =
      conv_geometry({input.channels, input.height, input.width}, k, p, "sparse_conv2d");
  check_bias(t, bias, g.c_out, "sparse_conv2d");
  for (const auto& e : input.entries) {
    require(e.channel < g.c_in && e.row < g.h && e.col < g.w, "sparse_conv2d: entry out of range");
  }

  // For each entry and tap, the output pixel it lands on (or skip).
  struct Hit {
    std::uint32_t entry;
    std::uint32_t tap;  // ky * kw + kx
    std::uint32_t out;  // oy * wo + ox
  };
  std::vector<Hit> hits;
  hits.reserve(input.entries.size() * g.kh * g.kw);
  for (std::size_t ei = 0; ei < input.entries.size(); ++ei) {
    const auto& e = input.entries[ei];
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      const Index ny = static_cast<Index>(e.row) + static_cast<Index>(p.pad_h) -
                       static_cast<Index>(ky * p.dilation_h);
      if (ny < 0 || ny % static_cast<Index>(p.stride_h) != 0) continue;
      const Index oy = ny / static_cast<Index>(p.stride_h);
      if (oy >= static_cast<Index>(g.ho)) continue;
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const Index nx = static_cast<Index>(e.col) + static_cast<Index>(p.pad_w) -
                         static_cast<Index>(kx * p.dilation_w);
        if (nx < 0 || nx % static_cast<Index>(p.stride_w) != 0) continue;
        const Index ox = nx / static_cast<Index>(p.stride_w);
        if (ox >= static_cast<Index>(g.wo)) continue;
        hits.push_back({static_cast<std::uint32_t>(ei), static_cast<std::uint32_t>(ky * g.kw + kx),
                        static_cast<std::uint32_t>(oy * static_cast<Index>(g.wo) + ox)});
      }
    }
  }

  Tensor out({g.c_out, g.ho, g.wo});
  const std::size_t plane_out = g.ho * g.wo;
  const std::size_t ktaps = g.kh * g.kw;
  const std::size_t kstride = g.c_in * ktaps;
  if (bias.valid()) {
    const Tensor& b = t.value(bias);
    for (std::size_t oc = 0; oc < g.c_out; ++oc) std::fill_n(out.ptr() + oc * plane_out, plane_out, b[oc]);
  }
  for (const Hit& h : hits) {
    const auto& e = input.entries[h.entry];
    const double* kk = k.ptr() + e.channel * ktaps + h.tap;
    double* o = out.ptr() + h.out;
    for (std::size_t oc = 0; oc < g.c_out; ++oc) o[oc * plane_out] += kk[oc * kstride] * e.value;
  }

  auto entries = std::make_shared<const std::vector<SparseEntry>>(input.entries);
  return t.record(std::move(out), {kernel, bias},
                  [kernel, bias, g, entries, hits = std::move(hits)](Tape& tp, const Tensor&,
                                                                     const Tensor& gout) {
    const std::size_t plane_out = g.ho * g.wo;
    if (Tensor* gb = tp.grad_buffer(bias)) {
      for (std::size_t oc = 0; oc < g.c_out; ++oc) {
        double s = 0.0;
        for (std::size_t i = 0; i < plane_out; ++i) s += gout[oc * plane_out + i];
        (*gb)[oc] += s;
      }
    }
    Tensor* gk = tp.grad_buffer(kernel);
    if (!gk) return;
    const std::size_t ktaps = g.kh * g.kw;
    const std::size_t kstride = g.c_in * ktaps;
    for (const Hit& h : hits) {
      const auto& e = (*entries)[h.entry];
      double* gkk = gk->ptr() + e.channel * ktaps + h.tap;
      const double* go = gout.ptr() + h.out;
      for (std::size_t oc = 0; oc < g.c_out; ++oc) gkk[oc * kstride] += go[oc * plane_out] * e.value;
    }
  });
}

Var pool2d(Tape& t, Var input, PoolKind kind, std::size_t window_h, std::size_t window_w,
           std::size_t stride_h, std::size_t stride_w) {
  const Tensor& x = t.value(input);
  require_rank(x, 3, "pool2d");
  require(window_h >= 1 && window_w >= 1 && stride_h >= 1 && stride_w >= 1,
          "pool2d: window and stride must be >= 1");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(window_h <= h && window_w <= w, "pool2d: window " + std::to_string(window_h) + "x" +
                                              std::to_string(window_w) + " larger than input " +
                                              shape_str(x.shape()));
  const std::size_t ho = (h - window_h) / stride_h + 1;
  const std::size_t wo = (w - window_w) / stride_w + 1;
  Tensor out({c, ho, wo});
  std::vector<std::uint32_t> argmax;
  if (kind == PoolKind::kMax) argmax.resize(out.size());
  const double inv = 1.0 / static_cast<double>(window_h * window_w);

  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* xi = x.ptr() + ch * h * w;
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        const std::size_t o = (ch * ho + oy) * wo + ox;
        if (kind == PoolKind::kMax) {
          std::size_t best = oy * stride_h * w + ox * stride_w;
          for (std::size_t dy = 0; dy < window_h; ++dy) {
            const std::size_t row = (oy * stride_h + dy) * w + ox * stride_w;
            for (std::size_t dx = 0; dx < window_w; ++dx) {
              if (xi[row + dx] > xi[best]) best = row + dx;
            }
          }
          out[o] = xi[best];
          argmax[o] = static_cast<std::uint32_t>(ch * h * w + best);
        } else {
          double s = 0.0;
          for (std::size_t dy = 0; dy < window_h; ++dy) {
            const std::size_t row = (oy * stride_h + dy) * w + ox * stride_w;
            for (std::size_t dx = 0; dx < window_w; ++dx) s += xi[row + dx];
          }
          out[o] = s * inv;
        }
      }
    }
  }

  return t.record(std::move(out), {input},
                  [input, kind, window_h, window_w, stride_h, stride_w, h, w, ho, wo, inv,
                   argmax = std::move(argmax)](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(input);
    if (!gx) return;
    if (kind == PoolKind::kMax) {
      for (std::size_t o = 0; o < g.size(); ++o) (*gx)[argmax[o]] += g[o];
      return;
    }
    const std::size_t c = g.size() / (ho * wo);
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* gxi = gx->ptr() + ch * h * w;
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox) {
          const double v = g[(ch * ho + oy) * wo + ox] * inv;
          for (std::size_t dy = 0; dy < window_h; ++dy) {
            double* row = gxi + (oy * stride_h + dy) * w + ox * stride_w;
            for (std::size_t dx = 0; dx < window_w; ++dx) row[dx] += v;
          }
        }
      }
    }
  });
}

Var pointwise_conv(Tape& t, Var input, Var kernel, Var bias) {
  const Tensor& x = t.value(input);
  const Tensor& k = t.value(kernel);
  require_rank(x, 3, "pointwise_conv");
  require_rank(k, 2, "pointwise_conv kernel");
  require(k.dim(1) == x.dim(0), "pointwise_conv: kernel expects " + std::to_string(k.dim(1)) +
                                    " channels, input has " + std::to_string(x.dim(0)));
  const std::size_t cin = x.dim(0), cout = k.dim(0), plane = x.dim(1) * x.dim(2);
  check_bias(t, bias, cout, "pointwise_conv");
  Tensor out({cout, x.dim(1), x.dim(2)});
  for (std::size_t o = 0; o < cout; ++o) {
    double* orow = out.ptr() + o * plane;
    if (bias.valid()) std::fill_n(orow, plane, t.value(bias)[o]);
    for (std::size_t i = 0; i < cin; ++i) {
      const double kv = k[o * cin + i];
      const double* xrow = x.ptr() + i * plane;
      for (std::size_t p = 0; p < plane; ++p) orow[p] += kv * xrow[p];
    }
  }
  return t.record(std::move(out), {input, kernel, bias},
                  [input, kernel, bias, cin, cout, plane](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(input);
    Tensor* gk = tp.grad_buffer(kernel);
    Tensor* gb = tp.grad_buffer(bias);
    const Tensor& x = tp.value(input);
    const Tensor& k = tp.value(kernel);
    for (std::size_t o = 0; o < cout; ++o) {
      const double* grow = g.ptr() + o * plane;
      if (gb) {
        double s = 0.0;
        for (std::size_t p = 0; p < plane; ++p) s += grow[p];
        (*gb)[o] += s;
      }
      for (std::size_t i = 0; i < cin; ++i) {
        const double* xrow = x.ptr() + i * plane;
        if (gk) {
          double s = 0.0;
          for (std::size_t p = 0; p < plane; ++p) s += grow[p] * xrow[p];
          (*gk)[o * cin + i] += s;
        }
        if (gx) {
          const double kv = k[o * cin + i];
          double* gxrow = gx->ptr() + i * plane;
          for (std::size_t p = 0; p < plane; ++p) gxrow[p] += kv * grow[p];
        }
      }
    }
  });
}

Var global_avg_pool(Tape& t, Var input) {
  const Tensor& x = t.value(input);
  require_rank(x, 3, "global_avg_pool");
  const std::size_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor out({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t p = 0; p < plane; ++p) s += x[ch * plane + p];
    out[ch] = s / static_cast<double>(plane);
  }
  return t.record(std::move(out), {input}, [input, c, plane](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(input);
    if (!gx) return;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double v = g[ch] / static_cast<double>(plane);
      for (std::size_t p = 0; p < plane; ++p) (*gx)[ch * plane + p] += v;
    }
  });
}

Var dense(Tape& t, Var input, Var weight, Var bias) {
  const Tensor& x = t.value(input);
  const Tensor& wt = t.value(weight);
  require_rank(wt, 2, "dense weight");
  const std::size_t m = wt.dim(0), n = wt.dim(1);
  require(x.size() == n, "dense: weight expects " + std::to_string(n) + " inputs, got " +
                             shape_str(x.shape()));
  check_bias(t, bias, m, "dense");
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = wt.ptr() + i * n;
    double s = bias.valid() ? t.value(bias)[i] : 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    out[i] = s;
  }
  return t.record(std::move(out), {input, weight, bias},
                  [input, weight, bias, m, n](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(input);
    Tensor* gw = tp.grad_buffer(weight);
    Tensor* gb = tp.grad_buffer(bias);
    const Tensor& x = tp.value(input);
    const Tensor& wt = tp.value(weight);
    for (std::size_t i = 0; i < m; ++i) {
      const double gi = g[i];
      if (gb) (*gb)[i] += gi;
      if (gw) {
        double* row = gw->ptr() + i * n;
        for (std::size_t j = 0; j < n; ++j) row[j] += gi * x[j];
      }
      if (gx) {
        const double* row = wt.ptr() + i * n;
        for (std::size_t j = 0; j < n; ++j) (*gx)[j] += gi * row[j];
      }
    }
  });
}

Var channel_standardize(Tape& t, Var input, double eps) {
  const Tensor& x = t.value(input);
  require_rank(x, 3, "channel_standardize");
  const std::size_t c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor out(x.shape());
  std::vector<double> inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* xi = x.ptr() + ch * plane;
    double mean = 0.0;
    for (std::size_t p = 0; p < plane; ++p) mean += xi[p];
    mean /= static_cast<double>(plane);
    double var = 0.0;
    for (std::size_t p = 0; p < plane; ++p) var += (xi[p] - mean) * (xi[p] - mean);
    var /= static_cast<double>(plane);
    inv_std[ch] = 1.0 / std::sqrt(var + eps);
    for (std::size_t p = 0; p < plane; ++p) out[ch * plane + p] = (xi[p] - mean) * inv_std[ch];
  }
  return t.record(std::move(out), {input},
                  [input, c, plane, inv_std = std::move(inv_std)](Tape& tp, const Tensor& y,
                                                                  const Tensor& g) {
    Tensor* gx = tp.grad_buffer(input);
    if (!gx) return;
    const double n = static_cast<double>(plane);
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* gi = g.ptr() + ch * plane;
      const double* yi = y.ptr() + ch * plane;
      double mg = 0.0, mgy = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        mg += gi[p];
        mgy += gi[p] * yi[p];
      }
      mg /= n;
      mgy /= n;
      for (std::size_t p = 0; p < plane; ++p) {
        (*gx)[ch * plane + p] += inv_std[ch] * (gi[p] - mg - yi[p] * mgy);
      }
    }
  });
}

Var concat(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat: no inputs");
  const Tensor& first = t.value(parts.front());
  require(first.rank() >= 1, "concat: rank-0 input");
  Shape trailing(first.shape().begin() + 1, first.shape().end());
  std::size_t lead = 0;
  for (Var v : parts) {
    const Tensor& pv = t.value(v);
    require(pv.rank() == first.rank() &&
                Shape(pv.shape().begin() + 1, pv.shape().end()) == trailing,
            "concat: trailing dims differ");
    lead += pv.dim(0);
  }
  Shape shape{lead};
  shape.insert(shape.end(), trailing.begin(), trailing.end());
  Tensor out(shape);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (Var v : parts) {
    const Tensor& pv = t.value(v);
    std::copy(pv.data().begin(), pv.data().end(), out.data().begin() + static_cast<long>(off));
    offsets.push_back(off);
    off += pv.size();
  }
  return t.record(std::move(out), parts,
                  [parts, offsets = std::move(offsets)](Tape& tp, const Tensor&, const Tensor& g) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Tensor* gp = tp.grad_buffer(parts[i]);
      if (!gp) continue;
      for (std::size_t j = 0; j < gp->size(); ++j) (*gp)[j] += g[offsets[i] + j];
    }
  });
}

Var relu(Tape& t, Var x) {
  return unary(t, x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Tape& t, Var x) {
  return unary(t, x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Tape& t, Var x) {
  return unary(t, x,
               [](double v) {
                 return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
               },
               [](double, double y) { return y * (1.0 - y); });
}

Var affine(Tape& t, Var x, double scale, double shift) {
  return unary(t, x, [scale, shift](double v) { return scale * v + shift; },
               [scale](double, double) { return scale; });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "add");
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor&, const Tensor& g) {
    if (Tensor* ga = tp.grad_buffer(a)) for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    if (Tensor* gb = tp.grad_buffer(b)) for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i];
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "sub");
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor&, const Tensor& g) {
    if (Tensor* ga = tp.grad_buffer(a)) for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    if (Tensor* gb = tp.grad_buffer(b)) for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same_shape(av, bv, "mul");
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor&, const Tensor& g) {
    const Tensor& av = tp.value(a);
    const Tensor& bv = tp.value(b);
    if (Tensor* ga = tp.grad_buffer(a)) for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    if (Tensor* gb = tp.grad_buffer(b)) for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
  });
}

Var sum(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  double s = 0.0;
  for (double v : xv.data()) s += v;
  return t.record(Tensor::scalar(s), {x}, [x](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(x);
    if (!gx) return;
    for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += g[0];
  });
}

Var slice(Tape& t, Var x, std::size_t begin, std::size_t len) {
  const Tensor& xv = t.value(x);
  require(begin + len <= xv.size(), "slice: range exceeds " + shape_str(xv.shape()));
  Tensor out({len});
  for (std::size_t i = 0; i < len; ++i) out[i] = xv[begin + i];
  return t.record(std::move(out), {x}, [x, begin](Tape& tp, const Tensor&, const Tensor& g) {
    Tensor* gx = tp.grad_buffer(x);
    if (!gx) return;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[begin + i] += g[i];
  });
}

Var l1_loss(Tape& t, Var pred, Var target) {
  const Tensor& p = t.value(pred);
  const Tensor& y = t.value(target);
  require(p.size() == y.size() && p.size() > 0, "l1_loss: size mismatch " + shape_str(p.shape()) +
                                                     " vs " + shape_str(y.shape()));
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - y[i]);
  const double n = static_cast<double>(p.size());
  return t.record(Tensor::scalar(s / n), {pred, target},
                  [pred, target, n](Tape& tp, const Tensor&, const Tensor& g) {
    const Tensor& p = tp.value(pred);
    const Tensor& y = tp.value(target);
    Tensor* gp = tp.grad_buffer(pred);
    Tensor* gy = tp.grad_buffer(target);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i] - y[i];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      if (gp) (*gp)[i] += g[0] * s / n;
      if (gy) (*gy)[i] -= g[0] * s / n;
    }
  });
}

Var gru_cell(Tape& t, Var x, Var h, const GruParams& p) {
  const Tensor& hv = t.value(h);
  const Tensor& uz = t.value(p.u_z);
  require(uz.rank() == 2 && uz.dim(0) == hv.size() && uz.dim(1) == hv.size(),
          "gru_cell: U_z must be hidden x hidden");
  const Var z = sigmoid(t, add(t, dense(t, x, p.w_z, p.b_z), dense(t, h, p.u_z)));
  const Var r = sigmoid(t, add(t, dense(t, x, p.w_r, p.b_r), dense(t, h, p.u_r)));
  const Var n = tanh(t, add(t, dense(t, x, p.w_n, p.b_n), dense(t, mul(t, r, h), p.u_n)));
  return add(t, mul(t, affine(t, z, -1.0, 1.0), n), mul(t, z, h));
}

}  // namespace lidardrive::tensorgrad
