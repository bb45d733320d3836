#include "mrda/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mrda::nn {
namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapR = Eigen::Map<MatR<T>>;
template <typename T>
using CMapR = Eigen::Map<const MatR<T>>;

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

template <typename T>
bool any_grad(const Tape<T>& tape, std::initializer_list<Var> vars) {
  for (Var v : vars) {
    if (v.valid() && tape.requires_grad(v)) return true;
  }
  return false;
}

struct ConvGeometry {
  int n, cin, h, w, cout, kh, kw, stride, pad, ho, wo;
  int k() const { return cin * kh * kw; }
  int p() const { return ho * wo; }
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* cols) {
  const int P = g.p();
  for (int c = 0; c < g.cin; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        T* row = cols + static_cast<std::size_t>((c * g.kh + ki) * g.kw + kj) * P;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          T* dst = row + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wo, T{0});
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : T{0};
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, T* dx) {
  const int P = g.p();
  for (int c = 0; c < g.cin; ++c) {
    T* xc = dx + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        const T* row = cols + static_cast<std::size_t>((c * g.kh + ki) * g.kw + kj) * P;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          if (iy < 0 || iy >= g.h) continue;
          const T* src = row + static_cast<std::size_t>(oy) * g.wo;
          T* dst = xc + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var conv2d(Tape<T>& tape, Var xv, Var wv, Var bv, int stride, int padding) {
  const Tensor<T>& x = tape.value(xv);
  const Tensor<T>& w = tape.value(wv);
  require(x.rank() == 4, "conv2d: input must be N x C x H x W, got " + shape_to_string(x.shape()));
  require(w.rank() == 4, "conv2d: weights must be Cout x Cin x Kh x Kw");
  require(x.dim(1) == w.dim(1), "conv2d: input has " + std::to_string(x.dim(1)) +
                                    " channels but weights expect " + std::to_string(w.dim(1)));
  require(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), stride, padding, 0, 0};
  g.ho = (g.h + 2 * padding - g.kh) / stride + 1;
  g.wo = (g.w + 2 * padding - g.kw) / stride + 1;
  require(g.ho > 0 && g.wo > 0, "conv2d: kernel larger than padded input");
  if (bv.valid()) {
    require(tape.value(bv).numel() == static_cast<std::size_t>(g.cout), "conv2d: bias size mismatch");
  }

  const int K = g.k();
  const int P = g.p();
  Tensor<T> out(Shape{g.n, g.cout, g.ho, g.wo});
  const bool grad = any_grad(tape, {xv, wv, bv});
  const bool keep_cols = grad && !g.pointwise();
  AlignedVector<T> cols(keep_cols ? static_cast<std::size_t>(g.n) * K * P : 0);
  AlignedVector<T> scratch;
  CMapR<T> W(w.data(), g.cout, K);
  for (int n = 0; n < g.n; ++n) {
    const T* xn = x.data() + static_cast<std::size_t>(n) * g.cin * g.h * g.w;
    const T* cn = xn;
    if (!g.pointwise()) {
      T* dst;
      if (keep_cols) {
        dst = cols.data() + static_cast<std::size_t>(n) * K * P;
      } else {
        scratch.resize(static_cast<std::size_t>(K) * P);
        dst = scratch.data();
      }
      im2col(xn, g, dst);
      cn = dst;
    }
    MapR<T> Y(out.data() + static_cast<std::size_t>(n) * g.cout * P, g.cout, P);
    Y.noalias() = W * CMapR<T>(cn, K, P);
    if (bv.valid()) {
      const T* b = tape.value(bv).data();
      for (int co = 0; co < g.cout; ++co) Y.row(co).array() += b[co];
    }
  }

  return tape.record(std::move(out), grad,
                     [xv, wv, bv, g, cols = std::move(cols)](Tape<T>& t, const Tensor<T>& dy) {
    const int K = g.k();
    const int P = g.p();
    const bool need_x = t.requires_grad(xv);
    const bool need_w = t.requires_grad(wv);
    const bool need_b = bv.valid() && t.requires_grad(bv);
    const Tensor<T>& x = t.value(xv);
    CMapR<T> W(t.value(wv).data(), g.cout, K);
    AlignedVector<T> dcols(need_x && !g.pointwise() ? static_cast<std::size_t>(K) * P : 0);
    for (int n = 0; n < g.n; ++n) {
      CMapR<T> dY(dy.data() + static_cast<std::size_t>(n) * g.cout * P, g.cout, P);
      const T* cn = g.pointwise() ? x.data() + static_cast<std::size_t>(n) * g.cin * g.h * g.w
                                  : cols.data() + static_cast<std::size_t>(n) * K * P;
      if (need_w) {
        MapR<T> dW(t.grad_buffer(wv).data(), g.cout, K);
        dW.noalias() += dY * CMapR<T>(cn, K, P).transpose();
      }
      if (need_b) {
        T* db = t.grad_buffer(bv).data();
        for (int co = 0; co < g.cout; ++co) db[co] += dY.row(co).sum();
      }
      if (need_x) {
        T* dxn = t.grad_buffer(xv).data() + static_cast<std::size_t>(n) * g.cin * g.h * g.w;
        if (g.pointwise()) {
          MapR<T> dX(dxn, K, P);
          dX.noalias() += W.transpose() * dY;
        } else {
          MapR<T> dC(dcols.data(), K, P);
          dC.noalias() = W.transpose() * dY;
          col2im_add(dcols.data(), g, dxn);
        }
      }
    }
  });
}

template <typename T>
Var depthwise_conv2d(Tape<T>& tape, Var xv, Var wv) {
  const Tensor<T>& x = tape.value(xv);
  const Tensor<T>& w = tape.value(wv);
  require(x.rank() == 4, "depthwise_conv2d: input must be N x C x H x W");
  require(w.rank() == 4 && w.dim(1) == 1, "depthwise_conv2d: weights must be (N*C) x 1 x Kh x Kw");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int kh = w.dim(2), kw = w.dim(3);
  require(w.dim(0) == N * C, "depthwise_conv2d: weights carry " + std::to_string(w.dim(0)) +
                                 " channel kernels for " + std::to_string(N * C) + " input channels");
  require(kh % 2 == 1 && kw % 2 == 1, "depthwise_conv2d: kernel dims must be odd");
  const int ph = kh / 2, pw = kw / 2;

  Tensor<T> out(x.shape());
  for (int nc = 0; nc < N * C; ++nc) {
    const T* xp = x.data() + static_cast<std::size_t>(nc) * H * W;
    const T* wp = w.data() + static_cast<std::size_t>(nc) * kh * kw;
    T* op = out.data() + static_cast<std::size_t>(nc) * H * W;
    for (int i = 0; i < kh; ++i) {
      for (int j = 0; j < kw; ++j) {
        const T wij = wp[i * kw + j];
        const int dy = i - ph, dx = j - pw;
        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
        const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
        for (int y = y0; y < y1; ++y) {
          const T* src = xp + static_cast<std::size_t>(y + dy) * W + dx;
          T* dst = op + static_cast<std::size_t>(y) * W;
          for (int xx = x0; xx < x1; ++xx) dst[xx] += wij * src[xx];
        }
      }
    }
  }

  const bool grad = any_grad(tape, {xv, wv});
  return tape.record(std::move(out), grad, [xv, wv, N, C, H, W, kh, kw, ph, pw](Tape<T>& t, const Tensor<T>& g) {
    const bool need_x = t.requires_grad(xv);
    const bool need_w = t.requires_grad(wv);
    const T* xd = t.value(xv).data();
    const T* wd = t.value(wv).data();
    T* dxd = need_x ? t.grad_buffer(xv).data() : nullptr;
    T* dwd = need_w ? t.grad_buffer(wv).data() : nullptr;
    for (int nc = 0; nc < N * C; ++nc) {
      const std::size_t off = static_cast<std::size_t>(nc) * H * W;
      const T* gp = g.data() + off;
      for (int i = 0; i < kh; ++i) {
        for (int j = 0; j < kw; ++j) {
          const int dy = i - ph, dx = j - pw;
          const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
          const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
          const std::size_t widx = static_cast<std::size_t>(nc) * kh * kw + i * kw + j;
          const T wij = wd[widx];
          T acc{0};
          for (int y = y0; y < y1; ++y) {
            const std::size_t src_row = off + static_cast<std::size_t>(y + dy) * W + dx;
            const T* grow = gp + static_cast<std::size_t>(y) * W;
            if (need_w) {
              const T* xs = xd + src_row;
              for (int xx = x0; xx < x1; ++xx) acc += grow[xx] * xs[xx];
            }
            if (need_x) {
              T* dxs = dxd + src_row;
              for (int xx = x0; xx < x1; ++xx) dxs[xx] += wij * grow[xx];
            }
          }
          if (need_w) dwd[widx] += acc;
        }
      }
    }
  });
}

template <typename T>
Var pixel_shuffle(Tape<T>& tape, Var xv, int r) {
  const Tensor<T>& x = tape.value(xv);
  require(x.rank() == 4, "pixel_shuffle: input must be N x C x H x W");
  require(r >= 1 && x.dim(1) % (r * r) == 0, "pixel_shuffle: channels not divisible by r^2");
  const int N = x.dim(0), Cin = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int C = Cin / (r * r);
  Tensor<T> out(Shape{N, C, H * r, W * r});
  auto index_in = [=](int n, int c, int i, int j, int h, int w) {
    return ((static_cast<std::size_t>(n) * Cin + (c * r * r + i * r + j)) * H + h) * W + w;
  };
  auto index_out = [=](int n, int c, int i, int j, int h, int w) {
    return ((static_cast<std::size_t>(n) * C + c) * (H * r) + (h * r + i)) * (W * r) + (w * r + j);
  };
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) out[index_out(n, c, i, j, h, w)] = x[index_in(n, c, i, j, h, w)];

  return tape.record(std::move(out), tape.requires_grad(xv), [=](Tape<T>& t, const Tensor<T>& g) {
    T* dx = t.grad_buffer(xv).data();
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < r; ++j)
            for (int h = 0; h < H; ++h)
              for (int w = 0; w < W; ++w) dx[index_in(n, c, i, j, h, w)] += g[index_out(n, c, i, j, h, w)];
  });
}

template <typename T>
Var leaky_relu(Tape<T>& tape, Var xv, T slope) {
  Tensor<T> out = tape.value(xv);
  for (T& v : out.values()) v = v >= T{0} ? v : slope * v;
  return tape.record(std::move(out), tape.requires_grad(xv), [xv, slope](Tape<T>& t, const Tensor<T>& g) {
    const T* x = t.value(xv).data();
    T* dx = t.grad_buffer(xv).data();
    for (std::size_t i = 0; i < g.numel(); ++i) dx[i] += x[i] >= T{0} ? g[i] : slope * g[i];
  });
}

template <typename T>
Var sigmoid(Tape<T>& tape, Var xv) {
  Tensor<T> out = tape.value(xv);
  for (T& v : out.values()) v = T{1} / (T{1} + std::exp(-v));
  const int self = static_cast<int>(tape.size());
  return tape.record(std::move(out), tape.requires_grad(xv), [xv, self](Tape<T>& t, const Tensor<T>& g) {
    const T* y = t.value(Var{self}).data();
    T* dx = t.grad_buffer(xv).data();
    for (std::size_t i = 0; i < g.numel(); ++i) dx[i] += g[i] * y[i] * (T{1} - y[i]);
  });
}

template <typename T>
Var add(Tape<T>& tape, Var av, Var bv) {
  const Tensor<T>& a = tape.value(av);
  const Tensor<T>& b = tape.value(bv);
  require(a.shape() == b.shape(), "add: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                      shape_to_string(b.shape()));
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
  return tape.record(std::move(out), any_grad(tape, {av, bv}), [av, bv](Tape<T>& t, const Tensor<T>& g) {
    t.accumulate(av, g);
    t.accumulate(bv, g);
  });
}

template <typename T>
Var mul(Tape<T>& tape, Var av, Var bv) {
  const Tensor<T>& a = tape.value(av);
  const Tensor<T>& b = tape.value(bv);
  require(a.shape() == b.shape(), "mul: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                      shape_to_string(b.shape()));
  Tensor<T> out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
  return tape.record(std::move(out), any_grad(tape, {av, bv}), [av, bv](Tape<T>& t, const Tensor<T>& g) {
    const T* a = t.value(av).data();
    const T* b = t.value(bv).data();
    if (t.requires_grad(av)) {
      T* da = t.grad_buffer(av).data();
      for (std::size_t i = 0; i < g.numel(); ++i) da[i] += g[i] * b[i];
    }
    if (t.requires_grad(bv)) {
      T* db = t.grad_buffer(bv).data();
      for (std::size_t i = 0; i < g.numel(); ++i) db[i] += g[i] * a[i];
    }
  });
}

template <typename T>
Var scale(Tape<T>& tape, Var av, T s) {
  Tensor<T> out = tape.value(av);
  for (T& v : out.values()) v *= s;
  return tape.record(std::move(out), tape.requires_grad(av), [av, s](Tape<T>& t, const Tensor<T>& g) {
    T* da = t.grad_buffer(av).data();
    for (std::size_t i = 0; i < g.numel(); ++i) da[i] += s * g[i];
  });
}

template <typename T>
Var linear(Tape<T>& tape, Var xv, Var wv, Var bv) {
  const Tensor<T>& x = tape.value(xv);
  const Tensor<T>& w = tape.value(wv);
  require(x.rank() == 2 && w.rank() == 2, "linear: expects N x In input and Out x In weights");
  const int N = x.dim(0), In = x.dim(1), Out = w.dim(0);
  require(w.dim(1) == In, "linear: input width " + std::to_string(In) + " but weights expect " +
                              std::to_string(w.dim(1)));
  if (bv.valid()) require(tape.value(bv).numel() == static_cast<std::size_t>(Out), "linear: bias size mismatch");
  Tensor<T> out(Shape{N, Out});
  MapR<T> Y(out.data(), N, Out);
  Y.noalias() = CMapR<T>(x.data(), N, In) * CMapR<T>(w.data(), Out, In).transpose();
  if (bv.valid()) {
    const T* b = tape.value(bv).data();
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < Out; ++o) Y(n, o) += b[o];
  }
  return tape.record(std::move(out), any_grad(tape, {xv, wv, bv}),
                     [xv, wv, bv, N, In, Out](Tape<T>& t, const Tensor<T>& g) {
    CMapR<T> dY(g.data(), N, Out);
    if (t.requires_grad(xv)) {
      MapR<T> dX(t.grad_buffer(xv).data(), N, In);
      dX.noalias() += dY * CMapR<T>(t.value(wv).data(), Out, In);
    }
    if (t.requires_grad(wv)) {
      MapR<T> dW(t.grad_buffer(wv).data(), Out, In);
      dW.noalias() += dY.transpose() * CMapR<T>(t.value(xv).data(), N, In);
    }
    if (bv.valid() && t.requires_grad(bv)) {
      T* db = t.grad_buffer(bv).data();
      for (int n = 0; n < N; ++n)
        for (int o = 0; o < Out; ++o) db[o] += dY(n, o);
    }
  });
}

template <typename T>
Var global_avg_pool(Tape<T>& tape, Var xv) {
  const Tensor<T>& x = tape.value(xv);
  require(x.rank() == 4, "global_avg_pool: input must be N x C x H x W");
  const int N = x.dim(0), C = x.dim(1);
  const std::size_t HW = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor<T> out(Shape{N, C});
  for (int nc = 0; nc < N * C; ++nc) {
    T acc{0};
    const T* p = x.data() + nc * HW;
    for (std::size_t i = 0; i < HW; ++i) acc += p[i];
    out[static_cast<std::size_t>(nc)] = acc / static_cast<T>(HW);
  }
  return tape.record(std::move(out), tape.requires_grad(xv), [xv, N, C, HW](Tape<T>& t, const Tensor<T>& g) {
    T* dx = t.grad_buffer(xv).data();
    for (int nc = 0; nc < N * C; ++nc) {
      const T v = g[static_cast<std::size_t>(nc)] / static_cast<T>(HW);
      T* p = dx + nc * HW;
      for (std::size_t i = 0; i < HW; ++i) p[i] += v;
    }
  });
}

template <typename T>
Var reshape(Tape<T>& tape, Var xv, Shape shape) {
  Tensor<T> out = tape.value(xv).reshaped(std::move(shape));
  return tape.record(std::move(out), tape.requires_grad(xv),
                     [xv](Tape<T>& t, const Tensor<T>& g) { t.accumulate(xv, g); });
}

template <typename T>
Var sum(Tape<T>& tape, Var xv) {
  const Tensor<T>& x = tape.value(xv);
  T acc{0};
  for (T v : x.values()) acc += v;
  return tape.record(Tensor<T>(Shape{1}, acc), tape.requires_grad(xv), [xv](Tape<T>& t, const Tensor<T>& g) {
    Tensor<T>& dx = t.grad_buffer(xv);
    for (T& v : dx.values()) v += g[0];
  });
}

template <typename T>
Var mean_abs_diff(Tape<T>& tape, Var av, Var bv) {
  const Tensor<T>& a = tape.value(av);
  const Tensor<T>& b = tape.value(bv);
  require(a.shape() == b.shape(), "mean_abs_diff: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                      shape_to_string(b.shape()));
  require(a.numel() > 0, "mean_abs_diff: empty input");
  T acc{0};
  for (std::size_t i = 0; i < a.numel(); ++i) acc += std::abs(a[i] - b[i]);
  const T n = static_cast<T>(a.numel());
  return tape.record(Tensor<T>(Shape{1}, acc / n), any_grad(tape, {av, bv}),
                     [av, bv, n](Tape<T>& t, const Tensor<T>& g) {
    const T* a = t.value(av).data();
    const T* b = t.value(bv).data();
    const std::size_t count = t.value(av).numel();
    const T s = g[0] / n;
    auto sign = [](T d) { return d > T{0} ? T{1} : (d < T{0} ? T{-1} : T{0}); };
    if (t.requires_grad(av)) {
      T* da = t.grad_buffer(av).data();
      for (std::size_t i = 0; i < count; ++i) da[i] += s * sign(a[i] - b[i]);
    }
    if (t.requires_grad(bv)) {
      T* db = t.grad_buffer(bv).data();
      for (std::size_t i = 0; i < count; ++i) db[i] -= s * sign(a[i] - b[i]);
    }
  });
}

namespace {

template <typename T>
void log_softmax_row(const T* v, int d, T* out) {
  T mx = v[0];
  for (int i = 1; i < d; ++i) mx = std::max(mx, v[i]);
  T s{0};
  for (int i = 0; i < d; ++i) s += std::exp(v[i] - mx);
  const T lse = mx + std::log(s);
  for (int i = 0; i < d; ++i) out[i] = v[i] - lse;
}

}  // namespace

template <typename T>
Var softmax_kl(Tape<T>& tape, Var tv, Var sv) {
  const Tensor<T>& te = tape.value(tv);
  const Tensor<T>& st = tape.value(sv);
  require(te.shape() == st.shape(), "softmax_kl: shape mismatch " + shape_to_string(te.shape()) + " vs " +
                                        shape_to_string(st.shape()));
  require(te.rank() >= 1 && te.numel() > 0, "softmax_kl: empty input");
  const int D = te.shape().back();
  const int rows = static_cast<int>(te.numel() / static_cast<std::size_t>(D));
  std::vector<T> lp(static_cast<std::size_t>(D)), lq(static_cast<std::size_t>(D));
  T total{0};
  for (int r = 0; r < rows; ++r) {
    log_softmax_row(te.data() + static_cast<std::size_t>(r) * D, D, lp.data());
    log_softmax_row(st.data() + static_cast<std::size_t>(r) * D, D, lq.data());
    T kl{0};
    for (int i = 0; i < D; ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
    total += kl / static_cast<T>(D);
  }
  total /= static_cast<T>(rows);
  return tape.record(Tensor<T>(Shape{1}, total), tape.requires_grad(sv),
                     [tv, sv, D, rows](Tape<T>& t, const Tensor<T>& g) {
    const T* te = t.value(tv).data();
    const T* st = t.value(sv).data();
    T* ds = t.grad_buffer(sv).data();
    std::vector<T> lp(static_cast<std::size_t>(D)), lq(static_cast<std::size_t>(D));
    const T s = g[0] / (static_cast<T>(D) * static_cast<T>(rows));
    for (int r = 0; r < rows; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * D;
      log_softmax_row(te + off, D, lp.data());
      log_softmax_row(st + off, D, lq.data());
      for (int i = 0; i < D; ++i) ds[off + i] += s * (std::exp(lq[i]) - std::exp(lp[i]));
    }
  });
}

template <typename T>
Var detach(Tape<T>& tape, Var xv) {
  return tape.constant(tape.value(xv));
}

#define MRDA_INSTANTIATE_OPS(T)                                          \
  template Var conv2d<T>(Tape<T>&, Var, Var, Var, int, int);             \
  template Var depthwise_conv2d<T>(Tape<T>&, Var, Var);                  \
  template Var pixel_shuffle<T>(Tape<T>&, Var, int);                     \
  template Var leaky_relu<T>(Tape<T>&, Var, T);                          \
  template Var sigmoid<T>(Tape<T>&, Var);                                \
  template Var add<T>(Tape<T>&, Var, Var);                               \
  template Var mul<T>(Tape<T>&, Var, Var);                               \
  template Var scale<T>(Tape<T>&, Var, T);                               \
  template Var linear<T>(Tape<T>&, Var, Var, Var);                       \
  template Var global_avg_pool<T>(Tape<T>&, Var);                        \
  template Var reshape<T>(Tape<T>&, Var, Shape);                         \
  template Var sum<T>(Tape<T>&, Var);                                    \
  template Var mean_abs_diff<T>(Tape<T>&, Var, Var);                     \
  template Var softmax_kl<T>(Tape<T>&, Var, Var);                        \
  template Var detach<T>(Tape<T>&, Var);

MRDA_INSTANTIATE_OPS(float)
MRDA_INSTANTIATE_OPS(double)

}  // namespace mrda::nn
