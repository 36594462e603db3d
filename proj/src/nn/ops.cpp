#include "gcs/nn/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "gcs/common/error.hpp"
#include "gcs/common/hash.hpp"
#include "gcs/common/stats.hpp"
#include "gcs/nn/kernels.hpp"

namespace gcs::nn {

namespace {

KernelBackend g_backend = KernelBackend::parallel;
thread_local BranchRecorder* g_recorder = nullptr;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                     " differ");
  }
}

void accumulate(Node& parent, const double* g, std::size_t n) {
  if (!parent.requires_grad) return;
  auto& buf = parent.grad_buffer();
  for (std::size_t i = 0; i < n; ++i) buf[i] += g[i];
}

template <class F, class D>
Var unary(const Var& x, F f, D dfdy_dx) {
  Tensor out(x.shape());
  const auto& in = x.value().data;
  for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = f(in[i]);
  return make_result(std::move(out), {x}, [dfdy_dx](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * dfdy_dx(p.value.data[i], n.value.data[i]);
  });
}

std::size_t rows_of(const Shape& s) { return shape_size(s) / static_cast<std::size_t>(s.back()); }

ConvGeom conv_geom(const Shape& xs, const Shape& ws, int stride, int pad) {
  if (xs.size() != 5) throw ShapeError("conv3d expects [N, X, Y, Z, C] input, got " + shape_string(xs));
  if (ws.size() != 5 || ws[0] != ws[1] || ws[1] != ws[2]) throw ShapeError("conv3d expects cubic [k, k, k, ci, co] weights");
  if (ws[3] != xs[4]) throw ShapeError("conv3d input channels " + std::to_string(xs[4]) + " != weight " + std::to_string(ws[3]));
  ConvGeom g;
  g.n = xs[0];
  g.X = xs[1];
  g.Y = xs[2];
  g.Z = xs[3];
  g.ci = xs[4];
  g.co = ws[4];
  g.k = ws[0];
  g.stride = stride;
  g.pad = pad;
  if (stride < 1 || pad < 0 || g.OX() < 1 || g.OY() < 1 || g.OZ() < 1) throw ShapeError("conv3d output would be empty");
  return g;
}

}  // namespace

BranchRecorder::BranchRecorder() : hash_(kFnvOffset), previous_(g_recorder) { g_recorder = this; }
BranchRecorder::~BranchRecorder() { g_recorder = previous_; }

void record_branch(std::uint64_t v) {
  if (g_recorder) g_recorder->hash_ = (g_recorder->hash_ ^ v) * kFnvPrime;
}

void set_kernel_backend(KernelBackend b) { g_backend = b; }
KernelBackend kernel_backend() { return g_backend; }

Var constant(Tensor t) { return Var(std::move(t), false); }
Var parameter(Tensor t) { return Var(std::move(t), true); }

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.value().data[i] + b.value().data[i];
  return make_result(std::move(out), {a, b}, [](Node& n) {
    accumulate(*n.parents[0], n.grad.data(), n.grad.size());
    accumulate(*n.parents[1], n.grad.data(), n.grad.size());
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.value().data[i] - b.value().data[i];
  return make_result(std::move(out), {a, b}, [](Node& n) {
    accumulate(*n.parents[0], n.grad.data(), n.grad.size());
    Node& q = *n.parents[1];
    if (q.requires_grad) {
      auto& g = q.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.value().data[i] * b.value().data[i];
  return make_result(std::move(out), {a, b}, [](Node& n) {
    Node& p = *n.parents[0];
    Node& q = *n.parents[1];
    if (p.requires_grad) {
      auto& g = p.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * q.value.data[i];
    }
    if (q.requires_grad) {
      auto& g = q.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * p.value.data[i];
    }
  });
}

Var scale(const Var& a, double s) {
  return unary(a, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var relu(const Var& x) {
  if (g_recorder) {
    for (double v : x.value().data) record_branch(v > 0.0);
  }
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& x) {
  return unary(
      x, [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var conv3d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const ConvGeom g = conv_geom(x.shape(), w.shape(), stride, pad);
  if (b.defined() && (b.shape().size() != 1 || b.shape()[0] != g.co)) throw ShapeError("conv3d bias must be [co]");
  Tensor out({g.n, g.OX(), g.OY(), g.OZ(), g.co});
  const double* bias = b.defined() ? b.value().ptr() : nullptr;
  if (g_backend == KernelBackend::parallel) {
    parallel::conv3d_forward(g, x.value().ptr(), w.value().ptr(), bias, out.ptr());
  } else {
    serial::conv3d_forward(g, x.value().ptr(), w.value().ptr(), bias, out.ptr());
  }
  std::vector<Var> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_result(std::move(out), parents, [g](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    Node* pb = n.parents.size() > 2 ? n.parents[2].get() : nullptr;
    const bool par = g_backend == KernelBackend::parallel;
    if (px.requires_grad) {
      std::vector<double> gin(px.value.size());
      if (par) {
        parallel::conv3d_backward_input(g, n.grad.data(), pw.value.ptr(), gin.data());
      } else {
        serial::conv3d_backward_input(g, n.grad.data(), pw.value.ptr(), gin.data());
      }
      accumulate(px, gin.data(), gin.size());
    }
    const bool need_b = pb && pb->requires_grad;
    if (pw.requires_grad || need_b) {
      std::vector<double> gw(pw.value.size()), gb(static_cast<std::size_t>(g.co));
      if (par) {
        parallel::conv3d_backward_weight(g, px.value.ptr(), n.grad.data(), gw.data(), gb.data());
      } else {
        serial::conv3d_backward_weight(g, px.value.ptr(), n.grad.data(), gw.data(), gb.data());
      }
      accumulate(pw, gw.data(), gw.size());
      if (need_b) accumulate(*pb, gb.data(), gb.size());
    }
  });
}

Var max_pool2(const Var& x) {
  const auto& s = x.shape();
  if (s.size() != 5 || s[1] % 2 || s[2] % 2 || s[3] % 2) throw ShapeError("max_pool2 needs even spatial dims, got " + shape_string(s));
  Tensor out({s[0], s[1] / 2, s[2] / 2, s[3] / 2, s[4]});
  auto argmax = std::make_shared<std::vector<int>>(out.size());
  if (g_backend == KernelBackend::parallel) {
    parallel::max_pool2_forward(s[0], s[1], s[2], s[3], s[4], x.value().ptr(), out.ptr(), argmax->data());
  } else {
    serial::max_pool2_forward(s[0], s[1], s[2], s[3], s[4], x.value().ptr(), out.ptr(), argmax->data());
  }
  if (g_recorder) {
    for (int a : *argmax) record_branch(static_cast<std::uint64_t>(a));
  }
  return make_result(std::move(out), {x}, [argmax](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < n.grad.size(); ++i) g[static_cast<std::size_t>((*argmax)[i])] += n.grad[i];
  });
}

Var upsample2(const Var& x) {
  const auto& s = x.shape();
  if (s.size() != 5) throw ShapeError("upsample2 expects [N, X, Y, Z, C]");
  Tensor out({s[0], 2 * s[1], 2 * s[2], 2 * s[3], s[4]});
  if (g_backend == KernelBackend::parallel) {
    parallel::upsample2_forward(s[0], s[1], s[2], s[3], s[4], x.value().ptr(), out.ptr());
  } else {
    serial::upsample2_forward(s[0], s[1], s[2], s[3], s[4], x.value().ptr(), out.ptr());
  }
  const Shape in_shape = s;
  return make_result(std::move(out), {x}, [in_shape](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    std::vector<double> gin(p.value.size());
    if (g_backend == KernelBackend::parallel) {
      parallel::upsample2_backward(in_shape[0], in_shape[1], in_shape[2], in_shape[3], in_shape[4], n.grad.data(), gin.data());
    } else {
      serial::upsample2_backward(in_shape[0], in_shape[1], in_shape[2], in_shape[3], in_shape[4], n.grad.data(), gin.data());
    }
    accumulate(p, gin.data(), gin.size());
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const int c = x.shape().back();
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) throw ShapeError("layer_norm parameters must be [C]");
  const std::size_t rows = rows_of(x.shape());
  Tensor out(x.shape());
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  const double* in = x.value().ptr();
  const double* ga = gamma.value().ptr();
  const double* be = beta.value().ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in + r * c;
    double m = 0.0;
    for (int j = 0; j < c; ++j) m += row[j];
    m /= c;
    double v = 0.0;
    for (int j = 0; j < c; ++j) v += (row[j] - m) * (row[j] - m);
    v /= c;
    const double is = 1.0 / std::sqrt(v + eps);
    (*inv_std)[r] = is;
    for (int j = 0; j < c; ++j) {
      const double h = (row[j] - m) * is;
      (*xhat)[r * c + j] = h;
      out.data[r * c + j] = h * ga[j] + be[j];
    }
  }
  return make_result(std::move(out), {x, gamma, beta}, [xhat, inv_std, rows, c](Node& n) {
    Node& px = *n.parents[0];
    Node& pg = *n.parents[1];
    Node& pb = *n.parents[2];
    const double* ga = pg.value.ptr();
    if (pg.requires_grad || pb.requires_grad) {
      std::vector<double> gg(c, 0.0), gbeta(c, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (int j = 0; j < c; ++j) {
          gg[j] += n.grad[r * c + j] * (*xhat)[r * c + j];
          gbeta[j] += n.grad[r * c + j];
        }
      }
      accumulate(pg, gg.data(), gg.size());
      accumulate(pb, gbeta.data(), gbeta.size());
    }
    if (px.requires_grad) {
      auto& g = px.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < c; ++j) {
          const double dh = n.grad[r * c + j] * ga[j];
          s1 += dh;
          s2 += dh * (*xhat)[r * c + j];
        }
        for (int j = 0; j < c; ++j) {
          const double dh = n.grad[r * c + j] * ga[j];
          g[r * c + j] += (*inv_std)[r] * (dh - s1 / c - (*xhat)[r * c + j] * s2 / c);
        }
      }
    }
  });
}

Var dense(const Var& x, const Var& w, const Var& b) {
  if (w.shape().size() != 2 || w.shape()[0] != x.shape().back()) {
    throw ShapeError("dense weight " + shape_string(w.shape()) + " does not match input " + shape_string(x.shape()));
  }
  const int ci = w.shape()[0], co = w.shape()[1];
  if (b.defined() && b.shape() != Shape{co}) throw ShapeError("dense bias must be [co]");
  const auto rows = static_cast<Eigen::Index>(rows_of(x.shape()));
  Shape os = x.shape();
  os.back() = co;
  Tensor out(os);
  MapMat O(out.ptr(), rows, co);
  O.noalias() = MapConstMat(x.value().ptr(), rows, ci) * MapConstMat(w.value().ptr(), ci, co);
  if (b.defined()) O.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.value().ptr(), co);
  std::vector<Var> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_result(std::move(out), parents, [rows, ci, co](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    MapConstMat G(n.grad.data(), rows, co);
    if (px.requires_grad) {
      MapMat(px.grad_buffer().data(), rows, ci).noalias() += G * MapConstMat(pw.value.ptr(), ci, co).transpose();
    }
    if (pw.requires_grad) {
      MapMat(pw.grad_buffer().data(), ci, co).noalias() += MapConstMat(px.value.ptr(), rows, ci).transpose() * G;
    }
    if (n.parents.size() > 2 && n.parents[2]->requires_grad) {
      Eigen::Map<Eigen::RowVectorXd>(n.parents[2]->grad_buffer().data(), co) += G.colwise().sum();
    }
  });
}

Var softmax(const Var& x) {
  const int c = x.shape().back();
  const std::size_t rows = rows_of(x.shape());
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.value().ptr() + r * c;
    double* o = out.ptr() + r * c;
    const double mx = *std::max_element(in, in + c);
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += (o[j] = std::exp(in[j] - mx));
    for (int j = 0; j < c; ++j) o[j] /= s;
  }
  return make_result(std::move(out), {x}, [rows, c](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = n.value.ptr() + r * c;
      const double* gy = n.grad.data() + r * c;
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += gy[j] * y[j];
      for (int j = 0; j < c; ++j) g[r * c + j] += y[j] * (gy[j] - dot);
    }
  });
}

Var bmm(const Var& a, const Var& b, bool transpose_b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  if (as.size() != 3 || bs.size() != 3 || as[0] != bs[0]) throw ShapeError("bmm expects [B, M, K] and [B, K, N]");
  const int B = as[0], M = as[1], K = as[2];
  const int N = transpose_b ? bs[1] : bs[2];
  if ((transpose_b ? bs[2] : bs[1]) != K) throw ShapeError("bmm inner dimensions differ");
  Tensor out({B, M, N});
  for (int i = 0; i < B; ++i) {
    MapConstMat A(a.value().ptr() + static_cast<std::size_t>(i) * M * K, M, K);
    MapMat O(out.ptr() + static_cast<std::size_t>(i) * M * N, M, N);
    if (transpose_b) {
      O.noalias() = A * MapConstMat(b.value().ptr() + static_cast<std::size_t>(i) * N * K, N, K).transpose();
    } else {
      O.noalias() = A * MapConstMat(b.value().ptr() + static_cast<std::size_t>(i) * K * N, K, N);
    }
  }
  return make_result(std::move(out), {a, b}, [B, M, K, N, transpose_b](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    for (int i = 0; i < B; ++i) {
      MapConstMat G(n.grad.data() + static_cast<std::size_t>(i) * M * N, M, N);
      MapConstMat A(pa.value.ptr() + static_cast<std::size_t>(i) * M * K, M, K);
      if (transpose_b) {
        MapConstMat Bm(pb.value.ptr() + static_cast<std::size_t>(i) * N * K, N, K);
        if (pa.requires_grad) MapMat(pa.grad_buffer().data() + static_cast<std::size_t>(i) * M * K, M, K).noalias() += G * Bm;
        if (pb.requires_grad) MapMat(pb.grad_buffer().data() + static_cast<std::size_t>(i) * N * K, N, K).noalias() += G.transpose() * A;
      } else {
        MapConstMat Bm(pb.value.ptr() + static_cast<std::size_t>(i) * K * N, K, N);
        if (pa.requires_grad) MapMat(pa.grad_buffer().data() + static_cast<std::size_t>(i) * M * K, M, K).noalias() += G * Bm.transpose();
        if (pb.requires_grad) MapMat(pb.grad_buffer().data() + static_cast<std::size_t>(i) * K * N, K, N).noalias() += A.transpose() * G;
      }
    }
  });
}

Var reshape(const Var& x, Shape shape) {
  if (shape_size(shape) != x.size()) throw ShapeError("reshape " + shape_string(x.shape()) + " -> " + shape_string(shape));
  Tensor out(std::move(shape), x.value().data);
  return make_result(std::move(out), {x}, [](Node& n) { accumulate(*n.parents[0], n.grad.data(), n.grad.size()); });
}

Var permute(const Var& x, const std::vector<int>& axes) {
  const Shape& s = x.shape();
  const int r = static_cast<int>(s.size());
  if (static_cast<int>(axes.size()) != r) throw ShapeError("permute axis count mismatch");
  std::vector<int> check(axes);
  std::sort(check.begin(), check.end());
  for (int i = 0; i < r; ++i) {
    if (check[i] != i) throw ShapeError("permute axes must be a permutation");
  }
  std::vector<std::size_t> in_stride(r, 1);
  for (int i = r - 2; i >= 0; --i) in_stride[i] = in_stride[i + 1] * s[i + 1];
  Shape os(r);
  for (int i = 0; i < r; ++i) os[i] = s[axes[i]];
  // map[out_index] = in_index
  auto map = std::make_shared<std::vector<std::size_t>>(x.size());
  std::vector<int> idx(r, 0);
  for (std::size_t o = 0; o < x.size(); ++o) {
    std::size_t src = 0;
    for (int i = 0; i < r; ++i) src += idx[i] * in_stride[axes[i]];
    (*map)[o] = src;
    for (int i = r - 1; i >= 0; --i) {
      if (++idx[i] < os[i]) break;
      idx[i] = 0;
    }
  }
  Tensor out(os);
  for (std::size_t o = 0; o < out.size(); ++o) out.data[o] = x.value().data[(*map)[o]];
  return make_result(std::move(out), {x}, [map](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t o = 0; o < n.grad.size(); ++o) g[(*map)[o]] += n.grad[o];
  });
}

Var concat_last(const Var& a, const Var& b) {
  Shape sa = a.shape(), sb = b.shape();
  const int ca = sa.back(), cb = sb.back();
  sa.pop_back();
  sb.pop_back();
  if (sa != sb) throw ShapeError("concat_last leading shapes differ");
  Shape os = a.shape();
  os.back() = ca + cb;
  const std::size_t rows = rows_of(a.shape());
  Tensor out(os);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.value().ptr() + r * ca, ca, out.ptr() + r * (ca + cb));
    std::copy_n(b.value().ptr() + r * cb, cb, out.ptr() + r * (ca + cb) + ca);
  }
  return make_result(std::move(out), {a, b}, [rows, ca, cb](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* g = n.grad.data() + r * (ca + cb);
      if (pa.requires_grad) {
        auto& ga = pa.grad_buffer();
        for (int j = 0; j < ca; ++j) ga[r * ca + j] += g[j];
      }
      if (pb.requires_grad) {
        auto& gb = pb.grad_buffer();
        for (int j = 0; j < cb; ++j) gb[r * cb + j] += g[ca + j];
      }
    }
  });
}

Var slice_last(const Var& x, int begin, int end) {
  const int c = x.shape().back();
  if (begin < 0 || end > c || begin >= end) throw ShapeError("slice_last range out of bounds");
  const int w = end - begin;
  Shape os = x.shape();
  os.back() = w;
  const std::size_t rows = rows_of(x.shape());
  Tensor out(os);
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(x.value().ptr() + r * c + begin, w, out.ptr() + r * w);
  return make_result(std::move(out), {x}, [rows, c, begin, w](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      for (int j = 0; j < w; ++j) g[r * c + begin + j] += n.grad[r * w + j];
    }
  });
}

Var repeat_leading(const Var& x, int times) {
  if (times < 1) throw ShapeError("repeat count must be positive");
  Shape os = x.shape();
  const std::size_t block = x.size() / static_cast<std::size_t>(os[0]);
  const int lead = os[0];
  os[0] *= times;
  Tensor out(os);
  for (int i = 0; i < lead; ++i) {
    for (int t = 0; t < times; ++t) {
      std::copy_n(x.value().ptr() + i * block, block, out.ptr() + (static_cast<std::size_t>(i) * times + t) * block);
    }
  }
  return make_result(std::move(out), {x}, [lead, times, block](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (int i = 0; i < lead; ++i) {
      for (int t = 0; t < times; ++t) {
        const double* src = n.grad.data() + (static_cast<std::size_t>(i) * times + t) * block;
        for (std::size_t j = 0; j < block; ++j) g[i * block + j] += src[j];
      }
    }
  });
}

Var stack_axis1(const std::vector<Var>& xs) {
  if (xs.empty()) throw ShapeError("stack needs at least one tensor");
  const Shape s = xs[0].shape();
  for (const auto& x : xs) {
    if (x.shape() != s) throw ShapeError("stacked tensors must share a shape");
  }
  const int lead = s[0];
  const int T = static_cast<int>(xs.size());
  const std::size_t block = xs[0].size() / static_cast<std::size_t>(lead);
  Shape os = s;
  os.insert(os.begin() + 1, T);
  Tensor out(os);
  for (int i = 0; i < lead; ++i) {
    for (int t = 0; t < T; ++t) {
      std::copy_n(xs[t].value().ptr() + i * block, block, out.ptr() + (static_cast<std::size_t>(i) * T + t) * block);
    }
  }
  return make_result(std::move(out), xs, [lead, T, block](Node& n) {
    for (int t = 0; t < T; ++t) {
      Node& p = *n.parents[t];
      if (!p.requires_grad) continue;
      auto& g = p.grad_buffer();
      for (int i = 0; i < lead; ++i) {
        const double* src = n.grad.data() + (static_cast<std::size_t>(i) * T + t) * block;
        for (std::size_t j = 0; j < block; ++j) g[i * block + j] += src[j];
      }
    }
  });
}

Var add_broadcast_leading(const Var& x, const Var& table) {
  const std::size_t block = table.size();
  if (x.size() % block != 0 || x.shape().size() != table.shape().size() + 1 ||
      !std::equal(table.shape().begin(), table.shape().end(), x.shape().begin() + 1)) {
    throw ShapeError("broadcast table " + shape_string(table.shape()) + " does not match " + shape_string(x.shape()));
  }
  const std::size_t lead = x.size() / block;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < lead; ++i) {
    for (std::size_t j = 0; j < block; ++j) out.data[i * block + j] = x.value().data[i * block + j] + table.value().data[j];
  }
  return make_result(std::move(out), {x, table}, [lead, block](Node& n) {
    accumulate(*n.parents[0], n.grad.data(), n.grad.size());
    Node& p = *n.parents[1];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < lead; ++i) {
      for (std::size_t j = 0; j < block; ++j) g[j] += n.grad[i * block + j];
    }
  });
}

Var mul_channel_broadcast(const Var& x, const Var& a) {
  Shape sx = x.shape(), sa = a.shape();
  if (sa.back() != 1) throw ShapeError("channel broadcast needs a single-channel factor");
  const int c = sx.back();
  sx.pop_back();
  sa.pop_back();
  if (sx != sa) throw ShapeError("channel broadcast leading shapes differ");
  const std::size_t rows = a.size();
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    for (int j = 0; j < c; ++j) out.data[r * c + j] = x.value().data[r * c + j] * a.value().data[r];
  }
  return make_result(std::move(out), {x, a}, [rows, c](Node& n) {
    Node& px = *n.parents[0];
    Node& pa = *n.parents[1];
    if (px.requires_grad) {
      auto& g = px.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (int j = 0; j < c; ++j) g[r * c + j] += n.grad[r * c + j] * pa.value.data[r];
      }
    }
    if (pa.requires_grad) {
      auto& g = pa.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += n.grad[r * c + j] * px.value.data[r * c + j];
        g[r] += s;
      }
    }
  });
}

Var sum(const Var& x) {
  Tensor out({1}, stats::pairwise_sum(x.value().data));
  return make_result(std::move(out), {x}, [](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (auto& v : g) v += n.grad[0];
  });
}

Var mean(const Var& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Var mse(const Var& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape) {
    throw ShapeError("mse shapes " + shape_string(prediction.shape()) + " and " + shape_string(target.shape) + " differ");
  }
  const std::size_t n = target.size();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = prediction.value().data[i] - target.data[i];
    sq[i] = d * d;
  }
  Tensor out({1}, stats::pairwise_sum(sq) / static_cast<double>(n));
  auto tgt = std::make_shared<std::vector<double>>(target.data);
  return make_result(std::move(out), {prediction}, [tgt, n](Node& node) {
    Node& p = *node.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    const double s = 2.0 * node.grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) g[i] += s * (p.value.data[i] - (*tgt)[i]);
  });
}

}  // namespace gcs::nn
