#include "gcs/nn/kernels.hpp"

#include <cstddef>
#include <cstring>

namespace gcs::nn {

namespace {

using std::size_t;

inline size_t vox(int n, int x, int y, int z, int X, int Y, int Z) {
  return ((static_cast<size_t>(n) * X + x) * Y + y) * Z + z;
}

// One output voxel row (fixed n, ox, oy) over all oz.
inline void conv_row(const ConvGeom& g, const double* in, const double* w, const double* b, double* out, int n, int ox,
                     int oy) {
  const int OY = g.OY(), OZ = g.OZ();
  for (int oz = 0; oz < OZ; ++oz) {
    double* o = out + vox(n, ox, oy, oz, g.OX(), OY, OZ) * g.co;
    for (int c = 0; c < g.co; ++c) o[c] = b ? b[c] : 0.0;
    for (int kx = 0; kx < g.k; ++kx) {
      const int ix = ox * g.stride + kx - g.pad;
      if (ix < 0 || ix >= g.X) continue;
      for (int ky = 0; ky < g.k; ++ky) {
        const int iy = oy * g.stride + ky - g.pad;
        if (iy < 0 || iy >= g.Y) continue;
        for (int kz = 0; kz < g.k; ++kz) {
          const int iz = oz * g.stride + kz - g.pad;
          if (iz < 0 || iz >= g.Z) continue;
          const double* src = in + vox(n, ix, iy, iz, g.X, g.Y, g.Z) * g.ci;
          const double* wk = w + ((static_cast<size_t>(kx) * g.k + ky) * g.k + kz) * g.ci * g.co;
          for (int ci = 0; ci < g.ci; ++ci) {
            const double v = src[ci];
            const double* wr = wk + static_cast<size_t>(ci) * g.co;
            for (int c = 0; c < g.co; ++c) o[c] += v * wr[c];
          }
        }
      }
    }
  }
}

// Gradient for one input voxel row (fixed n, ix, iy) over all iz, gathered from the outputs it feeds.
inline void grad_input_row(const ConvGeom& g, const double* gout, const double* w, double* gin, int n, int ix, int iy) {
  const int OX = g.OX(), OY = g.OY(), OZ = g.OZ();
  for (int iz = 0; iz < g.Z; ++iz) {
    double* d = gin + vox(n, ix, iy, iz, g.X, g.Y, g.Z) * g.ci;
    for (int c = 0; c < g.ci; ++c) d[c] = 0.0;
    for (int kx = 0; kx < g.k; ++kx) {
      const int tx = ix + g.pad - kx;
      if (tx < 0 || tx % g.stride) continue;
      const int ox = tx / g.stride;
      if (ox >= OX) continue;
      for (int ky = 0; ky < g.k; ++ky) {
        const int ty = iy + g.pad - ky;
        if (ty < 0 || ty % g.stride) continue;
        const int oy = ty / g.stride;
        if (oy >= OY) continue;
        for (int kz = 0; kz < g.k; ++kz) {
          const int tz = iz + g.pad - kz;
          if (tz < 0 || tz % g.stride) continue;
          const int oz = tz / g.stride;
          if (oz >= OZ) continue;
          const double* go = gout + vox(n, ox, oy, oz, OX, OY, OZ) * g.co;
          const double* wk = w + ((static_cast<size_t>(kx) * g.k + ky) * g.k + kz) * g.ci * g.co;
          for (int ci = 0; ci < g.ci; ++ci) {
            const double* wr = wk + static_cast<size_t>(ci) * g.co;
            double s = 0.0;
            for (int c = 0; c < g.co; ++c) s += go[c] * wr[c];
            d[ci] += s;
          }
        }
      }
    }
  }
}

// Weight gradient for one kernel offset; bias gradient handled separately.
inline void grad_weight_offset(const ConvGeom& g, const double* in, const double* gout, double* gw, int kx, int ky,
                               int kz) {
  const int OX = g.OX(), OY = g.OY(), OZ = g.OZ();
  double* wk = gw + ((static_cast<size_t>(kx) * g.k + ky) * g.k + kz) * g.ci * g.co;
  std::memset(wk, 0, sizeof(double) * g.ci * g.co);
  for (int n = 0; n < g.n; ++n) {
    for (int ox = 0; ox < OX; ++ox) {
      const int ix = ox * g.stride + kx - g.pad;
      if (ix < 0 || ix >= g.X) continue;
      for (int oy = 0; oy < OY; ++oy) {
        const int iy = oy * g.stride + ky - g.pad;
        if (iy < 0 || iy >= g.Y) continue;
        for (int oz = 0; oz < OZ; ++oz) {
          const int iz = oz * g.stride + kz - g.pad;
          if (iz < 0 || iz >= g.Z) continue;
          const double* src = in + vox(n, ix, iy, iz, g.X, g.Y, g.Z) * g.ci;
          const double* go = gout + vox(n, ox, oy, oz, OX, OY, OZ) * g.co;
          for (int ci = 0; ci < g.ci; ++ci) {
            const double v = src[ci];
            double* wr = wk + static_cast<size_t>(ci) * g.co;
            for (int c = 0; c < g.co; ++c) wr[c] += v * go[c];
          }
        }
      }
    }
  }
}

inline void grad_bias(const ConvGeom& g, const double* gout, double* gb) {
  const size_t count = static_cast<size_t>(g.n) * g.OX() * g.OY() * g.OZ();
  for (int c = 0; c < g.co; ++c) gb[c] = 0.0;
  for (size_t v = 0; v < count; ++v) {
    const double* go = gout + v * g.co;
    for (int c = 0; c < g.co; ++c) gb[c] += go[c];
  }
}

inline void pool_voxel(int X, int Y, int Z, int c, const double* in, double* out, int* argmax, int n, int ox, int oy,
                       int oz) {
  const int OX = X / 2, OY = Y / 2, OZ = Z / 2;
  const size_t o = vox(n, ox, oy, oz, OX, OY, OZ) * c;
  for (int ch = 0; ch < c; ++ch) {
    double best = 0.0;
    int arg = -1;
    for (int d = 0; d < 8; ++d) {
      const int ix = 2 * ox + (d >> 2), iy = 2 * oy + ((d >> 1) & 1), iz = 2 * oz + (d & 1);
      const size_t i = vox(n, ix, iy, iz, X, Y, Z) * c + ch;
      if (arg < 0 || in[i] > best) {
        best = in[i];
        arg = static_cast<int>(i);
      }
    }
    out[o + ch] = best;
    argmax[o + ch] = arg;
  }
}

inline void upsample_voxel(int X, int Y, int Z, int c, const double* in, double* out, int n, int ox, int oy, int oz) {
  const double* src = in + vox(n, ox / 2, oy / 2, oz / 2, X, Y, Z) * c;
  double* dst = out + vox(n, ox, oy, oz, 2 * X, 2 * Y, 2 * Z) * c;
  for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
}

inline void downsum_voxel(int X, int Y, int Z, int c, const double* gout, double* gin, int n, int x, int y, int z) {
  double* dst = gin + vox(n, x, y, z, X, Y, Z) * c;
  for (int ch = 0; ch < c; ++ch) dst[ch] = 0.0;
  for (int d = 0; d < 8; ++d) {
    const double* src = gout + vox(n, 2 * x + (d >> 2), 2 * y + ((d >> 1) & 1), 2 * z + (d & 1), 2 * X, 2 * Y, 2 * Z) * c;
    for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
  }
}

}  // namespace

namespace serial {

void conv3d_forward(const ConvGeom& g, const double* in, const double* w, const double* b, double* out) {
  for (int n = 0; n < g.n; ++n)
    for (int ox = 0; ox < g.OX(); ++ox)
      for (int oy = 0; oy < g.OY(); ++oy) conv_row(g, in, w, b, out, n, ox, oy);
}

void conv3d_backward_input(const ConvGeom& g, const double* gout, const double* w, double* gin) {
  for (int n = 0; n < g.n; ++n)
    for (int ix = 0; ix < g.X; ++ix)
      for (int iy = 0; iy < g.Y; ++iy) grad_input_row(g, gout, w, gin, n, ix, iy);
}

void conv3d_backward_weight(const ConvGeom& g, const double* in, const double* gout, double* gw, double* gb) {
  for (int kx = 0; kx < g.k; ++kx)
    for (int ky = 0; ky < g.k; ++ky)
      for (int kz = 0; kz < g.k; ++kz) grad_weight_offset(g, in, gout, gw, kx, ky, kz);
  if (gb) grad_bias(g, gout, gb);
}

void max_pool2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out, int* argmax) {
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < X / 2; ++x)
      for (int y = 0; y < Y / 2; ++y)
        for (int z = 0; z < Z / 2; ++z) pool_voxel(X, Y, Z, c, in, out, argmax, s, x, y, z);
}

void upsample2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out) {
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < 2 * X; ++x)
      for (int y = 0; y < 2 * Y; ++y)
        for (int z = 0; z < 2 * Z; ++z) upsample_voxel(X, Y, Z, c, in, out, s, x, y, z);
}

void upsample2_backward(int n, int X, int Y, int Z, int c, const double* gout, double* gin) {
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < X; ++x)
      for (int y = 0; y < Y; ++y)
        for (int z = 0; z < Z; ++z) downsum_voxel(X, Y, Z, c, gout, gin, s, x, y, z);
}

}  // namespace serial

namespace parallel {

void conv3d_forward(const ConvGeom& g, const double* in, const double* w, const double* b, double* out) {
  const int OX = g.OX(), OY = g.OY();
#pragma omp parallel for collapse(3) schedule(static)
  for (int n = 0; n < g.n; ++n)
    for (int ox = 0; ox < OX; ++ox)
      for (int oy = 0; oy < OY; ++oy) conv_row(g, in, w, b, out, n, ox, oy);
}

void conv3d_backward_input(const ConvGeom& g, const double* gout, const double* w, double* gin) {
#pragma omp parallel for collapse(3) schedule(static)
  for (int n = 0; n < g.n; ++n)
    for (int ix = 0; ix < g.X; ++ix)
      for (int iy = 0; iy < g.Y; ++iy) grad_input_row(g, gout, w, gin, n, ix, iy);
}

void conv3d_backward_weight(const ConvGeom& g, const double* in, const double* gout, double* gw, double* gb) {
#pragma omp parallel for collapse(3) schedule(static)
  for (int kx = 0; kx < g.k; ++kx)
    for (int ky = 0; ky < g.k; ++ky)
      for (int kz = 0; kz < g.k; ++kz) grad_weight_offset(g, in, gout, gw, kx, ky, kz);
  if (gb) grad_bias(g, gout, gb);
}

void max_pool2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out, int* argmax) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < X / 2; ++x)
      for (int y = 0; y < Y / 2; ++y)
        for (int z = 0; z < Z / 2; ++z) pool_voxel(X, Y, Z, c, in, out, argmax, s, x, y, z);
}

void upsample2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < 2 * X; ++x)
      for (int y = 0; y < 2 * Y; ++y)
        for (int z = 0; z < 2 * Z; ++z) upsample_voxel(X, Y, Z, c, in, out, s, x, y, z);
}

void upsample2_backward(int n, int X, int Y, int Z, int c, const double* gout, double* gin) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int s = 0; s < n; ++s)
    for (int x = 0; x < X; ++x)
      for (int y = 0; y < Y; ++y)
        for (int z = 0; z < Z; ++z) downsum_voxel(X, Y, Z, c, gout, gin, s, x, y, z);
}

}  // namespace parallel

}  // namespace gcs::nn
