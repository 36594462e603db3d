#pragma once

namespace gcs::nn {

// Channels-last 3D convolution geometry: input [n, X, Y, Z, ci], weights [k, k, k, ci, co].
struct ConvGeom {
  int n = 1, X = 1, Y = 1, Z = 1, ci = 1, co = 1;
  int k = 3, stride = 1, pad = 1;
  int OX() const { return (X + 2 * pad - k) / stride + 1; }
  int OY() const { return (Y + 2 * pad - k) / stride + 1; }
  int OZ() const { return (Z + 2 * pad - k) / stride + 1; }
};

// The parallel kernels split work by output ownership, so every element is summed in the same
// order as in the serial reference and results are bit-identical for any thread count.
namespace serial {
void conv3d_forward(const ConvGeom& g, const double* in, const double* w, const double* b, double* out);
void conv3d_backward_input(const ConvGeom& g, const double* gout, const double* w, double* gin);
void conv3d_backward_weight(const ConvGeom& g, const double* in, const double* gout, double* gw, double* gb);
void max_pool2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out, int* argmax);
void upsample2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out);
void upsample2_backward(int n, int X, int Y, int Z, int c, const double* gout, double* gin);
}  // namespace serial

namespace parallel {
void conv3d_forward(const ConvGeom& g, const double* in, const double* w, const double* b, double* out);
void conv3d_backward_input(const ConvGeom& g, const double* gout, const double* w, double* gin);
void conv3d_backward_weight(const ConvGeom& g, const double* in, const double* gout, double* gw, double* gb);
void max_pool2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out, int* argmax);
void upsample2_forward(int n, int X, int Y, int Z, int c, const double* in, double* out);
void upsample2_backward(int n, int X, int Y, int Z, int c, const double* gout, double* gin);
}  // namespace parallel

}  // namespace gcs::nn
