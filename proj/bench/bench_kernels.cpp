#include <benchmark/benchmark.h>

#include <vector>

#include "gcs/common/rng.hpp"
#include "gcs/geomodel/covariance.hpp"
#include "gcs/nn/kernels.hpp"

using namespace gcs;

namespace {

struct ConvData {
  nn::ConvGeom g;
  std::vector<double> in, w, b, out;

  explicit ConvData(int side, int ci, int co) {
    g.n = 1;
    g.X = g.Y = g.Z = side;
    g.ci = ci;
    g.co = co;
    Rng rng(1, "bench-conv");
    in.resize(static_cast<std::size_t>(side) * side * side * ci);
    w.resize(27u * ci * co);
    b.resize(co);
    for (auto& v : in) v = rng.normal();
    for (auto& v : w) v = rng.normal();
    out.resize(static_cast<std::size_t>(g.OX()) * g.OY() * g.OZ() * co);
  }
};

template <void (*Fwd)(const nn::ConvGeom&, const double*, const double*, const double*, double*)>
void conv_forward(benchmark::State& state) {
  ConvData d(static_cast<int>(state.range(0)), 8, 8);
  for (auto _ : state) {
    Fwd(d.g, d.in.data(), d.w.data(), d.b.data(), d.out.data());
    benchmark::DoNotOptimize(d.out.data());
  }
}

template <void (*Bwd)(const nn::ConvGeom&, const double*, const double*, double*, double*)>
void conv_backward_weight(benchmark::State& state) {
  ConvData d(static_cast<int>(state.range(0)), 8, 8);
  std::vector<double> gw(d.w.size()), gb(d.b.size());
  for (auto _ : state) {
    Bwd(d.g, d.in.data(), d.in.data(), gw.data(), gb.data());
    benchmark::DoNotOptimize(gw.data());
  }
}

void covariance_serial(benchmark::State& state) {
  const geomodel::GridLayout layout(geomodel::LayoutSpec::tiny());
  for (auto _ : state) benchmark::DoNotOptimize(geomodel::serial::build_covariance(layout, {}));
}

void covariance_parallel(benchmark::State& state) {
  const geomodel::GridLayout layout(geomodel::LayoutSpec::tiny());
  for (auto _ : state) benchmark::DoNotOptimize(geomodel::build_covariance(layout, {}));
}

}  // namespace

BENCHMARK(conv_forward<nn::serial::conv3d_forward>)->Name("conv3d_forward/serial")->Arg(8)->Arg(16);
BENCHMARK(conv_forward<nn::parallel::conv3d_forward>)->Name("conv3d_forward/parallel")->Arg(8)->Arg(16);
BENCHMARK(conv_backward_weight<nn::serial::conv3d_backward_weight>)->Name("conv3d_backward_weight/serial")->Arg(8)->Arg(16);
BENCHMARK(conv_backward_weight<nn::parallel::conv3d_backward_weight>)->Name("conv3d_backward_weight/parallel")->Arg(8)->Arg(16);
BENCHMARK(covariance_serial);
BENCHMARK(covariance_parallel);

BENCHMARK_MAIN();
