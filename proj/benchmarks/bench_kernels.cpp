#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <random>

#include "twotier/channel.hpp"
#include "twotier/manifold.hpp"
#include "twotier/precoder.hpp"
#include "twotier/tracker.hpp"

namespace {

using Eigen::MatrixXcd;
using namespace twotier;

MatrixXcd random_hermitian(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  MatrixXcd a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = std::complex<double>(nd(gen), nd(gen));
  return 0.5 * (a + a.adjoint());
}

MatrixXcd random_gaussian(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  MatrixXcd a(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) a(i, j) = std::complex<double>(nd(gen), nd(gen));
  return a;
}

MatrixXcd random_orthonormal(int n, int m, unsigned seed) {
  const MatrixXcd a = random_gaussian(n, m, seed);
  return Eigen::HouseholderQR<MatrixXcd>(a).householderQ() * MatrixXcd::Identity(n, m);
}

// one statistics update per super-frame: correction solve (compensated mode
// only), one descent step, QR retraction
void tracker_step(benchmark::State& state, track::TrackMode mode) {
  const int n = static_cast<int>(state.range(0));
  const int m = 8, n_cg = 4;
  const MatrixXcd q0 = random_hermitian(n, 11);
  const MatrixXcd q1 = q0 + 0.02 * random_hermitian(n, 12);
  track::TrackerState st(manifold::SubspacePoint{random_orthonormal(n, m, 13)}, q0,
                         track::GammaPolicy::spectral(0.5), n_cg, 14);
  int flip = 0;
  for (auto _ : state) {
    track_superframe(st, (flip ^= 1) ? q1 : q0, mode);
    benchmark::DoNotOptimize(st.phi.basis.data());
  }
  state.SetComplexityN(n);
}

void BM_TrackCompensated(benchmark::State& state) {
  tracker_step(state, track::TrackMode::compensated);
}

void BM_TrackGradientOnly(benchmark::State& state) {
  tracker_step(state, track::TrackMode::gradient_only);
}

// the full eigensolve the tracker amortizes away
void BM_OracleOuter(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MatrixXcd q = random_hermitian(n, 21);
  for (auto _ : state) {
    const auto phi = track::oracle_outer(q, 8);
    benchmark::DoNotOptimize(phi.basis.data());
  }
  state.SetComplexityN(n);
}

// long-timescale statistics rebuild: one antenna correlation matrix from the
// angular power spectrum, quadrature node count as the knob
void BM_CorrelationMatrix(benchmark::State& state) {
  const auto geom = channel::ArrayGeometry::ula_half_wavelength(48);
  const auto params = channel::OneRingParams::from_spread(0.4, 20.0 * M_PI / 180.0);
  const int quad = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto t = channel::correlation_matrix(geom, params, quad);
    benchmark::DoNotOptimize(t.t.data());
  }
}

// short-timescale inner precoder: pseudo-inverse of 8 stacked effective rows
// inside an m-dimensional subspace
void BM_InnerZf(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const MatrixXcd stacked = random_gaussian(8, m, 31);
  for (auto _ : state) {
    const MatrixXcd f = precode::inner_zf(stacked, 10.0);
    benchmark::DoNotOptimize(f.data());
  }
}

BENCHMARK(BM_TrackCompensated)->RangeMultiplier(2)->Range(16, 128)->Complexity();
BENCHMARK(BM_TrackGradientOnly)->RangeMultiplier(2)->Range(16, 128)->Complexity();
BENCHMARK(BM_OracleOuter)->RangeMultiplier(2)->Range(16, 128)->Complexity();
BENCHMARK(BM_CorrelationMatrix)->Arg(512)->Arg(1024)->Arg(4096);
BENCHMARK(BM_InnerZf)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
