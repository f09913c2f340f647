#include "mcdl/solver.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

mcdl::Matrix random_matrix(mcdl::Index r, mcdl::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  mcdl::Matrix m(r, c);
  for (mcdl::Index j = 0; j < c; ++j)
    for (mcdl::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

void BM_NnLassoGram(benchmark::State& state) {
  const auto K = static_cast<mcdl::Index>(state.range(0));
  std::mt19937_64 rng(1);
  mcdl::Matrix D = random_matrix(200, K, rng);
  D.colwise().normalize();
  const mcdl::Matrix G = D.transpose() * D;
  const mcdl::Matrix X = random_matrix(200, 64, rng).colwise().normalized();
  mcdl::Index q = 0;
  for (auto _ : state) {
    const mcdl::Vector c = D.transpose() * X.col(q);
    benchmark::DoNotOptimize(mcdl::nn_lasso_gram(mcdl::GramView(G), c));
    q = (q + 1) % X.cols();
  }
}

void BM_Mcsc(benchmark::State& state) {
  std::mt19937_64 rng(2);
  mcdl::Matrix DI = random_matrix(30, 20, rng);
  DI.colwise().normalize();
  const mcdl::Matrix DL = random_matrix(15, 20, rng).cwiseAbs();
  const mcdl::CodingContext ctx(DI, DL);
  mcdl::Hyperparams hp = mcdl::Hyperparams{}.with_grid_point(1.0, 0.1, 0.5, 15);
  const mcdl::Vector x = random_matrix(30, 1, rng).col(0).normalized();
  mcdl::Vector y = mcdl::Vector::Zero(15);
  y[2] = y[7] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(mcdl::mcsc(x, y, ctx, hp));
}

}  // namespace

BENCHMARK(BM_NnLassoGram)->Arg(100)->Arg(1000);
BENCHMARK(BM_Mcsc);
