#include "mcdl/annotator.hpp"
#include "mcdl/baselines.hpp"
#include "mcdl/synth.hpp"
#include "mcdl/trainer.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

namespace {

struct Fixture {
  mcdl::SynthData data;
  mcdl::Model model;
  std::unique_ptr<mcdl::KnnAnnotator> knn;
};

// Training set of n samples (M = 200) with a K = 500 dictionary, built once per n.
const Fixture& fixture(mcdl::Index n) {
  static std::map<mcdl::Index, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  mcdl::SynthSpec s;
  s.K_true = 500;
  s.M = 200;
  s.T = 20;
  s.N = n;
  s.label_density = 0.1;
  s.seed = 5;
  Fixture f;
  f.data = mcdl::generate_synthetic(s);
  mcdl::TrainConfig c;
  c.hyperparams = mcdl::Hyperparams{}.with_grid_point(1.0, 0.1, 0.5, s.T);
  c.hyperparams.K = 500;
  c.hyperparams.R = 0;
  c.unsupervised_iters = 0;
  c.pca_dim = 0;
  f.model = mcdl::train(f.data.features, f.data.labels, c).model;
  f.knn = std::make_unique<mcdl::KnnAnnotator>(f.data.features, f.data.labels, 5);
  return cache.emplace(n, std::move(f)).first->second;
}

void BM_Annotate(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  mcdl::Index q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcdl::annotate(f.model, mcdl::Vector(f.data.features.col(q))));
    q = (q + 1) % f.data.features.cols();
  }
}

void BM_Knn(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  mcdl::Index q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.knn->scores(f.data.features.col(q)));
    q = (q + 1) % f.data.features.cols();
  }
}

}  // namespace

BENCHMARK(BM_Annotate)->Arg(2000)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Knn)->Arg(2000)->Arg(10000)->Unit(benchmark::kMicrosecond);
