#include "mcdl/synth.hpp"

#include "mcdl/data_model.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace mcdl {

void SynthSpec::validate() const {
  require(K_true >= 1 && M >= 1 && T >= 1 && N >= 1, ErrorCode::invalid_argument,
          "synthetic dimensions must be positive");
  require(sparsity >= 1 && sparsity <= K_true, ErrorCode::invalid_argument,
          "sparsity " + std::to_string(sparsity) + " must lie in [1, K_true = " +
              std::to_string(K_true) + "]");
  require(noise_sigma >= 0.0, ErrorCode::invalid_argument, "noise_sigma must be >= 0");
  require(label_density > 0.0 && label_density <= 1.0, ErrorCode::invalid_argument,
          "label_density must lie in (0, 1]");
  require(v > 0.0 && tau >= 0.0 && tau < v, ErrorCode::invalid_argument,
          "synthetic score range needs 0 <= tau < v");
  require(max_redraws >= 1, ErrorCode::invalid_argument, "max_redraws must be >= 1");
}

SynthData generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  SynthData out;
  out.visual_truth.resize(spec.M, spec.K_true);
  for (Index k = 0; k < spec.K_true; ++k) {
    Vector d(spec.M);
    do {
      for (Index r = 0; r < spec.M; ++r) d[r] = gauss(rng);
    } while (d.norm() == 0.0);
    out.visual_truth.col(k) = d / d.norm();
  }
  // Nonzero semantic entries land in [(tau + v) / 2, v] so a dominant
  // prototype switches its labels on.
  const double low = 0.5 * (spec.tau + spec.v);
  out.semantic_truth = Matrix::Zero(spec.T, spec.K_true);
  for (Index k = 0; k < spec.K_true; ++k) {
    for (Index t = 0; t < spec.T; ++t) {
      if (unit(rng) < spec.label_density) {
        out.semantic_truth(t, k) = low + (spec.v - low) * unit(rng);
      }
    }
  }

  out.features.resize(spec.M, spec.N);
  out.labels.resize(spec.T, spec.N);
  out.weights = Matrix::Zero(spec.K_true, spec.N);
  std::vector<Index> atoms(static_cast<std::size_t>(spec.K_true));
  for (Index i = 0; i < spec.N; ++i) {
    bool accepted = false;
    for (int attempt = 0; attempt < spec.max_redraws && !accepted; ++attempt) {
      std::iota(atoms.begin(), atoms.end(), Index{0});
      // Partial Fisher-Yates: the first `sparsity` entries are a uniform draw
      // without replacement.
      for (Index j = 0; j < spec.sparsity; ++j) {
        std::uniform_int_distribution<Index> pick(j, spec.K_true - 1);
        std::swap(atoms[static_cast<std::size_t>(j)], atoms[static_cast<std::size_t>(pick(rng))]);
      }
      Vector w = Vector::Zero(spec.K_true);
      double total = 0.0;
      for (Index j = 0; j < spec.sparsity; ++j) {
        const double e = expo(rng);
        w[atoms[static_cast<std::size_t>(j)]] = e;
        total += e;
      }
      w /= total;
      Vector x = out.visual_truth * w;
      for (Index r = 0; r < spec.M; ++r) x[r] += spec.noise_sigma * gauss(rng);
      const Vector score = out.semantic_truth * w;
      const Vector y = (score.array() > spec.tau).cast<double>().matrix();
      if (y.sum() == 0.0 || x.norm() == 0.0) continue;
      out.features.col(i) = x / x.norm();
      out.labels.col(i) = y;
      out.weights.col(i) = w;
      accepted = true;
    }
    require(accepted, ErrorCode::invalid_argument,
            "synthetic sample " + std::to_string(i) + " has no label after " +
                std::to_string(spec.max_redraws) + " draws; raise label_density");
  }
  return out;
}

DataSplit split_dataset(const Matrix& features, const Matrix& labels, double test_fraction,
                        std::uint64_t seed) {
  require(features.cols() == labels.cols(), ErrorCode::dimension_mismatch,
          "features and labels disagree on sample count");
  const auto [train_idx, test_idx] = split_indices(features.cols(), test_fraction, seed);
  return {select_columns(features, train_idx), select_columns(labels, train_idx),
          select_columns(features, test_idx), select_columns(labels, test_idx)};
}

}  // namespace mcdl
