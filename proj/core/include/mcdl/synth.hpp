#pragma once

#include "mcdl/common.hpp"

#include <cstdint>

namespace mcdl {

struct SynthSpec {
  Index K_true = 20;
  Index M = 30;
  Index T = 15;
  Index N = 600;
  Index sparsity = 2;
  double noise_sigma = 0.01;
  double label_density = 0.2;  // probability that a prototype carries a given label
  std::uint64_t seed = kDefaultSeed;
  double v = 5.0;
  double tau = 0.5;
  int max_redraws = 1000;  // per sample, before giving up

  void validate() const;
};

struct SynthData {
  Matrix features;       // M x N, unit columns
  Matrix labels;         // T x N, every column nonzero
  Matrix visual_truth;   // M x K_true, unit columns
  Matrix semantic_truth; // T x K_true, entries in [0, v]
  Matrix weights;        // K_true x N convex mixing weights
};

/// Each sample mixes `sparsity` distinct prototypes with flat-Dirichlet
/// weights, adds N(0, sigma^2) noise and is normalized; label t is on when
/// the mixed semantic score exceeds tau. Samples without labels are redrawn.
SynthData generate_synthetic(const SynthSpec& spec);

struct DataSplit {
  Matrix train_features;
  Matrix train_labels;
  Matrix test_features;
  Matrix test_labels;
};

/// Seeded split keeping round(test_fraction * N) samples for testing.
DataSplit split_dataset(const Matrix& features, const Matrix& labels, double test_fraction,
                        std::uint64_t seed);

}  // namespace mcdl
