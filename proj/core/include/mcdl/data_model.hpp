#pragma once

#include "mcdl/common.hpp"

#include <cstdint>
#include <vector>

namespace mcdl {

// Feature matrices are M x N (one sample per column); label matrices are
// T x N with entries exactly 0.0 or 1.0.

/// Throws non_finite if any entry is NaN or infinite.
void validate_features(const Matrix& features);

/// Throws if any entry is not exactly 0 or 1, or (when `require_labels`)
/// if some column has no positive label. The message names the sample.
void validate_labels(const Matrix& labels, bool require_labels = true);

struct NormalizedFeatures {
  Matrix values;
  std::vector<Index> zero_columns;  // left untouched
};

NormalizedFeatures l2_normalize_columns(const Matrix& features);

/// Scales a single vector to unit norm; the zero vector is returned as is.
Vector l2_normalize(const Vector& x);

struct DatasetStats {
  std::vector<int> labels_per_sample;  // column sums of Y
  std::vector<int> samples_per_label;  // row sums of Y

  /// labels_per_sample as doubles, the per-sample weights of the objective.
  Vector sample_weights() const;
};

DatasetStats compute_stats(const Matrix& labels);

struct PcaModel {
  Vector mean;   // length M_raw
  Matrix basis;  // M_raw x target_dim, orthonormal columns

  Index input_dim() const { return mean.size(); }
  Index output_dim() const { return basis.cols(); }
};

/// Principal directions by explained variance (thin SVD of the centered
/// data). The sign of each direction is fixed so that its largest-magnitude
/// component is positive, which makes the fit deterministic. `seed` is
/// accepted for interface stability; the current solver is not randomized.
PcaModel fit_pca(const Matrix& raw, Index target_dim, std::uint64_t seed = kDefaultSeed);

Matrix apply_pca(const PcaModel& pca, const Matrix& raw);
Vector apply_pca(const PcaModel& pca, const Vector& raw);

/// Deterministic shuffled split of sample indices into (first, second) where
/// second holds round(fraction * n) samples.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double fraction,
                                                                std::uint64_t seed);

Matrix select_columns(const Matrix& m, const std::vector<Index>& columns);

}  // namespace mcdl
