#include "mcdl/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mcdl {

void validate_features(const Matrix& features) {
  for (Index j = 0; j < features.cols(); ++j) {
    if (!features.col(j).allFinite()) {
      fail(ErrorCode::non_finite, "feature column " + std::to_string(j) + " has a non-finite entry");
    }
  }
}

void validate_labels(const Matrix& labels, bool require_labels) {
  for (Index j = 0; j < labels.cols(); ++j) {
    bool any = false;
    for (Index t = 0; t < labels.rows(); ++t) {
      const double value = labels(t, j);
      if (value != 0.0 && value != 1.0) {
        fail(ErrorCode::invalid_argument, "label matrix entry (" + std::to_string(t) + ", " +
                                              std::to_string(j) + ") is not 0 or 1");
      }
      any = any || value == 1.0;
    }
    if (require_labels && !any) {
      fail(ErrorCode::zero_label_column, "sample " + std::to_string(j) + " has no labels");
    }
  }
}

NormalizedFeatures l2_normalize_columns(const Matrix& features) {
  validate_features(features);
  NormalizedFeatures out{features, {}};
  for (Index j = 0; j < out.values.cols(); ++j) {
    const double norm = out.values.col(j).norm();
    if (norm > 0.0) {
      out.values.col(j) /= norm;
    } else {
      out.zero_columns.push_back(j);
    }
  }
  return out;
}

Vector l2_normalize(const Vector& x) {
  const double norm = x.norm();
  return norm > 0.0 ? Vector(x / norm) : x;
}

Vector DatasetStats::sample_weights() const {
  Vector w(static_cast<Index>(labels_per_sample.size()));
  for (std::size_t i = 0; i < labels_per_sample.size(); ++i) {
    w[static_cast<Index>(i)] = labels_per_sample[i];
  }
  return w;
}

DatasetStats compute_stats(const Matrix& labels) {
  validate_labels(labels, true);
  DatasetStats stats;
  stats.labels_per_sample.assign(static_cast<std::size_t>(labels.cols()), 0);
  stats.samples_per_label.assign(static_cast<std::size_t>(labels.rows()), 0);
  for (Index j = 0; j < labels.cols(); ++j) {
    for (Index t = 0; t < labels.rows(); ++t) {
      if (labels(t, j) == 1.0) {
        ++stats.labels_per_sample[static_cast<std::size_t>(j)];
        ++stats.samples_per_label[static_cast<std::size_t>(t)];
      }
    }
  }
  return stats;
}

PcaModel fit_pca(const Matrix& raw, Index target_dim, std::uint64_t /*seed*/) {
  validate_features(raw);
  const Index dims = raw.rows();
  const Index samples = raw.cols();
  require(target_dim >= 1 && target_dim <= std::min(dims, samples), ErrorCode::invalid_argument,
          "PCA target dimension " + std::to_string(target_dim) + " outside [1, " +
              std::to_string(std::min(dims, samples)) + "]");
  PcaModel pca;
  pca.mean = raw.rowwise().mean();
  const Matrix centered = raw.colwise() - pca.mean;
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU);
  pca.basis = svd.matrixU().leftCols(target_dim);
  for (Index k = 0; k < target_dim; ++k) {
    Index pivot = 0;
    pca.basis.col(k).cwiseAbs().maxCoeff(&pivot);
    if (pca.basis(pivot, k) < 0.0) pca.basis.col(k) *= -1.0;
  }
  return pca;
}

Matrix apply_pca(const PcaModel& pca, const Matrix& raw) {
  require(raw.rows() == pca.input_dim(), ErrorCode::dimension_mismatch,
          "PCA expects " + std::to_string(pca.input_dim()) + " rows, got " +
              std::to_string(raw.rows()));
  return pca.basis.transpose() * (raw.colwise() - pca.mean);
}

Vector apply_pca(const PcaModel& pca, const Vector& raw) {
  require(raw.size() == pca.input_dim(), ErrorCode::dimension_mismatch,
          "PCA expects length " + std::to_string(pca.input_dim()) + ", got " +
              std::to_string(raw.size()));
  return pca.basis.transpose() * (raw - pca.mean);
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double fraction,
                                                                std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, ErrorCode::invalid_argument,
          "split fraction must lie in (0, 1)");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto second_count =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<Index> second(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(second_count));
  std::vector<Index> first(order.begin() + static_cast<std::ptrdiff_t>(second_count), order.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {first, second};
}

Matrix select_columns(const Matrix& m, const std::vector<Index>& columns) {
  Matrix out(m.rows(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) out.col(static_cast<Index>(j)) = m.col(columns[j]);
  return out;
}

}  // namespace mcdl
