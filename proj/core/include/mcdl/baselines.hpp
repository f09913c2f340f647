#pragma once

#include "mcdl/common.hpp"
#include "mcdl/trainer.hpp"

namespace mcdl {

/// Unsupervised visual dictionary with post-hoc semantic fit: the
/// initialization stage of train() alone (identical to train with R = 0).
TrainResult train_udl(const Matrix& raw_features, const Matrix& labels, Index atoms,
                      TrainConfig config);

/// Coupled learning with a squared loss onto targets v * y and no l1 term on
/// the semantic dictionary. Sample weights n+_i are kept.
TrainResult train_cdl(const Matrix& raw_features, const Matrix& labels, Index atoms,
                      TrainConfig config);

/// Label propagation from the k nearest training columns (Euclidean, brute
/// force): score_t = mean of y_t over the neighbours. Ties in distance go to
/// the lowest training index.
Vector knn_annotate(const Matrix& train_features, const Matrix& train_labels, const Vector& query,
                    Index k);

class KnnAnnotator {
 public:
  KnnAnnotator(Matrix train_features, Matrix train_labels, Index k = 5);

  Vector scores(const Vector& query) const;
  Matrix score_matrix(const Matrix& queries) const;

  Index k() const { return k_; }
  Index samples() const { return features_.cols(); }

 private:
  Matrix features_;
  Matrix labels_;
  Vector squared_norms_;
  Index k_;
};

}  // namespace mcdl
