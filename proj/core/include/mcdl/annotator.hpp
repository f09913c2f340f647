#pragma once

#include "mcdl/common.hpp"
#include "mcdl/model.hpp"
#include "mcdl/solver.hpp"

#include <vector>

namespace mcdl {

struct Annotation {
  Vector scores;               // D_L code, each in [0, v]
  std::vector<Index> labels;   // indices t with scores[t] > tau_optimal
  SparseCode code;
};

/// Applies the stored PCA (if any) and l2 normalization to a raw query.
Vector preprocess(const Model& model, const Vector& raw);
Matrix preprocess(const Model& model, const Matrix& raw);

/// Codes an already preprocessed vector against the visual dictionary.
SparseCode encode_processed(const Model& model, const Vector& processed);

/// Preprocess then code with beta0 = hyperparams.beta0. The work depends on
/// K and M only, never on the size of the training set.
SparseCode encode(const Model& model, const Vector& raw);

Vector score_labels(const Model& model, const SparseCode& code);

Annotation annotate(const Model& model, const Vector& raw);

/// The n best-scoring labels (ties to the lowest index).
std::vector<Index> annotate_topn(const Model& model, const Vector& raw, Index n);

/// Scores of every column of `raw` (T x Q). Columns are independent and
/// processed by up to `threads` workers.
Matrix score_matrix(const Model& model, const Matrix& raw, int threads = 1);

/// Threshold maximizing label-averaged F1 over the candidates
/// {0, midpoints of distinct scores, v}; ties go to the smallest.
struct ThresholdChoice {
  double tau = 0.0;
  double f1 = 0.0;
};
ThresholdChoice best_threshold(const Matrix& scores, const Matrix& truth, double v);

/// Scores the (raw) training samples with the model and picks tau_optimal.
double select_threshold(const Model& model, const Matrix& raw_features, const Matrix& labels,
                        int threads = 1);

}  // namespace mcdl
