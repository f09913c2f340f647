#pragma once

#include "mcdl/common.hpp"

#include <vector>

namespace mcdl {

/// Label-averaged precision and recall with F1 as their harmonic mean.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-label confusion counts over a T x Q prediction matrix.
struct LabelCounts {
  std::vector<long> true_positive;
  std::vector<long> false_positive;
  std::vector<long> false_negative;
};

LabelCounts count_labels(const Matrix& predicted, const Matrix& truth);

/// Conventions: a label with no predictions has precision 0; a label with no
/// positive ground truth is left out of both means. With no retained label
/// every field is 0.
PRF prf_from_counts(const LabelCounts& counts);

PRF per_label_prf(const Matrix& predicted, const Matrix& truth);

/// 1 where score > tau, else 0 (equality predicts 0).
Matrix threshold_predictions(const Matrix& scores, double tau);

/// The n highest-scoring labels of every column (ties to the lowest index).
Matrix topn_predictions(const Matrix& scores, Index n);

/// Indices of the n largest entries, ordered by score then index.
std::vector<Index> top_n(const Vector& scores, Index n);

/// {lower, midpoints of consecutive distinct sorted scores, upper}, sorted
/// and strictly increasing. Candidates outside [lower, upper] are dropped.
std::vector<double> threshold_candidates(const Matrix& scores, double lower, double upper);

/// Evaluates per_label_prf(threshold_predictions(scores, tau), truth) for
/// every candidate in one sorted sweep; results are bit-identical to the
/// direct computation.
std::vector<PRF> sweep_thresholds(const Matrix& scores, const Matrix& truth,
                                  const std::vector<double>& ascending_candidates);

enum class CurveMode { threshold, topn };

struct PRPoint {
  double operating_point = 0.0;  // threshold, or label count in top-n mode
  PRF prf;
};

/// Operating points are strictly increasing.
struct PRCurve {
  std::vector<PRPoint> points;
};

/// In threshold mode candidates are those of threshold_candidates(scores,
/// 0, max(upper, max score)); top-n mode sweeps n = 1..T.
PRCurve pr_curve(const Matrix& scores, const Matrix& truth, CurveMode mode, double upper = 0.0);

}  // namespace mcdl
