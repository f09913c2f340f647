#include "mcdl/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace mcdl {

LabelCounts count_labels(const Matrix& predicted, const Matrix& truth) {
  require(predicted.rows() == truth.rows() && predicted.cols() == truth.cols(),
          ErrorCode::dimension_mismatch,
          "prediction matrix " + shape_string(predicted) + " vs truth " + shape_string(truth));
  const auto labels = static_cast<std::size_t>(truth.rows());
  LabelCounts counts{std::vector<long>(labels, 0), std::vector<long>(labels, 0),
                     std::vector<long>(labels, 0)};
  for (Index q = 0; q < truth.cols(); ++q) {
    for (Index t = 0; t < truth.rows(); ++t) {
      const bool p = predicted(t, q) > 0.5;
      const bool g = truth(t, q) > 0.5;
      const auto idx = static_cast<std::size_t>(t);
      if (p && g) ++counts.true_positive[idx];
      else if (p) ++counts.false_positive[idx];
      else if (g) ++counts.false_negative[idx];
    }
  }
  return counts;
}

PRF prf_from_counts(const LabelCounts& counts) {
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  long retained = 0;
  for (std::size_t t = 0; t < counts.true_positive.size(); ++t) {
    const long tp = counts.true_positive[t];
    const long fp = counts.false_positive[t];
    const long fn = counts.false_negative[t];
    if (tp + fn == 0) continue;
    ++retained;
    if (tp + fp > 0) precision_sum += static_cast<double>(tp) / static_cast<double>(tp + fp);
    recall_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  PRF out;
  if (retained == 0) return out;
  out.precision = precision_sum / static_cast<double>(retained);
  out.recall = recall_sum / static_cast<double>(retained);
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

PRF per_label_prf(const Matrix& predicted, const Matrix& truth) {
  return prf_from_counts(count_labels(predicted, truth));
}

Matrix threshold_predictions(const Matrix& scores, double tau) {
  return (scores.array() > tau).cast<double>().matrix();
}

std::vector<Index> top_n(const Vector& scores, Index n) {
  require(n >= 1 && n <= scores.size(), ErrorCode::invalid_argument,
          "top-n count " + std::to_string(n) + " outside [1, " + std::to_string(scores.size()) + "]");
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + n, order.end(), [&](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(n));
  return order;
}

Matrix topn_predictions(const Matrix& scores, Index n) {
  Matrix out = Matrix::Zero(scores.rows(), scores.cols());
  for (Index q = 0; q < scores.cols(); ++q) {
    for (Index t : top_n(scores.col(q), n)) out(t, q) = 1.0;
  }
  return out;
}

std::vector<double> threshold_candidates(const Matrix& scores, double lower, double upper) {
  std::vector<double> values(scores.data(), scores.data() + scores.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> candidates;
  candidates.reserve(values.size() + 2);
  candidates.push_back(lower);
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double mid = values[i - 1] + 0.5 * (values[i] - values[i - 1]);
    if (mid > lower && mid < upper) candidates.push_back(mid);
  }
  if (upper > lower) candidates.push_back(upper);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  return candidates;
}

std::vector<PRF> sweep_thresholds(const Matrix& scores, const Matrix& truth,
                                  const std::vector<double>& ascending_candidates) {
  require(scores.rows() == truth.rows() && scores.cols() == truth.cols(),
          ErrorCode::dimension_mismatch,
          "score matrix " + shape_string(scores) + " vs truth " + shape_string(truth));
  struct Entry {
    double score;
    Index label;
    bool positive;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(scores.size()));
  const auto labels = static_cast<std::size_t>(scores.rows());
  LabelCounts counts{std::vector<long>(labels, 0), std::vector<long>(labels, 0),
                     std::vector<long>(labels, 0)};
  for (Index q = 0; q < scores.cols(); ++q) {
    for (Index t = 0; t < scores.rows(); ++t) {
      const bool positive = truth(t, q) > 0.5;
      entries.push_back({scores(t, q), t, positive});
      // Start from "everything predicted"; entries are removed as tau rises.
      if (positive) ++counts.true_positive[static_cast<std::size_t>(t)];
      else ++counts.false_positive[static_cast<std::size_t>(t)];
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  std::vector<PRF> out;
  out.reserve(ascending_candidates.size());
  std::size_t removed = 0;
  for (double tau : ascending_candidates) {
    while (removed < entries.size() && entries[removed].score <= tau) {
      const auto t = static_cast<std::size_t>(entries[removed].label);
      if (entries[removed].positive) {
        --counts.true_positive[t];
        ++counts.false_negative[t];
      } else {
        --counts.false_positive[t];
      }
      ++removed;
    }
    out.push_back(prf_from_counts(counts));
  }
  return out;
}

PRCurve pr_curve(const Matrix& scores, const Matrix& truth, CurveMode mode, double upper) {
  require(scores.rows() == truth.rows() && scores.cols() == truth.cols(),
          ErrorCode::dimension_mismatch,
          "score matrix " + shape_string(scores) + " vs truth " + shape_string(truth));
  PRCurve curve;
  if (mode == CurveMode::topn) {
    for (Index n = 1; n <= scores.rows(); ++n) {
      curve.points.push_back(
          {static_cast<double>(n), per_label_prf(topn_predictions(scores, n), truth)});
    }
    return curve;
  }
  const double top = scores.size() > 0 ? std::max(upper, scores.maxCoeff()) : upper;
  const double bottom = scores.size() > 0 ? std::min(0.0, scores.minCoeff()) : 0.0;
  const auto candidates = threshold_candidates(scores, bottom, top);
  const auto prfs = sweep_thresholds(scores, truth, candidates);
  for (std::size_t i = 0; i < candidates.size(); ++i) curve.points.push_back({candidates[i], prfs[i]});
  return curve;
}

}  // namespace mcdl
