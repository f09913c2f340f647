#include "mcdl/annotator.hpp"

#include "mcdl/data_model.hpp"
#include "mcdl/metrics.hpp"
#include "mcdl/parallel.hpp"

#include <algorithm>

namespace mcdl {

Vector preprocess(const Model& model, const Vector& raw) {
  require(raw.size() == model.raw_dim(), ErrorCode::dimension_mismatch,
          "query has length " + std::to_string(raw.size()) + ", model expects " +
              std::to_string(model.raw_dim()));
  require(raw.allFinite(), ErrorCode::non_finite, "query has a non-finite entry");
  if (model.pca) return l2_normalize(apply_pca(*model.pca, raw));
  return l2_normalize(raw);
}

Matrix preprocess(const Model& model, const Matrix& raw) {
  require(raw.rows() == model.raw_dim(), ErrorCode::dimension_mismatch,
          "queries have " + std::to_string(raw.rows()) + " rows, model expects " +
              std::to_string(model.raw_dim()));
  if (model.pca) return l2_normalize_columns(apply_pca(*model.pca, raw)).values;
  return l2_normalize_columns(raw).values;
}

SparseCode encode_processed(const Model& model, const Vector& processed) {
  require(processed.size() == model.feature_dim(), ErrorCode::dimension_mismatch,
          "encode: vector length " + std::to_string(processed.size()) + " vs dictionary rows " +
              std::to_string(model.feature_dim()));
  const Vector correlations = model.visual_dict.transpose() * processed;
  const LassoOptions options{model.hyperparams.beta0, 1e-8, 0};
  if (model.visual_gram.rows() == model.atoms()) {
    return nn_lasso_gram(GramView(model.visual_gram), correlations, options).code;
  }
  const Matrix gram = model.visual_dict.transpose() * model.visual_dict;
  return nn_lasso_gram(GramView(gram), correlations, options).code;
}

SparseCode encode(const Model& model, const Vector& raw) {
  return encode_processed(model, preprocess(model, raw));
}

Vector score_labels(const Model& model, const SparseCode& code) {
  require(code.size() == model.atoms(), ErrorCode::dimension_mismatch,
          "code length " + std::to_string(code.size()) + " vs atom count " +
              std::to_string(model.atoms()));
  // Exact arithmetic keeps scores in [0, v]; clamp away rounding.
  return (model.semantic_dict * code).cwiseMax(0.0).cwiseMin(model.hyperparams.v);
}

Annotation annotate(const Model& model, const Vector& raw) {
  Annotation out;
  out.code = encode(model, raw);
  out.scores = score_labels(model, out.code);
  for (Index t = 0; t < out.scores.size(); ++t) {
    if (out.scores[t] > model.tau_optimal) out.labels.push_back(t);
  }
  return out;
}

std::vector<Index> annotate_topn(const Model& model, const Vector& raw, Index n) {
  require(n >= 1 && n <= model.tags(), ErrorCode::invalid_argument,
          "top-n count must lie in [1, " + std::to_string(model.tags()) + "]");
  return top_n(score_labels(model, encode(model, raw)), n);
}

Matrix score_matrix(const Model& model, const Matrix& raw, int threads) {
  const Matrix processed = preprocess(model, raw);
  Matrix scores(model.tags(), raw.cols());
  parallel_for(raw.cols(), threads, [&](Index q) {
    scores.col(q) = score_labels(model, encode_processed(model, processed.col(q)));
  });
  return scores;
}

ThresholdChoice best_threshold(const Matrix& scores, const Matrix& truth, double v) {
  const double upper = scores.size() > 0 ? std::max(v, scores.maxCoeff()) : v;
  const auto candidates = threshold_candidates(scores, 0.0, upper);
  const auto prfs = sweep_thresholds(scores, truth, candidates);
  ThresholdChoice best{candidates.front(), prfs.front().f1};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (prfs[i].f1 > best.f1) best = {candidates[i], prfs[i].f1};
  }
  return best;
}

double select_threshold(const Model& model, const Matrix& raw_features, const Matrix& labels,
                        int threads) {
  return best_threshold(score_matrix(model, raw_features, threads), labels, model.hyperparams.v)
      .tau;
}

}  // namespace mcdl
