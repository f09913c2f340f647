#pragma once

#include "mcdl/common.hpp"
#include "mcdl/params.hpp"

#include <cstdint>
#include <vector>

namespace mcdl {

struct SemanticUpdateConfig {
  double beta1 = 0.1;
  double rho = 1e-3;
  double v = 5.0;

  void validate() const;
};

/// Loss attached to the label scores. The squared variant (regression onto
/// v * y) backs the CDL ablation.
enum class SemanticLoss { squared_hinge, squared };

/// k-means++ seeding followed by 20 Lloyd iterations; centers are scaled to
/// unit norm (zero centers stay zero). Deterministic for a seed.
Matrix kmeans_init(const Matrix& features, Index atoms, std::uint64_t seed = kDefaultSeed);

struct UnsupervisedResult {
  Matrix dictionary;                    // M x K
  Matrix codes;                         // K x N, coded against `dictionary`
  std::vector<double> objective_trace;  // reconstruction error, initial then per alternation
};

/// Plain (unweighted) nonnegative dictionary learning started from k-means:
/// alternates l1-capped coding and visual prototype updates for `iterations`
/// rounds.
UnsupervisedResult unsupervised_dl(const Matrix& features, Index atoms, int iterations,
                                   std::uint64_t seed = kDefaultSeed, double beta0 = 1.0,
                                   int threads = 1);

/// Column k = min(v, sum_i a_ki y_i / sum_i a_ki^2), elementwise; atoms
/// without any coefficient mass get a zero column.
Matrix init_semantic(const Matrix& codes, const Matrix& labels, double v);

/// Weighted least-squares update of visual atom k followed by projection
/// onto the unit sphere. A dead atom (no weighted coefficient mass) is
/// replaced by the normalized residual of the worst-reconstructed sample.
Vector update_visual_prototype(Index k, const Matrix& features, const Matrix& codes,
                               const Vector& weights, const Matrix& visual);

/// Exact minimizer over [0, v] of
///   sum_i max(0, C - (2y_i - 1)(d a_i + q_i - tau))^2 + beta1 d + rho (d - d_old)^2
/// where a_i > 0 are the coefficients of the samples using the atom. The
/// objective is a convex piecewise quadratic; every hinge breakpoint is
/// visited in sorted order and each piece is minimized in closed form.
double update_semantic_element(const Eigen::Ref<const Vector>& alphas,
                               const Eigen::Ref<const Vector>& partial_scores,
                               const Eigen::Ref<const Vector>& labels, double d_old,
                               const SemanticUpdateConfig& cfg, const MarginParams& m);

/// Objective minimized by update_semantic_element.
double semantic_element_objective(double d, const Eigen::Ref<const Vector>& alphas,
                                  const Eigen::Ref<const Vector>& partial_scores,
                                  const Eigen::Ref<const Vector>& labels, double d_old,
                                  const SemanticUpdateConfig& cfg, const MarginParams& m);

/// Squared-loss counterpart: minimizes sum_i (target_i - d a_i - q_i)^2 +
/// rho (d - d_old)^2 over [0, v] (closed form).
double update_semantic_element_squared(const Eigen::Ref<const Vector>& alphas,
                                       const Eigen::Ref<const Vector>& partial_scores,
                                       const Eigen::Ref<const Vector>& targets, double d_old,
                                       double rho, double v);

struct DictionaryPair {
  Matrix visual;
  Matrix semantic;
};

struct UpdatePassOptions {
  SemanticLoss loss = SemanticLoss::squared_hinge;
  bool update_semantic = true;
};

/// One randomized block-coordinate pass with codes fixed: atoms are visited
/// in a seeded permutation; for each, the visual prototype is refit and then
/// every semantic element of that column. Residuals X - D_I A and scores
/// D_L A are maintained incrementally.
DictionaryPair dictionary_update_pass(const Matrix& features, const Matrix& labels,
                                      const Matrix& codes, const Matrix& visual,
                                      const Matrix& semantic, const Vector& weights,
                                      const SemanticUpdateConfig& cfg, const MarginParams& m,
                                      std::uint64_t seed, const UpdatePassOptions& options = {});

}  // namespace mcdl
