#pragma once

#include "mcdl/common.hpp"
#include "mcdl/params.hpp"

#include <vector>

namespace mcdl {

/// Nonnegative coefficients with l1 mass at most beta0.
using SparseCode = Vector;

bool is_feasible(const SparseCode& code, double beta0, double tol = 1e-9);

// --- margin losses ---------------------------------------------------------

/// [max(0, C - (2y - 1)(score - tau))]^2 with y in {0, 1}.
double hinge_loss(double y, double score, const MarginParams& m);

/// Elementwise margin violation xi_t = max(0, C - (2y_t - 1)(score_t - tau)).
Vector slack_vector(const Vector& y, const Vector& scores, const MarginParams& m);

/// Majorizer targets: the current score where the margin is met, otherwise
/// tau + C for positives and tau - C for negatives.
Vector surrogate_targets(const Vector& y, const Vector& scores, const Vector& slacks,
                         const MarginParams& m);

// --- nonnegative l1-capped least squares ------------------------------------

/// Read-only view of base + weight * extra, where both are K x K Gram
/// matrices. Lets the coupled coder reuse D_I^T D_I and D_L^T D_L across
/// samples with different semantic weights.
class GramView {
 public:
  explicit GramView(const Matrix& base) : base_(&base) {}
  GramView(const Matrix& base, const Matrix& extra, double weight)
      : base_(&base), extra_(weight != 0.0 ? &extra : nullptr), weight_(weight) {}

  Index size() const { return base_->rows(); }

  double operator()(Index i, Index j) const {
    return extra_ ? (*base_)(i, j) + weight_ * (*extra_)(i, j) : (*base_)(i, j);
  }

  /// out += scale * column j.
  void add_column(Index j, double scale, Vector& out) const;

  /// out = column j.
  void copy_column(Index j, Eigen::Ref<Vector> out) const;

  Matrix dense() const;

 private:
  const Matrix* base_;
  const Matrix* extra_ = nullptr;
  double weight_ = 0.0;
};

struct LassoOptions {
  double beta0 = 1.0;
  double tol = 1e-8;
  Index max_steps = 0;  // 0 selects 10 * K
};

struct LassoResult {
  SparseCode code;
  Index steps = 0;
  bool polished = false;  // homotopy failed its optimality check and was refined
};

/// Minimizes ||b - D a||^2 subject to a >= 0 and sum(a) <= beta0, given the
/// Gram matrix G = D^T D and correlations D^T b.
///
/// Follows the positive LARS-Lasso homotopy: the l1-penalized path is
/// traced from a = 0 while the penalty drops, atoms enter in order of
/// correlation (lowest index on ties) and leave when their coefficient
/// crosses zero. The path stops where sum(a) reaches beta0 or the penalty
/// reaches zero. The result is checked against the KKT conditions of the
/// constrained problem and, if degenerate geometry made the homotopy
/// inaccurate, polished by accelerated projected gradient.
LassoResult nn_lasso_gram(const GramView& gram, const Vector& correlations,
                          const LassoOptions& options = {});

SparseCode nn_lasso(const Matrix& dict, const Vector& target, double beta0 = 1.0,
                    double tol = 1e-8);

double least_squares_objective(const Matrix& dict, const Vector& target, const SparseCode& code);

/// Euclidean projection onto {a >= 0, sum(a) <= radius}.
Vector project_capped_simplex(const Vector& point, double radius);

// --- coupled sparse coding ------------------------------------------------

/// ||x - D_I a||^2 + (lambda / n_plus) * sum_t xi_t^2.
double coupled_objective_f(const Vector& x, const Vector& y, const SparseCode& code,
                           const Matrix& visual, const Matrix& semantic, double lambda,
                           double n_plus, const MarginParams& m);

/// ||x - D_I a||^2 + (lambda / n_plus) * sum_t (target_t - d_t^L a)^2.
double surrogate_objective_g(const Vector& x, const Vector& targets, const SparseCode& code,
                             const Matrix& visual, const Matrix& semantic, double lambda,
                             double n_plus);

/// Dictionaries plus their Gram matrices, shared read-only by every sample
/// coded against them in one round.
class CodingContext {
 public:
  CodingContext(Matrix visual, Matrix semantic);

  const Matrix& visual() const { return visual_; }
  const Matrix& semantic() const { return semantic_; }
  const Matrix& visual_gram() const { return visual_gram_; }
  const Matrix& semantic_gram() const { return semantic_gram_; }
  Index atoms() const { return visual_.cols(); }

 private:
  Matrix visual_;
  Matrix semantic_;
  Matrix visual_gram_;
  Matrix semantic_gram_;
};

struct McscState {
  SparseCode code;
  Vector scores;   // D_L code
  Vector slacks;   // xi
  Vector targets;  // surrogate targets used for the final solve
  double objective = 0.0;               // f at the final code
  std::vector<double> objective_trace;  // f after each inner iteration
};

/// Marginalized coupled sparse coding for one sample: S majorize-minimize
/// rounds, the first against targets tau +/- C for every label, each solving
/// the stacked problem [x; w y~] ~ [D_I; w D_L] a with w = sqrt(lambda / n+).
McscState mcsc(const Vector& x, const Vector& y, const CodingContext& ctx, const Hyperparams& hp,
               double tol = 1e-8);
McscState mcsc(const Vector& x, const Vector& y, const Matrix& visual, const Matrix& semantic,
               const Hyperparams& hp, double tol = 1e-8);

/// One stacked least-squares solve against fixed targets (used by the
/// squared-loss ablation, where the surrogate is exact).
SparseCode coupled_code_fixed_targets(const Vector& x, const Vector& targets,
                                      const CodingContext& ctx, double weight, double beta0,
                                      double tol = 1e-8);

/// Codes x against the visual dictionary only.
SparseCode visual_code(const Vector& x, const CodingContext& ctx, double beta0, double tol = 1e-8);

}  // namespace mcdl
