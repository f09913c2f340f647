#include "mcdl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace mcdl {

bool is_feasible(const SparseCode& code, double beta0, double tol) {
  if (!code.allFinite()) return false;
  if (code.size() > 0 && code.minCoeff() < 0.0) return false;
  return code.sum() <= beta0 + tol;
}

double hinge_loss(double y, double score, const MarginParams& m) {
  const double sign = y > 0.5 ? 1.0 : -1.0;
  const double violation = std::max(0.0, m.C - sign * (score - m.tau));
  return violation * violation;
}

Vector slack_vector(const Vector& y, const Vector& scores, const MarginParams& m) {
  require(y.size() == scores.size(), ErrorCode::dimension_mismatch,
          "slack_vector: labels have length " + std::to_string(y.size()) + ", scores " +
              std::to_string(scores.size()));
  Vector xi(y.size());
  for (Index t = 0; t < y.size(); ++t) {
    const double sign = y[t] > 0.5 ? 1.0 : -1.0;
    xi[t] = std::max(0.0, m.C - sign * (scores[t] - m.tau));
  }
  return xi;
}

Vector surrogate_targets(const Vector& y, const Vector& scores, const Vector& slacks,
                         const MarginParams& m) {
  require(y.size() == scores.size() && y.size() == slacks.size(), ErrorCode::dimension_mismatch,
          "surrogate_targets: length mismatch");
  Vector targets(y.size());
  for (Index t = 0; t < y.size(); ++t) {
    if (slacks[t] > 0.0) {
      targets[t] = y[t] > 0.5 ? m.tau + m.C : m.tau - m.C;
    } else {
      targets[t] = scores[t];
    }
  }
  return targets;
}

// ---------------------------------------------------------------------------

void GramView::add_column(Index j, double scale, Vector& out) const {
  if (extra_) {
    out.noalias() += scale * base_->col(j);
    out.noalias() += (scale * weight_) * extra_->col(j);
  } else {
    out.noalias() += scale * base_->col(j);
  }
}

void GramView::copy_column(Index j, Eigen::Ref<Vector> out) const {
  if (extra_) {
    out.noalias() = base_->col(j) + weight_ * extra_->col(j);
  } else {
    out = base_->col(j);
  }
}

Matrix GramView::dense() const {
  if (extra_) return *base_ + weight_ * *extra_;
  return *base_;
}

namespace {

// Largest violation of the KKT system of min a^T G a - 2 a^T c0 subject to
// a >= 0, sum(a) <= beta0, expressed in terms of the residual correlations
// c = c0 - G a (half the negative gradient).
double kkt_violation(const Vector& alpha, const Vector& c, double beta0) {
  const Index K = alpha.size();
  double support_sum = 0.0;
  Index support = 0;
  for (Index j = 0; j < K; ++j) {
    if (alpha[j] > 0.0) {
      support_sum += c[j];
      ++support;
    }
  }
  double mu = 0.0;
  if (alpha.sum() >= beta0 * (1.0 - 1e-10) && support > 0) {
    mu = std::max(0.0, support_sum / static_cast<double>(support));
  }
  double violation = 0.0;
  for (Index j = 0; j < K; ++j) {
    if (alpha[j] > 0.0) violation = std::max(violation, std::abs(c[j] - mu));
    violation = std::max(violation, c[j] - mu);
  }
  return violation;
}

Vector residual_correlations(const GramView& gram, const Vector& correlations,
                             const Vector& alpha) {
  Vector c = correlations;
  for (Index j = 0; j < alpha.size(); ++j) {
    if (alpha[j] != 0.0) gram.add_column(j, -alpha[j], c);
  }
  return c;
}

double quadratic_value(const Matrix& g, const Vector& correlations, const Vector& alpha) {
  return alpha.dot(g * alpha) - 2.0 * alpha.dot(correlations);
}

// Accelerated projected gradient with function-value restarts. Only used
// when the homotopy ends in a point that fails its optimality check.
Vector polish(const GramView& gram, const Vector& correlations, const Vector& start,
              double beta0, double tol, double kkt_target) {
  const Matrix g = gram.dense();
  const double lipschitz = 2.0 * std::max(g.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;
  Vector x = start;
  Vector y = start;
  double t = 1.0;
  double fx = quadratic_value(g, correlations, x);
  constexpr int kMaxIterations = 50000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vector grad = 2.0 * (g * y - correlations);
    Vector next = project_capped_simplex(y - step * grad, beta0);
    const double fnext = quadratic_value(g, correlations, next);
    if (fnext > fx) {
      // restart momentum from the last accepted iterate
      y = x;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - x);
    const double decrease = fx - fnext;
    x = std::move(next);
    fx = fnext;
    t = t_next;
    if (it % 64 == 63 || decrease <= tol * 1e-3) {
      const Vector c = correlations - g * x;
      if (kkt_violation(x, c, beta0) <= kkt_target) break;
    }
  }
  return x;
}

}  // namespace

LassoResult nn_lasso_gram(const GramView& gram, const Vector& correlations,
                          const LassoOptions& options) {
  const Index K = correlations.size();
  require(gram.size() == K, ErrorCode::dimension_mismatch,
          "nn_lasso: gram has size " + std::to_string(gram.size()) + ", correlations " +
              std::to_string(K));
  require(correlations.allFinite(), ErrorCode::non_finite, "nn_lasso: non-finite input");
  require(options.beta0 > 0.0 && options.tol > 0.0, ErrorCode::invalid_argument,
          "nn_lasso: beta0 and tol must be positive");

  LassoResult result;
  result.code = Vector::Zero(K);
  if (K == 0) return result;
  Vector& alpha = result.code;

  const Index max_steps = options.max_steps > 0 ? options.max_steps : 10 * K;
  const double scale = std::max(correlations.cwiseAbs().maxCoeff(), 1e-300);

  enum class Event { path_end, cap, join, drop };

  Vector c = correlations;
  // 0 for atoms that may still join, +inf for active or excluded ones.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::ArrayXd blocked = Eigen::ArrayXd::Zero(K);
  std::vector<Index> active;

  Index first = 0;
  for (Index j = 1; j < K; ++j) {
    if (c[j] > c[first]) first = j;
  }
  double lambda = c[first];
  if (lambda > 0.0) {
    active.push_back(first);
    blocked[first] = kInf;
  }

  // Gram columns of the active atoms, in active order.
  Matrix columns(K, std::min<Index>(K, 32));
  auto gather = [&](Index slot, Index j) {
    if (slot >= columns.cols()) columns.conservativeResize(K, std::min<Index>(K, 2 * slot));
    gram.copy_column(j, columns.col(slot));
  };
  if (!active.empty()) gather(0, first);

  Matrix gram_active;
  Vector direction;
  Vector drift(K);
  Index just_dropped = -1;
  Index step = 0;
  while (!active.empty() && step < max_steps) {
    ++step;
    const Index n = static_cast<Index>(active.size());
    gram_active.resize(n, n);
    for (Index r = 0; r < n; ++r) {
      for (Index s = 0; s < n; ++s) gram_active(r, s) = columns(active[r], s);
    }
    Eigen::LDLT<Matrix> ldlt(gram_active);
    bool regular = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (regular) {
      const Vector d = ldlt.vectorD();
      regular = d.minCoeff() > 1e-11 * std::max(d.maxCoeff(), 1e-300);
    }
    if (!regular) {
      // The newest atom is (numerically) spanned by the others.
      const Index last = active.back();
      active.pop_back();
      blocked[last] = kInf;
      continue;
    }
    direction = ldlt.solve(Vector::Ones(n));

    drift.noalias() = columns.leftCols(n) * direction;

    double gamma = lambda;
    Event event = Event::path_end;
    Index who = -1;

    const double direction_sum = direction.sum();
    if (direction_sum > 0.0) {
      double mass = 0.0;
      for (Index j : active) mass += alpha[j];
      const double to_cap = std::max(0.0, (options.beta0 - mass) / direction_sum);
      if (to_cap <= gamma) {
        gamma = to_cap;
        event = Event::cap;
      }
    }
    if (just_dropped >= 0) blocked[just_dropped] = kInf;
    const Eigen::ArrayXd denom = 1.0 - drift.array();
    Index nearest = 0;
    const double to_join =
        (denom > 1e-12)
            .select(((lambda - c.array()) / denom).max(0.0), kInf)
            .cwiseMax(blocked)
            .minCoeff(&nearest);
    if (just_dropped >= 0) blocked[just_dropped] = 0.0;
    if (to_join < gamma) {
      gamma = to_join;
      event = Event::join;
      who = nearest;
    }
    for (Index r = 0; r < n; ++r) {
      if (direction[r] >= 0.0) continue;
      const double to_zero = -alpha[active[r]] / direction[r];
      if (to_zero < gamma) {
        gamma = to_zero;
        event = Event::drop;
        who = r;
      }
    }

    for (Index r = 0; r < n; ++r) alpha[active[r]] += gamma * direction[r];
    lambda -= gamma;
    c.noalias() -= gamma * drift;
    just_dropped = -1;

    if (event == Event::cap || event == Event::path_end) break;
    if (event == Event::join) {
      gather(n, who);
      active.push_back(who);
      blocked[who] = kInf;
    } else {
      const Index j = active[who];
      alpha[j] = 0.0;
      blocked[j] = 0.0;
      active.erase(active.begin() + who);
      for (Index r = who; r + 1 < n; ++r) columns.col(r) = columns.col(r + 1);
      just_dropped = j;
    }
  }
  result.steps = step;

  alpha = alpha.cwiseMax(0.0);
  const double mass = alpha.sum();
  if (mass > options.beta0) alpha *= options.beta0 / mass;

  const double kkt_target = 1e-9 * std::max(1.0, scale);
  const Vector residual = residual_correlations(gram, correlations, alpha);
  if (kkt_violation(alpha, residual, options.beta0) > kkt_target) {
    Vector refined = polish(gram, correlations, alpha, options.beta0, options.tol, kkt_target);
    const Matrix g = gram.dense();
    if (quadratic_value(g, correlations, refined) < quadratic_value(g, correlations, alpha)) {
      alpha = std::move(refined);
      result.polished = true;
    }
  }
  return result;
}

SparseCode nn_lasso(const Matrix& dict, const Vector& target, double beta0, double tol) {
  require(dict.rows() == target.size(), ErrorCode::dimension_mismatch,
          "nn_lasso: dictionary is " + shape_string(dict) + ", target has length " +
              std::to_string(target.size()));
  require(dict.allFinite() && target.allFinite(), ErrorCode::non_finite,
          "nn_lasso: non-finite input");
  const Matrix gram = dict.transpose() * dict;
  const Vector correlations = dict.transpose() * target;
  return nn_lasso_gram(GramView(gram), correlations, LassoOptions{beta0, tol, 0}).code;
}

double least_squares_objective(const Matrix& dict, const Vector& target, const SparseCode& code) {
  return (target - dict * code).squaredNorm();
}

Vector project_capped_simplex(const Vector& point, double radius) {
  Vector clipped = point.cwiseMax(0.0);
  if (clipped.sum() <= radius) return clipped;
  // Project onto the simplex sum = radius (sort-based threshold search).
  std::vector<double> sorted(point.data(), point.data() + point.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - radius) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (point.array() - theta).cwiseMax(0.0).matrix();
}

// ---------------------------------------------------------------------------

double coupled_objective_f(const Vector& x, const Vector& y, const SparseCode& code,
                           const Matrix& visual, const Matrix& semantic, double lambda,
                           double n_plus, const MarginParams& m) {
  const double reconstruction = (x - visual * code).squaredNorm();
  const Vector xi = slack_vector(y, semantic * code, m);
  return reconstruction + (lambda / n_plus) * xi.squaredNorm();
}

double surrogate_objective_g(const Vector& x, const Vector& targets, const SparseCode& code,
                             const Matrix& visual, const Matrix& semantic, double lambda,
                             double n_plus) {
  const double reconstruction = (x - visual * code).squaredNorm();
  return reconstruction + (lambda / n_plus) * (targets - semantic * code).squaredNorm();
}

CodingContext::CodingContext(Matrix visual, Matrix semantic)
    : visual_(std::move(visual)), semantic_(std::move(semantic)) {
  require(visual_.cols() == semantic_.cols(), ErrorCode::dimension_mismatch,
          "coupled dictionaries disagree on atom count: " + shape_string(visual_) + " vs " +
              shape_string(semantic_));
  visual_gram_ = visual_.transpose() * visual_;
  semantic_gram_ = semantic_.transpose() * semantic_;
}

McscState mcsc(const Vector& x, const Vector& y, const CodingContext& ctx, const Hyperparams& hp,
               double tol) {
  require(x.size() == ctx.visual().rows(), ErrorCode::dimension_mismatch,
          "mcsc: feature length " + std::to_string(x.size()) + " vs dictionary rows " +
              std::to_string(ctx.visual().rows()));
  require(y.size() == ctx.semantic().rows(), ErrorCode::dimension_mismatch,
          "mcsc: label length " + std::to_string(y.size()) + " vs semantic rows " +
              std::to_string(ctx.semantic().rows()));
  require(hp.S >= 1, ErrorCode::invalid_argument, "mcsc: S must be at least 1");
  const double n_plus = y.sum();
  require(n_plus >= 1.0, ErrorCode::zero_label_column, "mcsc: sample has no positive label");

  const MarginParams m = hp.margin();
  const double weight = hp.lambda / n_plus;
  const GramView gram = weight != 0.0
                            ? GramView(ctx.visual_gram(), ctx.semantic_gram(), weight)
                            : GramView(ctx.visual_gram());
  const LassoOptions options{hp.beta0, tol, 0};
  const Vector visual_corr = ctx.visual().transpose() * x;

  McscState state;
  state.targets.resize(y.size());
  for (Index t = 0; t < y.size(); ++t) state.targets[t] = y[t] > 0.5 ? m.tau + m.C : m.tau - m.C;

  for (int s = 0; s < hp.S; ++s) {
    if (s > 0) state.targets = surrogate_targets(y, state.scores, state.slacks, m);
    Vector corr = visual_corr;
    if (weight != 0.0) corr.noalias() += weight * (ctx.semantic().transpose() * state.targets);
    SparseCode candidate = nn_lasso_gram(gram, corr, options).code;
    if (s > 0) {
      // Majorize-minimize step: never accept a point the surrogate ranks worse.
      const double g_new = surrogate_objective_g(x, state.targets, candidate, ctx.visual(),
                                                 ctx.semantic(), hp.lambda, n_plus);
      const double g_old = surrogate_objective_g(x, state.targets, state.code, ctx.visual(),
                                                 ctx.semantic(), hp.lambda, n_plus);
      if (g_new > g_old) candidate = state.code;
    }
    state.code = std::move(candidate);
    state.scores = ctx.semantic() * state.code;
    state.slacks = slack_vector(y, state.scores, m);
    state.objective = (x - ctx.visual() * state.code).squaredNorm() +
                      (hp.lambda / n_plus) * state.slacks.squaredNorm();
    state.objective_trace.push_back(state.objective);
  }
  return state;
}

McscState mcsc(const Vector& x, const Vector& y, const Matrix& visual, const Matrix& semantic,
               const Hyperparams& hp, double tol) {
  return mcsc(x, y, CodingContext(visual, semantic), hp, tol);
}

SparseCode coupled_code_fixed_targets(const Vector& x, const Vector& targets,
                                      const CodingContext& ctx, double weight, double beta0,
                                      double tol) {
  require(x.size() == ctx.visual().rows() && targets.size() == ctx.semantic().rows(),
          ErrorCode::dimension_mismatch, "coupled_code_fixed_targets: dimension mismatch");
  const GramView gram = weight != 0.0
                            ? GramView(ctx.visual_gram(), ctx.semantic_gram(), weight)
                            : GramView(ctx.visual_gram());
  Vector corr = ctx.visual().transpose() * x;
  if (weight != 0.0) corr.noalias() += weight * (ctx.semantic().transpose() * targets);
  return nn_lasso_gram(gram, corr, LassoOptions{beta0, tol, 0}).code;
}

SparseCode visual_code(const Vector& x, const CodingContext& ctx, double beta0, double tol) {
  require(x.size() == ctx.visual().rows(), ErrorCode::dimension_mismatch,
          "visual_code: dimension mismatch");
  const Vector corr = ctx.visual().transpose() * x;
  return nn_lasso_gram(GramView(ctx.visual_gram()), corr, LassoOptions{beta0, tol, 0}).code;
}

}  // namespace mcdl
