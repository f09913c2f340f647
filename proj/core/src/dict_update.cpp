#include "mcdl/dict_update.hpp"

#include "mcdl/parallel.hpp"
#include "mcdl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace mcdl {

void SemanticUpdateConfig::validate() const {
  require(std::isfinite(beta1) && beta1 >= 0.0, ErrorCode::invalid_argument,
          "beta1 must be finite and nonnegative");
  require(std::isfinite(rho) && rho >= 0.0, ErrorCode::invalid_argument,
          "rho must be finite and nonnegative");
  require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_argument, "v must be positive");
}

namespace {

constexpr int kLloydIterations = 20;

// Squared distances between every column of `points` and every column of
// `centers` (N x K).
Matrix squared_distances(const Matrix& points, const Matrix& centers) {
  Matrix d = -2.0 * (points.transpose() * centers);
  d.colwise() += points.colwise().squaredNorm().transpose();
  d.rowwise() += centers.colwise().squaredNorm();
  return d.cwiseMax(0.0);
}

Matrix seed_centers(const Matrix& x, Index k, std::mt19937_64& rng) {
  const Index n = x.cols();
  Matrix centers(x.rows(), k);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  Index first = pick(rng);
  centers.col(0) = x.col(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  Vector nearest = (x.colwise() - x.col(first)).colwise().squaredNorm().transpose();
  for (Index c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += chosen[static_cast<std::size_t>(i)] ? 0.0 : nearest[i];
    Index next = -1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> unif(0.0, total);
      double target = unif(rng);
      for (Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)] || nearest[i] <= 0.0) continue;
        next = i;
        target -= nearest[i];
        if (target < 0.0) break;
      }
    }
    if (next < 0) {
      // Every remaining point coincides with a center; take the lowest unused.
      for (Index i = 0; i < n && next < 0; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) next = i;
      }
    }
    chosen[static_cast<std::size_t>(next)] = 1;
    centers.col(c) = x.col(next);
    nearest = nearest.cwiseMin((x.colwise() - x.col(next)).colwise().squaredNorm().transpose());
  }
  return centers;
}

}  // namespace

Matrix kmeans_init(const Matrix& features, Index atoms, std::uint64_t seed) {
  const Index n = features.cols();
  require(atoms >= 1, ErrorCode::invalid_argument, "k-means needs at least one center");
  require(atoms <= n, ErrorCode::invalid_argument,
          "k-means: K = " + std::to_string(atoms) + " exceeds sample count " + std::to_string(n));
  std::mt19937_64 rng(seed);
  Matrix centers = seed_centers(features, atoms, rng);

  std::vector<Index> assignment(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < kLloydIterations; ++iter) {
    const Matrix dist = squared_distances(features, centers);
    bool changed = false;
    Vector best_dist(n);
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      for (Index c = 1; c < atoms; ++c) {
        if (dist(i, c) < dist(i, best)) best = c;
      }
      best_dist[i] = dist(i, best);
      if (assignment[static_cast<std::size_t>(i)] != best) {
        assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(features.rows(), atoms);
    std::vector<Index> counts(static_cast<std::size_t>(atoms), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = assignment[static_cast<std::size_t>(i)];
      sums.col(c) += features.col(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<char> reseeded(static_cast<std::size_t>(n), 0);
    for (Index c = 0; c < atoms; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.col(c) = sums.col(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: move it onto the worst-fitted point not yet used.
      Index worst = -1;
      for (Index i = 0; i < n; ++i) {
        if (reseeded[static_cast<std::size_t>(i)]) continue;
        if (worst < 0 || best_dist[i] > best_dist[worst]) worst = i;
      }
      if (worst >= 0) {
        reseeded[static_cast<std::size_t>(worst)] = 1;
        centers.col(c) = features.col(worst);
      }
    }
  }
  for (Index c = 0; c < atoms; ++c) {
    const double norm = centers.col(c).norm();
    if (norm > 0.0) centers.col(c) /= norm;
  }
  return centers;
}

namespace {

Matrix code_all(const Matrix& features, const CodingContext& ctx, double beta0, int threads) {
  Matrix codes(ctx.atoms(), features.cols());
  parallel_for(features.cols(), threads, [&](Index i) {
    codes.col(i) = visual_code(features.col(i), ctx, beta0);
  });
  return codes;
}

}  // namespace

UnsupervisedResult unsupervised_dl(const Matrix& features, Index atoms, int iterations,
                                   std::uint64_t seed, double beta0, int threads) {
  require(iterations >= 0, ErrorCode::invalid_argument, "iteration count must be nonnegative");
  UnsupervisedResult out;
  out.dictionary = kmeans_init(features, atoms, seed);
  const Matrix no_labels(0, features.cols());
  const Matrix no_semantic(0, atoms);
  const Vector unit_weights = Vector::Ones(features.cols());
  const SemanticUpdateConfig cfg{};
  const MarginParams margin{};

  out.codes = code_all(features, CodingContext(out.dictionary, no_semantic), beta0, threads);
  out.objective_trace.push_back((features - out.dictionary * out.codes).squaredNorm());
  for (int it = 0; it < iterations; ++it) {
    out.dictionary = dictionary_update_pass(features, no_labels, out.codes, out.dictionary,
                                            no_semantic, unit_weights, cfg, margin,
                                            seed + 1 + static_cast<std::uint64_t>(it),
                                            UpdatePassOptions{SemanticLoss::squared_hinge, false})
                         .visual;
    out.codes = code_all(features, CodingContext(out.dictionary, no_semantic), beta0, threads);
    out.objective_trace.push_back((features - out.dictionary * out.codes).squaredNorm());
  }
  return out;
}

Matrix init_semantic(const Matrix& codes, const Matrix& labels, double v) {
  require(codes.cols() == labels.cols(), ErrorCode::dimension_mismatch,
          "init_semantic: codes " + shape_string(codes) + " vs labels " + shape_string(labels));
  Matrix semantic = Matrix::Zero(labels.rows(), codes.rows());
  for (Index k = 0; k < codes.rows(); ++k) {
    const double energy = codes.row(k).squaredNorm();
    if (energy <= 0.0) continue;
    const Vector column = (labels * codes.row(k).transpose()) / energy;
    semantic.col(k) = column.cwiseMin(v);
  }
  return semantic;
}

Vector update_visual_prototype(Index k, const Matrix& features, const Matrix& codes,
                               const Vector& weights, const Matrix& visual) {
  require(k >= 0 && k < visual.cols(), ErrorCode::invalid_argument, "atom index out of range");
  require(codes.rows() == visual.cols() && codes.cols() == features.cols() &&
              weights.size() == features.cols() && visual.rows() == features.rows(),
          ErrorCode::dimension_mismatch, "update_visual_prototype: dimension mismatch");
  const Matrix residual = features - visual * codes;
  Vector numerator = Vector::Zero(features.rows());
  double denominator = 0.0;
  for (Index i = 0; i < features.cols(); ++i) {
    const double a = codes(k, i);
    if (a == 0.0) continue;
    numerator += (weights[i] * a) * (residual.col(i) + visual.col(k) * a);
    denominator += weights[i] * a * a;
  }
  if (denominator > 0.0) {
    const double norm = numerator.norm();
    return norm > 0.0 ? Vector(numerator / norm) : Vector(visual.col(k));
  }
  Index worst = 0;
  double worst_norm = -1.0;
  for (Index i = 0; i < residual.cols(); ++i) {
    const double norm = residual.col(i).norm();
    if (norm > worst_norm) {
      worst_norm = norm;
      worst = i;
    }
  }
  if (worst_norm > 0.0) return residual.col(worst) / worst_norm;
  return visual.col(k);
}

double semantic_element_objective(double d, const Eigen::Ref<const Vector>& alphas,
                                  const Eigen::Ref<const Vector>& partial_scores,
                                  const Eigen::Ref<const Vector>& labels, double d_old,
                                  const SemanticUpdateConfig& cfg, const MarginParams& m) {
  double total = cfg.beta1 * std::abs(d) + cfg.rho * (d - d_old) * (d - d_old);
  for (Index i = 0; i < alphas.size(); ++i) {
    total += hinge_loss(labels[i], d * alphas[i] + partial_scores[i], m);
  }
  return total;
}

double update_semantic_element(const Eigen::Ref<const Vector>& alphas,
                               const Eigen::Ref<const Vector>& partial_scores,
                               const Eigen::Ref<const Vector>& labels, double d_old,
                               const SemanticUpdateConfig& cfg, const MarginParams& m) {
  const Index n = alphas.size();
  require(partial_scores.size() == n && labels.size() == n, ErrorCode::dimension_mismatch,
          "update_semantic_element: length mismatch");

  // Sample i contributes (h_i - s_i a_i d)^2 while active, with
  // h_i = C + s_i (tau - q_i). Positives (s = +1) are active below their
  // breakpoint h_i / a_i, negatives above -h_i / a_i.
  struct Breakpoint {
    double at;
    Index sample;
  };
  std::vector<Breakpoint> breakpoints;
  breakpoints.reserve(static_cast<std::size_t>(n));
  double s_aa = 0.0;  // sum a_i^2 over active samples
  double s_ha = 0.0;  // sum s_i h_i a_i over active samples
  auto h_of = [&](Index i, double sign) { return m.C + sign * (m.tau - partial_scores[i]); };
  for (Index i = 0; i < n; ++i) {
    const double a = alphas[i];
    if (a <= 0.0) continue;
    const double sign = labels[i] > 0.5 ? 1.0 : -1.0;
    const double h = h_of(i, sign);
    const double at = sign * h / a;
    const bool active_at_zero = sign > 0.0 ? at > 0.0 : at <= 0.0;
    if (active_at_zero) {
      s_aa += a * a;
      s_ha += sign * h * a;
    }
    if (at > 0.0 && at < cfg.v) breakpoints.push_back({at, i});
  }
  std::sort(breakpoints.begin(), breakpoints.end(),
            [](const Breakpoint& l, const Breakpoint& r) { return l.at < r.at; });

  // On a piece, Q'(d) = 2 (s_aa + rho) d - 2 s_ha + beta1 - 2 rho d_old.
  // Q is convex, so the minimizer lies on the first piece whose stationary
  // point is not to its right.
  auto stationary = [&]() {
    const double curvature = s_aa + cfg.rho;
    const double pull = s_ha - 0.5 * cfg.beta1 + cfg.rho * d_old;
    if (curvature > 0.0) return pull / curvature;
    return pull > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  };
  double lo = 0.0;
  std::size_t next = 0;
  while (true) {
    const double hi = next < breakpoints.size() ? breakpoints[next].at : cfg.v;
    const double d_star = stationary();
    if (d_star <= hi) return std::clamp(d_star, lo, hi);
    if (next >= breakpoints.size()) return cfg.v;
    // Cross every breakpoint located at `hi`.
    while (next < breakpoints.size() && breakpoints[next].at == hi) {
      const Index i = breakpoints[next].sample;
      const double a = alphas[i];
      const double sign = labels[i] > 0.5 ? 1.0 : -1.0;
      const double contribution_aa = a * a;
      const double contribution_ha = sign * h_of(i, sign) * a;
      if (sign > 0.0) {
        s_aa -= contribution_aa;
        s_ha -= contribution_ha;
      } else {
        s_aa += contribution_aa;
        s_ha += contribution_ha;
      }
      ++next;
    }
    if (s_aa < 0.0) s_aa = 0.0;
    lo = hi;
  }
}

double update_semantic_element_squared(const Eigen::Ref<const Vector>& alphas,
                                       const Eigen::Ref<const Vector>& partial_scores,
                                       const Eigen::Ref<const Vector>& targets, double d_old,
                                       double rho, double v) {
  require(partial_scores.size() == alphas.size() && targets.size() == alphas.size(),
          ErrorCode::dimension_mismatch, "update_semantic_element_squared: length mismatch");
  const double curvature = alphas.squaredNorm() + rho;
  if (curvature <= 0.0) return std::clamp(d_old, 0.0, v);
  const double pull = alphas.dot(targets - partial_scores) + rho * d_old;
  return std::clamp(pull / curvature, 0.0, v);
}

DictionaryPair dictionary_update_pass(const Matrix& features, const Matrix& labels,
                                      const Matrix& codes, const Matrix& visual,
                                      const Matrix& semantic, const Vector& weights,
                                      const SemanticUpdateConfig& cfg, const MarginParams& m,
                                      std::uint64_t seed, const UpdatePassOptions& options) {
  const Index n = features.cols();
  const Index atoms = visual.cols();
  require(codes.rows() == atoms && codes.cols() == n && labels.cols() == n &&
              semantic.cols() == atoms && semantic.rows() == labels.rows() &&
              visual.rows() == features.rows() && weights.size() == n,
          ErrorCode::dimension_mismatch, "dictionary_update_pass: inconsistent dimensions");
  cfg.validate();

  DictionaryPair out{visual, semantic};
  Matrix residual = features - out.visual * codes;
  Matrix scores = out.semantic * codes;

  std::vector<Index> order(static_cast<std::size_t>(atoms));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<char> used_for_replacement(static_cast<std::size_t>(n), 0);
  std::vector<Index> users;
  Vector a;
  Vector q;
  Vector y;
  for (Index k : order) {
    users.clear();
    for (Index i = 0; i < n; ++i) {
      if (codes(k, i) != 0.0) users.push_back(i);
    }
    const Index used = static_cast<Index>(users.size());
    a.resize(used);
    for (Index r = 0; r < used; ++r) a[r] = codes(k, users[static_cast<std::size_t>(r)]);

    // Visual prototype.
    const Vector old_atom = out.visual.col(k);
    Vector numerator = Vector::Zero(features.rows());
    double denominator = 0.0;
    for (Index r = 0; r < used; ++r) {
      const Index i = users[static_cast<std::size_t>(r)];
      numerator.noalias() += (weights[i] * a[r]) * (residual.col(i) + old_atom * a[r]);
      denominator += weights[i] * a[r] * a[r];
    }
    Vector new_atom = old_atom;
    if (denominator > 0.0) {
      const double norm = numerator.norm();
      if (norm > 0.0) new_atom = numerator / norm;
    } else {
      Index worst = -1;
      double worst_norm = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (used_for_replacement[static_cast<std::size_t>(i)]) continue;
        const double norm = residual.col(i).norm();
        if (norm > worst_norm) {
          worst_norm = norm;
          worst = i;
        }
      }
      if (worst >= 0) {
        used_for_replacement[static_cast<std::size_t>(worst)] = 1;
        new_atom = residual.col(worst) / worst_norm;
      }
    }
    const Vector delta = new_atom - old_atom;
    for (Index r = 0; r < used; ++r) {
      residual.col(users[static_cast<std::size_t>(r)]).noalias() -= delta * a[r];
    }
    out.visual.col(k) = new_atom;

    if (!options.update_semantic) continue;

    // Semantic elements of column k, one scalar problem per tag.
    q.resize(used);
    y.resize(used);
    for (Index t = 0; t < labels.rows(); ++t) {
      const double d_old = out.semantic(t, k);
      for (Index r = 0; r < used; ++r) {
        const Index i = users[static_cast<std::size_t>(r)];
        q[r] = scores(t, i) - d_old * a[r];
        y[r] = labels(t, i);
      }
      double d_new;
      if (options.loss == SemanticLoss::squared_hinge) {
        d_new = update_semantic_element(a, q, y, d_old, cfg, m);
      } else {
        d_new = update_semantic_element_squared(a, q, cfg.v * y, d_old, cfg.rho, cfg.v);
      }
      for (Index r = 0; r < used; ++r) {
        scores(t, users[static_cast<std::size_t>(r)]) = q[r] + d_new * a[r];
      }
      out.semantic(t, k) = d_new;
    }
  }
  return out;
}

}  // namespace mcdl
