#include "mcdl/trainer.hpp"

#include "mcdl/annotator.hpp"
#include "mcdl/metrics.hpp"
#include "mcdl/parallel.hpp"
#include "mcdl/solver.hpp"

#include <chrono>
#include <cmath>
#include <tuple>

namespace mcdl {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t pass_seed(std::uint64_t seed, int round) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(round + 1);
}

}  // namespace

double global_objective(const Matrix& features, const Matrix& labels, const Matrix& codes,
                        const Matrix& visual, const Matrix& semantic, const DatasetStats& stats,
                        const Hyperparams& hp, SemanticLoss loss) {
  require(hp.lambda > 0.0, ErrorCode::invalid_argument, "global objective needs lambda > 0");
  require(codes.cols() == features.cols() && labels.cols() == features.cols() &&
              static_cast<Index>(stats.labels_per_sample.size()) == features.cols(),
          ErrorCode::dimension_mismatch, "global_objective: inconsistent sample counts");
  const MarginParams m = hp.margin();
  const Matrix residual = features - visual * codes;
  const Matrix scores = semantic * codes;
  double total = 0.0;
  for (Index i = 0; i < features.cols(); ++i) {
    const double weight = stats.labels_per_sample[static_cast<std::size_t>(i)] / hp.lambda;
    double label_term = 0.0;
    for (Index t = 0; t < labels.rows(); ++t) {
      if (loss == SemanticLoss::squared_hinge) {
        label_term += hinge_loss(labels(t, i), scores(t, i), m);
      } else {
        const double diff = hp.v * labels(t, i) - scores(t, i);
        label_term += diff * diff;
      }
    }
    total += weight * residual.col(i).squaredNorm() + label_term;
  }
  if (loss == SemanticLoss::squared_hinge) total += hp.beta1 * semantic.cwiseAbs().sum();
  return total;
}

double global_objective(const Model& model, const Matrix& features, const Matrix& labels,
                        const DatasetStats& stats, const Matrix& codes) {
  const SemanticLoss loss =
      model.method == Method::cdl ? SemanticLoss::squared : SemanticLoss::squared_hinge;
  return global_objective(features, labels, codes, model.visual_dict, model.semantic_dict, stats,
                          model.hyperparams, loss);
}

TrainResult train(const Matrix& raw_features, const Matrix& labels, const TrainConfig& config) {
  Hyperparams hp = config.hyperparams;
  hp.validate();
  require(hp.lambda > 0.0, ErrorCode::invalid_argument, "training needs lambda > 0");
  require(raw_features.cols() == labels.cols(), ErrorCode::dimension_mismatch,
          "features have " + std::to_string(raw_features.cols()) + " samples, labels " +
              std::to_string(labels.cols()));
  require(raw_features.rows() > 0 && labels.rows() > 0, ErrorCode::invalid_argument,
          "features and labels need at least one row");
  require(hp.K < raw_features.cols(), ErrorCode::invalid_argument,
          "K = " + std::to_string(hp.K) + " must be smaller than the sample count " +
              std::to_string(raw_features.cols()));
  require(config.unsupervised_iters >= 0 && config.threads >= 1 && config.pca_dim >= 0,
          ErrorCode::invalid_argument, "invalid training configuration");
  validate_features(raw_features);
  const DatasetStats stats = compute_stats(labels);
  if (config.method == Method::cdl) hp.beta1 = 0.0;

  TrainResult result;
  TrainReport& report = result.report;

  auto phase = Clock::now();
  std::optional<PcaModel> pca;
  Matrix features;
  if (config.pca_dim > 0 && raw_features.rows() > config.pca_dim) {
    pca = fit_pca(raw_features, config.pca_dim, hp.seed);
    features = l2_normalize_columns(apply_pca(*pca, raw_features)).values;
  } else {
    features = l2_normalize_columns(raw_features).values;
  }
  report.wall_times.emplace_back("normalize", seconds_since(phase));

  phase = Clock::now();
  UnsupervisedResult init = unsupervised_dl(features, hp.K, config.unsupervised_iters, hp.seed,
                                            hp.beta0, config.threads);
  Matrix visual = std::move(init.dictionary);
  Matrix codes = std::move(init.codes);
  Matrix semantic = init_semantic(codes, labels, hp.v);
  report.unsupervised_trace = std::move(init.objective_trace);
  report.wall_times.emplace_back("initialize", seconds_since(phase));

  const SemanticLoss loss =
      config.method == Method::cdl ? SemanticLoss::squared : SemanticLoss::squared_hinge;
  const int rounds = config.method == Method::udl ? 0 : hp.R;
  const SemanticUpdateConfig semantic_cfg{hp.beta1, hp.rho, hp.v};
  const MarginParams margin = hp.margin();
  const Vector weights = stats.sample_weights();

  double coding_seconds = 0.0;
  double update_seconds = 0.0;
  for (int r = 0; r < rounds; ++r) {
    phase = Clock::now();
    const CodingContext ctx(visual, semantic);
    parallel_for(features.cols(), config.threads, [&](Index i) {
      const Vector y = labels.col(i);
      if (config.method == Method::cdl) {
        const double weight = hp.lambda / y.sum();
        codes.col(i) = coupled_code_fixed_targets(features.col(i), hp.v * y, ctx, weight, hp.beta0,
                                                  config.lasso_tol);
      } else {
        codes.col(i) = mcsc(features.col(i), y, ctx, hp, config.lasso_tol).code;
      }
    });
    coding_seconds += seconds_since(phase);

    phase = Clock::now();
    const double before =
        global_objective(features, labels, codes, visual, semantic, stats, hp, loss);
    DictionaryPair updated =
        dictionary_update_pass(features, labels, codes, visual, semantic, weights, semantic_cfg,
                               margin, pass_seed(hp.seed, r), UpdatePassOptions{loss, true});
    visual = std::move(updated.visual);
    semantic = std::move(updated.semantic);
    const double after =
        global_objective(features, labels, codes, visual, semantic, stats, hp, loss);
    update_seconds += seconds_since(phase);

    report.pass_before.push_back(before);
    report.pass_after.push_back(after);
    report.objective_trace.push_back(after);
    if (!std::isfinite(after)) fail(ErrorCode::numerical_failure, "objective became non-finite");
    if (config.early_stop && report.objective_trace.size() >= 2) {
      const double prev = report.objective_trace[report.objective_trace.size() - 2];
      if (prev - after < 1e-5 * std::abs(prev)) break;
    }
  }
  report.wall_times.emplace_back("coding", coding_seconds);
  report.wall_times.emplace_back("dictionary_update", update_seconds);

  phase = Clock::now();
  result.model = make_model(std::move(visual), std::move(semantic), hp, std::move(pca), 0.0,
                            config.method);
  Matrix train_scores(labels.rows(), features.cols());
  parallel_for(features.cols(), config.threads, [&](Index i) {
    train_scores.col(i) =
        score_labels(result.model, encode_processed(result.model, features.col(i)));
  });
  result.model.tau_optimal = best_threshold(train_scores, labels, hp.v).tau;
  report.wall_times.emplace_back("threshold", seconds_since(phase));

  report.chosen_params = hp;
  report.codes = std::move(codes);
  report.processed_features = std::move(features);
  return result;
}

GridSearchResult grid_search(const Matrix& raw_features, const Matrix& labels,
                             const SearchGrid& grid, double validation_fraction,
                             std::uint64_t seed, const TrainConfig& base) {
  require(grid.size() > 0, ErrorCode::invalid_argument, "grid search needs a nonempty grid");
  require(raw_features.cols() == labels.cols(), ErrorCode::dimension_mismatch,
          "features and labels disagree on sample count");
  const auto [train_idx, val_idx] =
      split_indices(raw_features.cols(), validation_fraction, seed);
  require(!val_idx.empty() && !train_idx.empty(), ErrorCode::invalid_argument,
          "validation split leaves an empty side");
  const Matrix train_x = select_columns(raw_features, train_idx);
  const Matrix train_y = select_columns(labels, train_idx);
  const Matrix val_x = select_columns(raw_features, val_idx);
  const Matrix val_y = select_columns(labels, val_idx);

  GridSearchResult out;
  bool have_best = false;
  GridCell best;
  auto key = [](const Hyperparams& hp) { return std::make_tuple(hp.eta, hp.beta1, hp.C); };
  for (double eta : grid.eta) {
    for (double beta1 : grid.beta1) {
      for (double c : grid.C) {
        TrainConfig cfg = base;
        cfg.hyperparams = base.hyperparams.with_grid_point(eta, beta1, c, labels.rows());
        cfg.hyperparams.R = 2;
        const TrainResult trained = train(train_x, train_y, cfg);
        const Matrix scores = score_matrix(trained.model, val_x, cfg.threads);
        const double f1 =
            per_label_prf(threshold_predictions(scores, trained.model.tau_optimal), val_y).f1;
        GridCell cell{cfg.hyperparams, f1};
        cell.params.R = base.hyperparams.R;
        out.cells.push_back(cell);
        const bool better = !have_best || f1 > best.validation_f1 ||
                            (f1 == best.validation_f1 && key(cell.params) < key(best.params));
        if (better) {
          best = cell;
          have_best = true;
        }
      }
    }
  }
  out.best = best.params;
  return out;
}

}  // namespace mcdl
