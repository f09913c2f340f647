#pragma once

#include "mcdl/common.hpp"
#include "mcdl/data_model.hpp"
#include "mcdl/dict_update.hpp"
#include "mcdl/model.hpp"
#include "mcdl/params.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mcdl {

struct TrainConfig {
  Method method = Method::mcdl;
  Hyperparams hyperparams;
  Index pca_dim = 200;          // 0 disables PCA; skipped when raw dim <= pca_dim
  int unsupervised_iters = 10;  // alternations of the visual initialization
  int threads = 1;
  bool early_stop = false;      // stop when a round improves the objective by < 1e-5 (relative)
  double lasso_tol = 1e-8;
};

struct TrainReport {
  std::vector<double> objective_trace;  // objective after each outer round
  std::vector<double> pass_before;      // objective entering each dictionary pass (codes fixed)
  std::vector<double> pass_after;       // objective leaving it
  std::vector<double> unsupervised_trace;
  Hyperparams chosen_params;
  std::vector<std::pair<std::string, double>> wall_times;  // seconds per phase
  Matrix codes;                // final training codes (K x N)
  Matrix processed_features;   // training features after PCA + normalization
};

struct TrainResult {
  Model model;
  TrainReport report;
};

/// sum_i [ (n+_i / lambda) ||x_i - D_I a_i||^2 + sum_t loss(y_ti, d_t^L a_i) ]
///   + beta1 * sum |D_L|,
/// with the squared hinge for MCDL/UDL and (v y - score)^2 without the l1
/// term for the squared-loss ablation. `features` must be preprocessed.
double global_objective(const Matrix& features, const Matrix& labels, const Matrix& codes,
                        const Matrix& visual, const Matrix& semantic, const DatasetStats& stats,
                        const Hyperparams& hp, SemanticLoss loss = SemanticLoss::squared_hinge);

double global_objective(const Model& model, const Matrix& features, const Matrix& labels,
                        const DatasetStats& stats, const Matrix& codes);

/// Normalization (after the optional PCA), k-means + unsupervised
/// initialization of the visual dictionary, semantic initialization, then R
/// rounds of coupled coding followed by a dictionary pass. tau_optimal is
/// chosen on the training set. Deterministic for a fixed seed.
TrainResult train(const Matrix& raw_features, const Matrix& labels, const TrainConfig& config);

struct SearchGrid {
  std::vector<double> eta{0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> beta1{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75, 1.0};
  std::vector<double> C{0.25, 0.5};

  std::size_t size() const { return eta.size() * beta1.size() * C.size(); }
};

struct GridCell {
  Hyperparams params;
  double validation_f1 = 0.0;
};

struct GridSearchResult {
  Hyperparams best;
  std::vector<GridCell> cells;
};

/// Holds out `validation_fraction` of the samples (seeded), trains every
/// grid point with R = 2 and keeps the best validation F1. Ties go to the
/// smaller eta, then beta1, then C. The returned parameters carry the R of
/// `base`.
GridSearchResult grid_search(const Matrix& raw_features, const Matrix& labels,
                             const SearchGrid& grid, double validation_fraction,
                             std::uint64_t seed, const TrainConfig& base);

}  // namespace mcdl
