#pragma once

#include "mcdl/common.hpp"
#include "mcdl/data_model.hpp"
#include "mcdl/params.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mcdl {

inline constexpr int kModelFormatVersion = 1;

/// A trained coupled dictionary. The coupled dictionary D^C is the vertical
/// stack of visual_dict (M x K) over semantic_dict (T x K).
struct Model {
  Matrix visual_dict;
  Matrix semantic_dict;
  Hyperparams hyperparams;
  std::optional<PcaModel> pca;
  double tau_optimal = 0.0;
  Method method = Method::mcdl;

  /// visual_dict^T visual_dict, cached so that encoding a query costs
  /// O(K M) plus the active-set work, independent of the training size.
  Matrix visual_gram;

  Index atoms() const { return visual_dict.cols(); }
  Index feature_dim() const { return visual_dict.rows(); }
  Index raw_dim() const { return pca ? pca->input_dim() : visual_dict.rows(); }
  Index tags() const { return semantic_dict.rows(); }
};

Model make_model(Matrix visual, Matrix semantic, Hyperparams hp, std::optional<PcaModel> pca,
                 double tau_optimal, Method method);

/// Lists violated model invariants (empty when the model is well formed).
std::vector<std::string> model_violations(const Model& model, double tol = 1e-9);

/// Writes meta.json, visual_dict, semantic_dict and, when present,
/// pca_mean / pca_basis into `dir` (created if missing).
void save_model(const std::filesystem::path& dir, const Model& model);
Model load_model(const std::filesystem::path& dir);

/// Pretty-printed meta.json contents, used by `mcdl inspect`.
std::string model_metadata_json(const Model& model);

}  // namespace mcdl
