#include "mcdl/model.hpp"

#include "mcdl/matrix_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace mcdl {
namespace {

using nlohmann::json;

json hyperparams_to_json(const Hyperparams& hp) {
  return json{{"lambda", hp.lambda}, {"eta", hp.eta}, {"beta0", hp.beta0}, {"beta1", hp.beta1},
              {"C", hp.C},           {"tau", hp.tau}, {"v", hp.v},         {"rho", hp.rho},
              {"S", hp.S},           {"R", hp.R},     {"K", hp.K},         {"seed", hp.seed}};
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams hp;
  hp.lambda = j.at("lambda").get<double>();
  hp.eta = j.at("eta").get<double>();
  hp.beta0 = j.at("beta0").get<double>();
  hp.beta1 = j.at("beta1").get<double>();
  hp.C = j.at("C").get<double>();
  hp.tau = j.at("tau").get<double>();
  hp.v = j.at("v").get<double>();
  hp.rho = j.at("rho").get<double>();
  hp.S = j.at("S").get<int>();
  hp.R = j.at("R").get<int>();
  hp.K = j.at("K").get<Index>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

json metadata(const Model& model) {
  return json{{"format_version", kModelFormatVersion},
              {"method", to_string(model.method)},
              {"dims",
               {{"raw", model.raw_dim()},
                {"features", model.feature_dim()},
                {"tags", model.tags()},
                {"atoms", model.atoms()}}},
              {"tau_optimal", model.tau_optimal},
              {"seed", model.hyperparams.seed},
              {"pca", model.pca.has_value()},
              {"hyperparams", hyperparams_to_json(model.hyperparams)}};
}

}  // namespace

Model make_model(Matrix visual, Matrix semantic, Hyperparams hp, std::optional<PcaModel> pca,
                 double tau_optimal, Method method) {
  require(visual.cols() == semantic.cols(), ErrorCode::dimension_mismatch,
          "visual dictionary " + shape_string(visual) + " and semantic dictionary " +
              shape_string(semantic) + " disagree on atom count");
  if (pca) {
    require(pca->output_dim() == visual.rows(), ErrorCode::dimension_mismatch,
            "PCA output dimension does not match the visual dictionary");
  }
  Model model;
  model.visual_dict = std::move(visual);
  model.semantic_dict = std::move(semantic);
  model.hyperparams = hp;
  model.pca = std::move(pca);
  model.tau_optimal = tau_optimal;
  model.method = method;
  model.visual_gram = model.visual_dict.transpose() * model.visual_dict;
  return model;
}

std::vector<std::string> model_violations(const Model& model, double tol) {
  std::vector<std::string> issues;
  for (Index k = 0; k < model.atoms(); ++k) {
    const double norm = model.visual_dict.col(k).norm();
    if (!(norm <= 1.0 + tol)) {
      issues.push_back("visual atom " + std::to_string(k) + " has norm " + std::to_string(norm));
    }
  }
  const double v = model.hyperparams.v;
  if (model.semantic_dict.size() > 0) {
    if (!(model.semantic_dict.minCoeff() >= 0.0)) issues.push_back("semantic entry below 0");
    if (!(model.semantic_dict.maxCoeff() <= v)) issues.push_back("semantic entry above v");
  }
  if (!model.visual_dict.allFinite() || !model.semantic_dict.allFinite()) {
    issues.push_back("dictionary has non-finite entries");
  }
  return issues;
}

void save_model(const std::filesystem::path& dir, const Model& model) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_failure, "cannot create model directory " + dir.string());
  {
    std::ofstream meta(dir / "meta.json", std::ios::trunc);
    if (!meta) fail(ErrorCode::io_failure, "cannot write " + (dir / "meta.json").string());
    meta << metadata(model).dump(2) << '\n';
  }
  save_matrix(dir / "visual_dict", model.visual_dict);
  save_matrix(dir / "semantic_dict", model.semantic_dict);
  if (model.pca) {
    save_matrix(dir / "pca_mean", model.pca->mean);
    save_matrix(dir / "pca_basis", model.pca->basis);
  } else {
    std::filesystem::remove(dir / "pca_mean", ec);
    std::filesystem::remove(dir / "pca_basis", ec);
  }
}

Model load_model(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) fail(ErrorCode::io_failure, "cannot open " + (dir / "meta.json").string());
  json meta;
  try {
    meta = json::parse(meta_in);
    const int version = meta.at("format_version").get<int>();
    require(version == kModelFormatVersion, ErrorCode::invalid_argument,
            "unsupported model format version " + std::to_string(version));
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, "malformed meta.json: " + std::string(e.what()));
  }
  std::optional<PcaModel> pca;
  if (meta.value("pca", false)) {
    PcaModel p;
    p.mean = load_matrix(dir / "pca_mean");
    p.basis = load_matrix(dir / "pca_basis");
    pca = std::move(p);
  }
  Hyperparams hp;
  Method method = Method::mcdl;
  double tau = 0.0;
  try {
    hp = hyperparams_from_json(meta.at("hyperparams"));
    method = parse_method(meta.at("method").get<std::string>());
    tau = meta.at("tau_optimal").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_argument, "malformed meta.json: " + std::string(e.what()));
  }
  return make_model(load_matrix(dir / "visual_dict"), load_matrix(dir / "semantic_dict"), hp,
                    std::move(pca), tau, method);
}

std::string model_metadata_json(const Model& model) { return metadata(model).dump(2); }

}  // namespace mcdl
