#include "cli.hpp"

#include "mcdl/annotator.hpp"
#include "mcdl/baselines.hpp"
#include "mcdl/matrix_io.hpp"
#include "mcdl/metrics.hpp"
#include "mcdl/synth.hpp"
#include "mcdl/timing.hpp"
#include "mcdl/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace mcdl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return usage;
    case ErrorCode::numerical_failure:
      return numerical;
    default:
      return data;
  }
}

int resolve_threads(const std::optional<int>& flag) {
  if (flag) return std::max(1, *flag);
  if (const char* env = std::getenv("MCDL_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      fail(ErrorCode::invalid_argument, std::string("MCDL_THREADS is not an integer: ") + env);
    }
  }
  return 1;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io_failure,
          "cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::io_failure, "config " + path.string() + ": " + e.what());
  }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known, const std::string& what) {
  require(j.is_object(), ErrorCode::invalid_argument, what + " must be a JSON object");
  for (const auto& item : j.items()) {
    require(known.count(item.key()) > 0, ErrorCode::invalid_argument,
            what + ": unknown key \"" + item.key() + "\"");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::invalid_argument, std::string("config key \"") + key + "\" has the wrong type");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::io_failure, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::io_failure, "write failed: " + path.string());
}

std::string format_double(double value) {
  std::ostringstream s;
  s << std::setprecision(17) << value;
  return s.str();
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<Index> samples, dim, tags, prototypes, sparsity;
  std::optional<double> noise, label_density;
  double test_fraction = 0.0;
};

int run_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  SynthSpec spec;
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    reject_unknown_keys(j,
                        {"K_true", "M", "T", "N", "sparsity", "noise_sigma", "label_density", "seed",
                         "v", "tau", "test_fraction"},
                        "synth config");
    spec.K_true = get_or(j, "K_true", spec.K_true);
    spec.M = get_or(j, "M", spec.M);
    spec.T = get_or(j, "T", spec.T);
    spec.N = get_or(j, "N", spec.N);
    spec.sparsity = get_or(j, "sparsity", spec.sparsity);
    spec.noise_sigma = get_or(j, "noise_sigma", spec.noise_sigma);
    spec.label_density = get_or(j, "label_density", spec.label_density);
    spec.seed = get_or(j, "seed", spec.seed);
    spec.v = get_or(j, "v", spec.v);
    spec.tau = get_or(j, "tau", spec.tau);
  }
  if (a.seed) spec.seed = *a.seed;
  if (a.samples) spec.N = *a.samples;
  if (a.dim) spec.M = *a.dim;
  if (a.tags) spec.T = *a.tags;
  if (a.prototypes) spec.K_true = *a.prototypes;
  if (a.sparsity) spec.sparsity = *a.sparsity;
  if (a.noise) spec.noise_sigma = *a.noise;
  if (a.label_density) spec.label_density = *a.label_density;
  require(a.test_fraction >= 0.0 && a.test_fraction < 1.0, ErrorCode::invalid_argument,
          "--test-fraction must lie in [0, 1)");

  const SynthData d = generate_synthetic(spec);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  if (a.test_fraction > 0.0) {
    const DataSplit s = split_dataset(d.features, d.labels, a.test_fraction, spec.seed);
    save_matrix(dir / "features.mat", s.train_features);
    save_matrix(dir / "labels.mat", s.train_labels);
    save_matrix(dir / "test_features.mat", s.test_features);
    save_matrix(dir / "test_labels.mat", s.test_labels);
  } else {
    save_matrix(dir / "features.mat", d.features);
    save_matrix(dir / "labels.mat", d.labels);
  }
  save_matrix(dir / "visual_truth.mat", d.visual_truth);
  save_matrix(dir / "semantic_truth.mat", d.semantic_truth);
  err << "synth: " << spec.N << " samples, M=" << spec.M << " T=" << spec.T
      << " K_true=" << spec.K_true << " -> " << dir.string() << "\n";
  out << "wrote " << dir.string() << "\n";
  return ok;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string features, labels, model_dir, config, method;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<Index> atoms;
};

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  json j = json::object();
  if (!a.config.empty()) {
    j = read_json(a.config);
    reject_unknown_keys(j,
                        {"features", "labels", "method", "K", "seed", "threads", "R", "S",
                         "pca_dim", "unsupervised_iters", "early_stop", "eta", "lambda", "beta0",
                         "beta1", "C", "tau", "v", "rho", "grid", "val_fraction"},
                        "train config");
  }
  const std::string features_path = a.features.empty() ? get_or<std::string>(j, "features", "")
                                                       : a.features;
  const std::string labels_path = a.labels.empty() ? get_or<std::string>(j, "labels", "") : a.labels;
  require(!features_path.empty() && !labels_path.empty(), ErrorCode::invalid_argument,
          "train needs --features and --labels (or config keys)");
  require(!a.model_dir.empty(), ErrorCode::invalid_argument, "train needs --model-dir");

  TrainConfig cfg;
  cfg.method = parse_method(a.method.empty() ? get_or<std::string>(j, "method", "mcdl") : a.method);
  cfg.threads = a.threads ? std::max(1, *a.threads)
                          : (j.contains("threads") ? get_or(j, "threads", 1) : resolve_threads({}));
  cfg.pca_dim = get_or<Index>(j, "pca_dim", cfg.pca_dim);
  cfg.unsupervised_iters = get_or(j, "unsupervised_iters", cfg.unsupervised_iters);
  cfg.early_stop = get_or(j, "early_stop", cfg.early_stop);

  const Matrix x = load_matrix(features_path);
  const Matrix y = load_matrix(labels_path);
  validate_labels(y);

  Hyperparams& hp = cfg.hyperparams;
  const double eta = get_or(j, "eta", 1.0);
  const double beta1 = get_or(j, "beta1", hp.beta1);
  const double c = get_or(j, "C", hp.C);
  hp = hp.with_grid_point(eta, beta1, c, y.rows());
  hp.lambda = get_or(j, "lambda", hp.lambda);
  hp.tau = get_or(j, "tau", hp.tau);
  hp.beta0 = get_or(j, "beta0", hp.beta0);
  hp.v = get_or(j, "v", hp.v);
  hp.rho = get_or(j, "rho", hp.rho);
  hp.S = get_or(j, "S", hp.S);
  hp.R = get_or(j, "R", hp.R);
  hp.K = a.atoms ? *a.atoms : get_or<Index>(j, "K", 0);
  hp.seed = a.seed ? *a.seed : get_or<std::uint64_t>(j, "seed", hp.seed);
  require(hp.K >= 1, ErrorCode::invalid_argument, "train needs --atoms (or config key K)");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown_keys(g, {"eta", "beta1", "C"}, "grid");
    SearchGrid grid;
    grid.eta = get_or(g, "eta", grid.eta);
    grid.beta1 = get_or(g, "beta1", grid.beta1);
    grid.C = get_or(g, "C", grid.C);
    const double fraction = get_or(j, "val_fraction", 0.1);
    err << "grid search over " << grid.size() << " points\n";
    const GridSearchResult search = grid_search(x, y, grid, fraction, hp.seed, cfg);
    const int rounds = hp.R;
    hp = search.best;
    hp.R = rounds;
    err << "chosen eta=" << hp.eta << " beta1=" << hp.beta1 << " C=" << hp.C << "\n";
  }

  const TrainResult result = train(x, y, cfg);
  for (std::size_t r = 0; r < result.report.objective_trace.size(); ++r) {
    err << "round " << r + 1 << " objective " << format_double(result.report.objective_trace[r])
        << "\n";
  }
  for (const auto& [phase, seconds] : result.report.wall_times) {
    err << "time " << phase << " " << seconds << " s\n";
  }
  save_model(a.model_dir, result.model);
  out << "model " << to_string(cfg.method) << " K=" << result.model.atoms()
      << " tau_optimal=" << format_double(result.model.tau_optimal) << " -> " << a.model_dir
      << "\n";
  return ok;
}

// ---- annotate -------------------------------------------------------------

struct AnnotateArgs {
  std::string model_dir, features, out;
  std::optional<int> threads;
  std::optional<Index> topn;
};

int run_annotate(const AnnotateArgs& a, std::ostream& out, std::ostream& err) {
  const Model model = load_model(a.model_dir);
  const Matrix x = load_matrix(a.features);
  const Matrix scores = score_matrix(model, x, resolve_threads(a.threads));
  const Matrix predicted =
      a.topn ? topn_predictions(scores, *a.topn) : threshold_predictions(scores, model.tau_optimal);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  save_matrix(dir / "scores.mat", scores);
  save_matrix(dir / "predictions.mat", predicted);
  std::ostringstream text;
  for (Index q = 0; q < predicted.cols(); ++q) {
    bool first = true;
    for (Index t = 0; t < predicted.rows(); ++t) {
      if (predicted(t, q) == 0.0) continue;
      text << (first ? "" : " ") << t;
      first = false;
    }
    text << "\n";
  }
  write_text(dir / "predictions.txt", text.str());
  err << "annotated " << x.cols() << " queries\n";
  out << "wrote " << dir.string() << "\n";
  return ok;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string predictions, labels, scores, curve, curve_mode = "threshold", out;
  std::optional<Index> topn;
  double v = 5.0;
};

std::string metrics_table(const PRF& prf) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1);
  s << "metric     value\n";
  s << "precision  " << 100.0 * prf.precision << "\n";
  s << "recall     " << 100.0 * prf.recall << "\n";
  s << "f1         " << 100.0 * prf.f1 << "\n";
  return s.str();
}

int run_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const Matrix truth = load_matrix(a.labels);
  std::optional<Matrix> scores;
  if (!a.scores.empty()) scores = load_matrix(a.scores);

  Matrix predicted;
  if (!a.predictions.empty()) {
    predicted = load_matrix(a.predictions);
  } else if (scores && a.topn) {
    predicted = topn_predictions(*scores, *a.topn);
  } else {
    fail(ErrorCode::invalid_argument, "eval needs --predictions, or --scores with --topn");
  }
  const std::string table = metrics_table(per_label_prf(predicted, truth));
  out << table;
  if (!a.out.empty()) write_text(a.out, table);

  if (!a.curve.empty()) {
    require(scores.has_value(), ErrorCode::invalid_argument, "--curve needs --scores");
    CurveMode mode;
    if (a.curve_mode == "threshold") mode = CurveMode::threshold;
    else if (a.curve_mode == "topn") mode = CurveMode::topn;
    else fail(ErrorCode::invalid_argument, "--curve-mode must be threshold or topn");
    const PRCurve curve = pr_curve(*scores, truth, mode, a.v);
    std::ostringstream csv;
    csv << std::setprecision(17);
    for (const PRPoint& p : curve.points) {
      csv << p.operating_point << "," << p.prf.precision << "," << p.prf.recall << "\n";
    }
    write_text(a.curve, csv.str());
    err << "wrote " << curve.points.size() << " curve points to " << a.curve << "\n";
  }
  return ok;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string model_dir, features, labels, queries, baseline = "knn", out;
  Index k = 5;
  Index max_queries = 1000;
  int repeats = 1;
};

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  require(a.baseline == "knn", ErrorCode::invalid_argument, "only --baseline knn is supported");
  const Model model = load_model(a.model_dir);
  Matrix x = load_matrix(a.features);
  Matrix y = load_matrix(a.labels);
  Matrix q = a.queries.empty() ? x : load_matrix(a.queries);
  const Index count = std::min<Index>(q.cols(), a.max_queries);
  require(count >= 1, ErrorCode::invalid_argument, "--max-queries must be >= 1");
  const Matrix queries = q.leftCols(count);
  const KnnAnnotator knn(std::move(x), std::move(y), a.k);
  const TimingReport r = bench_annotation(model, queries, knn, a.repeats);
  std::ostringstream s;
  s << std::fixed << std::setprecision(4);
  s << "queries        " << r.queries << "\n";
  s << "mcdl_ms        " << r.mcdl_ms << "\n";
  s << "knn_ms         " << r.knn_ms << "\n";
  s << std::setprecision(1);
  s << "reduction_pct  " << r.reduction_percent << "\n";
  s << std::setprecision(2);
  s << "speedup        " << r.speedup << "\n";
  out << s.str();
  if (!a.out.empty()) write_text(a.out, s.str());
  err << "bench: " << a.repeats << " repeat(s), k=" << a.k << "\n";
  return ok;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coupled dictionary learning for multi-label annotation", "mcdl"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--config", synth.config, "JSON generator spec");
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--samples", synth.samples, "Number of samples N");
  s->add_option("--dim", synth.dim, "Feature dimension M");
  s->add_option("--tags", synth.tags, "Number of labels T");
  s->add_option("--prototypes", synth.prototypes, "Ground-truth prototypes K_true");
  s->add_option("--sparsity", synth.sparsity, "Prototypes mixed per sample");
  s->add_option("--noise", synth.noise, "Gaussian noise sigma");
  s->add_option("--label-density", synth.label_density, "Per-prototype label probability");
  s->add_option("--test-fraction", synth.test_fraction, "Hold out this fraction as test_*.mat");

  TrainArgs train_args;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--features", train_args.features, "Feature matrix file");
  t->add_option("--labels", train_args.labels, "Label matrix file");
  t->add_option("--model-dir", train_args.model_dir, "Output model directory")->required();
  t->add_option("--config", train_args.config, "JSON training config");
  t->add_option("--seed", train_args.seed, "Random seed");
  t->add_option("--threads", train_args.threads, "Worker threads");
  t->add_option("--method", train_args.method, "mcdl | udl | cdl");
  t->add_option("--atoms", train_args.atoms, "Dictionary size K");

  AnnotateArgs annotate_args;
  auto* an = app.add_subcommand("annotate", "Score and label queries");
  an->add_option("--model-dir", annotate_args.model_dir, "Model directory")->required();
  an->add_option("--features", annotate_args.features, "Query feature matrix")->required();
  an->add_option("--out", annotate_args.out, "Output directory")->required();
  an->add_option("--threads", annotate_args.threads, "Worker threads");
  an->add_option("--topn", annotate_args.topn, "Assign the n best labels instead of thresholding");

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "Precision / recall / F1 of predictions");
  ev->add_option("--labels", eval_args.labels, "Ground-truth label matrix")->required();
  ev->add_option("--predictions", eval_args.predictions, "Binary prediction matrix");
  ev->add_option("--scores", eval_args.scores, "Score matrix (for --topn and --curve)");
  ev->add_option("--topn", eval_args.topn, "Predict the n best labels from --scores");
  ev->add_option("--curve", eval_args.curve, "Write the precision-recall curve as CSV");
  ev->add_option("--curve-mode", eval_args.curve_mode, "threshold | topn");
  ev->add_option("--v", eval_args.v, "Upper score bound for the threshold sweep");
  ev->add_option("--out", eval_args.out, "Also write the metrics table here");

  BenchArgs bench_args;
  auto* b = app.add_subcommand("bench", "Annotation time against a KNN baseline");
  b->add_option("--model-dir", bench_args.model_dir, "Model directory")->required();
  b->add_option("--features", bench_args.features, "Training features for KNN")->required();
  b->add_option("--labels", bench_args.labels, "Training labels for KNN")->required();
  b->add_option("--queries", bench_args.queries, "Query matrix (default: training features)");
  b->add_option("--baseline", bench_args.baseline, "Baseline annotator")->check(
      CLI::IsMember({"knn"}));
  b->add_option("--k", bench_args.k, "Neighbours");
  b->add_option("--max-queries", bench_args.max_queries, "Use at most this many queries");
  b->add_option("--repeats", bench_args.repeats, "Timing repeats");
  b->add_option("--out", bench_args.out, "Also write the report here");

  std::string inspect_dir;
  auto* in = app.add_subcommand("inspect", "Print model metadata");
  in->add_option("--model-dir", inspect_dir, "Model directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*s) return run_synth(synth, out, err);
    if (*t) return run_train(train_args, out, err);
    if (*an) return run_annotate(annotate_args, out, err);
    if (*ev) return run_eval(eval_args, out, err);
    if (*b) return run_bench(bench_args, out, err);
    if (*in) {
      out << model_metadata_json(load_model(inspect_dir)) << "\n";
      return ok;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return data;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return data;
  }
  return usage;
}

}  // namespace mcdl::cli
