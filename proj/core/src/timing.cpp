#include "mcdl/timing.hpp"

#include "mcdl/annotator.hpp"

#include <chrono>
#include <numeric>

namespace mcdl {
namespace {

using Clock = std::chrono::steady_clock;

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

template <typename Fn>
double per_query_ms(const Matrix& queries, Fn&& fn) {
  double sink = 0.0;
  const auto start = Clock::now();
  for (Index q = 0; q < queries.cols(); ++q) sink += fn(queries.col(q));
  const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  // Keeps the compiler from discarding the work.
  volatile double keep = sink;
  (void)keep;
  return ms / static_cast<double>(queries.cols());
}

}  // namespace

TimingReport bench_annotation(const Model& model, const Matrix& queries, const KnnAnnotator& knn,
                              int repeats) {
  require(repeats >= 1, ErrorCode::invalid_argument, "bench needs at least one repeat");
  require(queries.cols() >= 1, ErrorCode::invalid_argument, "bench needs at least one query");
  require(queries.rows() == model.raw_dim(), ErrorCode::dimension_mismatch,
          "queries have " + std::to_string(queries.rows()) + " rows, model expects " +
              std::to_string(model.raw_dim()));
  TimingReport report;
  report.queries = queries.cols();
  for (int r = 0; r < repeats; ++r) {
    report.mcdl_samples.push_back(
        per_query_ms(queries, [&](const Vector& q) { return annotate(model, q).scores.sum(); }));
    report.knn_samples.push_back(
        per_query_ms(queries, [&](const Vector& q) { return knn.scores(q).sum(); }));
  }
  report.mcdl_ms = mean(report.mcdl_samples);
  report.knn_ms = mean(report.knn_samples);
  if (report.knn_ms > 0.0) {
    report.reduction_percent = 100.0 * (report.knn_ms - report.mcdl_ms) / report.knn_ms;
  }
  if (report.mcdl_ms > 0.0) report.speedup = report.knn_ms / report.mcdl_ms;
  return report;
}

}  // namespace mcdl
