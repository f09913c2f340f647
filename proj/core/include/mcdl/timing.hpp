#pragma once

#include "mcdl/baselines.hpp"
#include "mcdl/common.hpp"
#include "mcdl/model.hpp"

#include <vector>

namespace mcdl {

struct TimingReport {
  double mcdl_ms = 0.0;  // mean per-query annotation time
  double knn_ms = 0.0;
  double reduction_percent = 0.0;  // 100 * (knn - mcdl) / knn
  double speedup = 0.0;            // knn / mcdl
  std::vector<double> mcdl_samples;  // per-repeat mean per-query milliseconds
  std::vector<double> knn_samples;
  Index queries = 0;
};

/// Times `annotate` and the KNN baseline over every column of `queries`
/// (raw features, same space for both), `repeats` times each, on the calling
/// thread. The reported means are the means of the recorded samples.
TimingReport bench_annotation(const Model& model, const Matrix& queries, const KnnAnnotator& knn,
                              int repeats = 1);

}  // namespace mcdl
