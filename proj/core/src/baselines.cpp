#include "mcdl/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace mcdl {

TrainResult train_udl(const Matrix& raw_features, const Matrix& labels, Index atoms,
                      TrainConfig config) {
  config.method = Method::udl;
  config.hyperparams.K = atoms;
  return train(raw_features, labels, config);
}

TrainResult train_cdl(const Matrix& raw_features, const Matrix& labels, Index atoms,
                      TrainConfig config) {
  config.method = Method::cdl;
  config.hyperparams.K = atoms;
  return train(raw_features, labels, config);
}

namespace {

Vector neighbour_vote(const Vector& distances, const Matrix& labels, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(distances.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
    if (distances[a] != distances[b]) return distances[a] < distances[b];
    return a < b;
  });
  Vector scores = Vector::Zero(labels.rows());
  for (Index r = 0; r < k; ++r) scores += labels.col(order[static_cast<std::size_t>(r)]);
  return scores / static_cast<double>(k);
}

}  // namespace

Vector knn_annotate(const Matrix& train_features, const Matrix& train_labels, const Vector& query,
                    Index k) {
  require(train_features.cols() == train_labels.cols(), ErrorCode::dimension_mismatch,
          "knn: features and labels disagree on sample count");
  require(query.size() == train_features.rows(), ErrorCode::dimension_mismatch,
          "knn: query length " + std::to_string(query.size()) + " vs feature dim " +
              std::to_string(train_features.rows()));
  require(k >= 1 && k <= train_features.cols(), ErrorCode::invalid_argument,
          "knn: k = " + std::to_string(k) + " outside [1, " +
              std::to_string(train_features.cols()) + "]");
  const Vector distances = (train_features.colwise() - query).colwise().squaredNorm().transpose();
  return neighbour_vote(distances, train_labels, k);
}

KnnAnnotator::KnnAnnotator(Matrix train_features, Matrix train_labels, Index k)
    : features_(std::move(train_features)), labels_(std::move(train_labels)), k_(k) {
  require(features_.cols() == labels_.cols(), ErrorCode::dimension_mismatch,
          "knn: features and labels disagree on sample count");
  require(k_ >= 1 && k_ <= features_.cols(), ErrorCode::invalid_argument,
          "knn: k = " + std::to_string(k_) + " outside [1, " + std::to_string(features_.cols()) +
              "]");
  squared_norms_ = features_.colwise().squaredNorm().transpose();
}

Vector KnnAnnotator::scores(const Vector& query) const {
  require(query.size() == features_.rows(), ErrorCode::dimension_mismatch,
          "knn: query length mismatch");
  // ||x_i||^2 - 2 x_i^T q orders neighbours exactly like ||x_i - q||^2.
  Vector distances = squared_norms_;
  distances.noalias() -= 2.0 * (features_.transpose() * query);
  return neighbour_vote(distances, labels_, k_);
}

Matrix KnnAnnotator::score_matrix(const Matrix& queries) const {
  Matrix out(labels_.rows(), queries.cols());
  for (Index q = 0; q < queries.cols(); ++q) out.col(q) = scores(queries.col(q));
  return out;
}

}  // namespace mcdl
