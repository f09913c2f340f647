#include "mcdl/data_model.hpp"
#include "mcdl/matrix_io.hpp"
#include "mcdl/model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mcdl;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mcdl::Error");
  return ErrorCode::invalid_argument;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mcdl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("normalize columns") {
  Matrix x(2, 2);
  x << 3, 0, 4, 0;
  const auto n = l2_normalize_columns(x);
  CHECK(n.values(0, 0) == doctest::Approx(0.6));
  CHECK(n.values(1, 0) == doctest::Approx(0.8));
  CHECK(n.values.col(1).isZero());
  REQUIRE(n.zero_columns.size() == 1);
  CHECK(n.zero_columns[0] == 1);

  std::mt19937_64 rng(3);
  const Matrix r = oracle::gaussian(5, 20, rng);
  const Matrix once = l2_normalize_columns(r).values;
  for (Index j = 0; j < once.cols(); ++j) CHECK(std::abs(once.col(j).norm() - 1.0) <= 1e-9);
  const Matrix twice = l2_normalize_columns(once).values;
  CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix bad = r;
  bad(2, 3) = std::nan("");
  CHECK(code_of([&] { l2_normalize_columns(bad); }) == ErrorCode::non_finite);
}

TEST_CASE("label validation and stats") {
  const Matrix eye = Matrix::Identity(3, 3);
  auto s = compute_stats(eye);
  CHECK(s.labels_per_sample == std::vector<int>{1, 1, 1});
  CHECK(s.samples_per_label == std::vector<int>{1, 1, 1});

  s = compute_stats(Matrix::Ones(2, 4));
  CHECK(s.labels_per_sample == std::vector<int>{2, 2, 2, 2});
  CHECK(s.samples_per_label == std::vector<int>{4, 4});

  std::mt19937_64 rng(9);
  const Matrix y = oracle::labels(6, 30, 0.3, rng);
  s = compute_stats(y);
  for (Index i = 0; i < 30; ++i) {
    int c = 0;
    for (Index t = 0; t < 6; ++t) c += y(t, i) == 1.0;
    CHECK(s.labels_per_sample[static_cast<std::size_t>(i)] == c);
  }
  for (Index t = 0; t < 6; ++t) {
    int c = 0;
    for (Index i = 0; i < 30; ++i) c += y(t, i) == 1.0;
    CHECK(s.samples_per_label[static_cast<std::size_t>(t)] == c);
  }

  Matrix holey = y;
  holey.col(7).setZero();
  try {
    compute_stats(holey);
    FAIL("zero label column accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_label_column);
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
  Matrix fractional = y;
  fractional(0, 0) = 0.5;
  CHECK(code_of([&] { validate_labels(fractional); }) == ErrorCode::invalid_argument);
}

TEST_CASE("pca on an exact plane") {
  std::mt19937_64 rng(11);
  const Matrix basis = oracle::gaussian(5, 2, rng);
  const Matrix coeff = oracle::gaussian(2, 40, rng);
  Vector offset = oracle::gaussian(5, 1, rng);
  const Matrix x = (basis * coeff).colwise() + offset;
  const PcaModel pca = fit_pca(x, 2);
  const Matrix projected = apply_pca(pca, x);
  const Matrix back = (pca.basis * projected).colwise() + pca.mean;
  CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((pca.basis.transpose() * pca.basis - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("pca full basis preserves distances") {
  std::mt19937_64 rng(12);
  const Matrix x = oracle::gaussian(4, 30, rng);
  const PcaModel pca = fit_pca(x, 4);
  const Matrix p = apply_pca(pca, x);
  for (Index i = 0; i < 10; ++i)
    for (Index j = i + 1; j < 10; ++j)
      CHECK(std::abs((p.col(i) - p.col(j)).norm() - (x.col(i) - x.col(j)).norm()) <= 1e-8);
}

TEST_CASE("pca explained variance matches the covariance eigendecomposition") {
  std::mt19937_64 rng(13);
  Matrix x = oracle::gaussian(10, 100, rng);
  x.row(0) *= 4.0;
  x.row(3) *= 2.5;
  const PcaModel pca = fit_pca(x, 3);
  const Matrix centered = x.colwise() - x.rowwise().mean();
  const Matrix cov = centered * centered.transpose() / 99.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector ev = es.eigenvalues().reverse();
  const Matrix p = apply_pca(pca, x);
  for (Index k = 0; k < 3; ++k) {
    const double var = p.row(k).squaredNorm() / 99.0;
    CHECK(std::abs(var - ev[k]) <= 1e-8 * std::max(1.0, ev[k]));
  }
  CHECK((pca.mean - x.rowwise().mean()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("apply_pca basics") {
  std::mt19937_64 rng(14);
  const Matrix x = oracle::gaussian(6, 60, rng);
  const PcaModel pca = fit_pca(x, 3);
  CHECK(apply_pca(pca, Vector(pca.mean)).isZero(1e-12));
  const Vector e1 = apply_pca(pca, Vector(pca.mean + pca.basis.col(1)));
  CHECK((e1 - Vector::Unit(3, 1)).cwiseAbs().maxCoeff() <= 1e-12);
  const Matrix batch = x.leftCols(50);
  const Matrix all = apply_pca(pca, batch);
  for (Index j = 0; j < batch.cols(); ++j)
    CHECK((all.col(j) - apply_pca(pca, Vector(batch.col(j)))).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(code_of([&] { fit_pca(x, 7); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { fit_pca(x, 0); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { apply_pca(pca, Vector(Vector::Zero(5))); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("matrix file round trip is bit exact") {
  std::mt19937_64 rng(15);
  Matrix m = oracle::gaussian(7, 13, rng);
  m(0, 0) = -0.0;
  m(1, 2) = std::numeric_limits<double>::denorm_min();
  const auto dir = scratch("io");
  save_matrix(dir / "m.mat", m);
  const Matrix back = load_matrix(dir / "m.mat");
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 13);
  CHECK(std::memcmp(back.data(), m.data(), sizeof(double) * 91) == 0);
}

TEST_CASE("matrix file layout") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  std::ostringstream out;
  write_matrix(out, m);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 24 + 48);
  CHECK(bytes.substr(0, 8) == "MCDLMAT1");
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);
  CHECK(static_cast<unsigned char>(bytes[16]) == 3);
  double second;
  std::memcpy(&second, bytes.data() + 32, 8);  // row-major: (0, 1)
  CHECK(second == 2.0);
}

TEST_CASE("matrix file errors") {
  Matrix m = Matrix::Ones(2, 2);
  std::ostringstream out;
  write_matrix(out, m);
  std::string bytes = out.str();

  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream bad_in(bad);
  CHECK(code_of([&] { read_matrix(bad_in); }) == ErrorCode::bad_magic);

  std::string huge = bytes.substr(0, 8);
  const std::uint64_t big = 1000000000ULL;
  for (int rep = 0; rep < 2; ++rep)
    for (int b = 0; b < 8; ++b) huge.push_back(static_cast<char>((big >> (8 * b)) & 0xFF));
  huge += std::string(64, '\0');
  std::istringstream huge_in(huge);
  CHECK(code_of([&] { read_matrix(huge_in); }) == ErrorCode::truncated_payload);

  std::string overflow = bytes.substr(0, 8);
  for (int rep = 0; rep < 2; ++rep)
    for (int b = 0; b < 8; ++b) overflow.push_back(static_cast<char>(0xFF));
  std::istringstream overflow_in(overflow);
  CHECK(code_of([&] { read_matrix(overflow_in); }) == ErrorCode::dimension_overflow);

  std::istringstream short_in(bytes.substr(0, bytes.size() - 3));
  CHECK(code_of([&] { read_matrix(short_in); }) == ErrorCode::truncated_payload);

  try {
    load_matrix("/nonexistent/dir/features.mat");
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_failure);
    CHECK(std::string(e.what()).find("/nonexistent/dir/features.mat") != std::string::npos);
  }
}

TEST_CASE("model directory round trip") {
  std::mt19937_64 rng(16);
  const Matrix raw = oracle::gaussian(8, 30, rng);
  Hyperparams hp;
  hp.K = 4;
  Model m = make_model(oracle::unit_columns(oracle::gaussian(3, 4, rng)),
                       oracle::uniform(5, 4, 0.0, 5.0, rng), hp, fit_pca(raw, 3), 0.375,
                       Method::cdl);
  CHECK(model_violations(m).empty());
  const auto dir = scratch("model");
  save_model(dir, m);
  for (const char* f : {"meta.json", "visual_dict", "semantic_dict", "pca_mean", "pca_basis"})
    CHECK(std::filesystem::exists(dir / f));
  const Model back = load_model(dir);
  CHECK(back.visual_dict == m.visual_dict);
  CHECK(back.semantic_dict == m.semantic_dict);
  REQUIRE(back.pca.has_value());
  CHECK(back.pca->basis == m.pca->basis);
  CHECK(back.pca->mean == m.pca->mean);
  CHECK(back.tau_optimal == 0.375);
  CHECK(back.method == Method::cdl);
  CHECK(back.hyperparams.K == 4);
  CHECK(back.hyperparams.seed == hp.seed);
  CHECK(back.visual_gram.isApprox(m.visual_gram));

  Model broken = m;
  broken.semantic_dict(0, 0) = 6.0;
  broken.visual_dict.col(1) *= 2.0;
  CHECK(model_violations(broken).size() == 2);
}

TEST_CASE("split indices") {
  const auto [a, b] = split_indices(10, 0.3, 1);
  CHECK(a.size() == 7);
  CHECK(b.size() == 3);
  std::vector<Index> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
  const auto again = split_indices(10, 0.3, 1);
  CHECK(again.first == a);
  CHECK(again.second == b);
}
