#include "mcdl/dict_update.hpp"
#include "mcdl/solver.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace mcdl;

namespace {

double eq1_oracle(const Matrix& X, const Matrix& Y, const Matrix& A, const Matrix& DI,
                  const Matrix& DL, double lambda, double beta1, const MarginParams& m) {
  double total = 0.0;
  for (Index i = 0; i < X.cols(); ++i) {
    const double n = Y.col(i).sum();
    total += n / lambda * (X.col(i) - DI * A.col(i)).squaredNorm();
    const Vector s = DL * A.col(i);
    for (Index t = 0; t < Y.rows(); ++t) total += oracle::hinge(Y(t, i), s[t], m.C, m.tau);
  }
  return total + beta1 * DL.cwiseAbs().sum();
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("kmeans degenerate sizes") {
  std::mt19937_64 rng(31);
  const Matrix X = oracle::unit_columns(oracle::gaussian(4, 6, rng));
  const Matrix all = kmeans_init(X, 6, 7);
  // Every point is its own center.
  for (Index j = 0; j < 6; ++j) {
    double best = 1e9;
    for (Index k = 0; k < 6; ++k) best = std::min(best, (all.col(k) - X.col(j)).norm());
    CHECK(best <= 1e-12);
  }
  const Matrix one = kmeans_init(X, 1, 7);
  const Vector mean = X.rowwise().mean();
  CHECK((one.col(0) - mean / mean.norm()).norm() <= 1e-12);
  CHECK_THROWS_AS(kmeans_init(X, 7, 7), Error);
  CHECK(kmeans_init(X, 3, 99) == kmeans_init(X, 3, 99));
}

TEST_CASE("kmeans finds two blobs") {
  std::mt19937_64 rng(32);
  Vector m1 = vec({1, 0, 0}), m2 = vec({0, 0.6, 0.8});
  Matrix X(3, 40);
  const Matrix noise = 0.01 * oracle::gaussian(3, 40, rng);
  for (Index j = 0; j < 40; ++j) X.col(j) = (j % 2 ? m1 : m2) + noise.col(j);
  const Matrix c = kmeans_init(X, 2, 5);
  for (const Vector& m : {m1, m2}) {
    const double d = std::min((c.col(0) - m).norm(), (c.col(1) - m).norm());
    CHECK(d <= 0.1);
  }
}

TEST_CASE("unsupervised dictionary learning") {
  std::mt19937_64 rng(33);
  SUBCASE("exact recovery") {
    const Matrix X = oracle::unit_columns(oracle::gaussian(8, 5, rng));
    const auto r = unsupervised_dl(X, 5, 10, 3);
    CHECK(r.objective_trace.back() <= r.objective_trace.front() + 1e-12);
    CHECK(r.objective_trace.back() <= 1e-6);
  }
  SUBCASE("zero iterations returns the k-means start") {
    const Matrix X = oracle::unit_columns(oracle::gaussian(6, 30, rng));
    const auto r = unsupervised_dl(X, 4, 0, 3);
    CHECK(r.dictionary == kmeans_init(X, 4, 3));
    REQUIRE(r.objective_trace.size() == 1);
    for (Index i = 0; i < X.cols(); ++i)
      CHECK((r.codes.col(i) - nn_lasso(r.dictionary, X.col(i), 1.0)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("objective never increases") {
    const Matrix X = oracle::unit_columns(oracle::gaussian(10, 60, rng));
    const auto r = unsupervised_dl(X, 12, 10, 4);
    REQUIRE(r.objective_trace.size() == 11);
    for (std::size_t s = 1; s < r.objective_trace.size(); ++s)
      CHECK(r.objective_trace[s] <= r.objective_trace[s - 1] + 1e-9);
    for (Index k = 0; k < 12; ++k) CHECK(r.dictionary.col(k).norm() <= 1.0 + 1e-9);
    double recon = 0.0;
    for (Index i = 0; i < X.cols(); ++i) recon += (X.col(i) - r.dictionary * r.codes.col(i)).squaredNorm();
    CHECK(recon == doctest::Approx(r.objective_trace.back()).epsilon(1e-10));
  }
}

TEST_CASE("semantic initialization") {
  Matrix A(1, 1), Y(2, 1);
  A << 0.5;
  Y << 1, 0;
  Matrix L = init_semantic(A, Y, 5.0);
  CHECK(L(0, 0) == doctest::Approx(2.0));
  CHECK(L(1, 0) == 0.0);
  A << 0.1;
  Matrix Y1(1, 1);
  Y1 << 1;
  CHECK(init_semantic(A, Y1, 5.0)(0, 0) == 5.0);
  Matrix A2 = Matrix::Zero(2, 3);
  A2(0, 1) = 0.4;
  Matrix Y2 = Matrix::Ones(2, 3);
  L = init_semantic(A2, Y2, 5.0);
  CHECK(L.col(1).isZero());
}

TEST_CASE("visual prototype update") {
  SUBCASE("single atom closed form") {
    Matrix X(3, 1), A(1, 1), D(3, 1);
    X << 1, 2, 2;
    A << 0.8;
    D << 1, 0, 0;
    const Vector d = update_visual_prototype(0, X, A, Vector::Ones(1), D);
    CHECK((d - X.col(0) / 3.0).norm() <= 1e-12);
  }
  SUBCASE("weighted oracle") {
    std::mt19937_64 rng(34);
    const Matrix X = oracle::unit_columns(oracle::gaussian(5, 3, rng));
    const Matrix D = oracle::unit_columns(oracle::gaussian(5, 4, rng));
    Matrix A(4, 3);
    for (Index i = 0; i < 3; ++i) A.col(i) = oracle::feasible_code(4, 1.0, rng);
    A(2, 0) = 0.3, A(2, 1) = 0.2, A(2, 2) = 0.5;
    const Vector w = vec({1, 3, 2});
    // Plain gradient descent on sum_i w_i ||z_i - d a_i||^2.
    Vector d = Vector::Zero(5);
    double curv = 0.0;
    for (Index i = 0; i < 3; ++i) curv += w[i] * A(2, i) * A(2, i);
    for (int it = 0; it < 2000; ++it) {
      Vector grad = Vector::Zero(5);
      for (Index i = 0; i < 3; ++i) {
        const Vector z = X.col(i) - (D * A.col(i) - D.col(2) * A(2, i));
        grad += -2.0 * w[i] * A(2, i) * (z - d * A(2, i));
      }
      d -= grad / (4.0 * curv);
    }
    d /= d.norm();
    const Vector got = update_visual_prototype(2, X, A, w, D);
    CHECK(got.dot(d) >= 1.0 - 1e-6);
    CHECK(std::abs(got.norm() - 1.0) <= 1e-12);
  }
  SUBCASE("dead atom takes the worst residual") {
    Matrix X(2, 3), A(2, 3), D(2, 2);
    X << 1, 0, 0.6, 0, 1, 0.8;
    D << 1, 0, 0, 1;
    A << 1, 0, 0.6,  //
        0, 0, 0;
    const Vector d = update_visual_prototype(1, X, A, Vector::Ones(3), D);
    // Sample 1 is entirely unexplained.
    CHECK((d - vec({0, 1})).norm() <= 1e-12);
  }
}

TEST_CASE("semantic element examples") {
  const MarginParams half{0.5, 0.5, 5.0};
  SemanticUpdateConfig cfg{0.3, 0.0, 5.0};
  const Vector none(0);
  CHECK(update_semantic_element(none, none, none, 2.0, cfg, half) == 0.0);

  cfg = {0.2, 0.0, 5.0};
  CHECK(update_semantic_element(vec({1}), vec({0}), vec({1}), 0.0, cfg, half) ==
        doctest::Approx(0.9).epsilon(1e-10));

  const MarginParams quarter{0.25, 0.375, 5.0};
  cfg = {0.05, 0.0, 5.0};
  CHECK(update_semantic_element(vec({0.5}), vec({0}), vec({0}), 1.0, cfg, quarter) == 0.0);
}

TEST_CASE("semantic element against grid search") {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MarginParams m{0.5, 0.5, 5.0};
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 1 + static_cast<Index>(u(rng) * 8);
    const Vector a = oracle::uniform(n, 1, 0.01, 1.0, rng).col(0);
    const Vector q = oracle::uniform(n, 1, 0.0, 2.0, rng).col(0);
    const Vector y = oracle::labels(n, 1, 0.5, rng).col(0);
    const SemanticUpdateConfig cfg{0.05 + u(rng), u(rng) * 0.01, 5.0};
    const double d_old = 5.0 * u(rng);
    auto f = [&](double d) {
      double s = cfg.beta1 * d + cfg.rho * (d - d_old) * (d - d_old);
      for (Index i = 0; i < n; ++i) s += oracle::hinge(y[i], d * a[i] + q[i], m.C, m.tau);
      return s;
    };
    const double ref = oracle::grid_golden_argmin(f, 0.0, 5.0, 1e-4);
    const double got = update_semantic_element(a, q, y, d_old, cfg, m);
    CHECK(std::abs(got - ref) <= 1e-6);
    CHECK(f(got) <= f(d_old) + 1e-12);
    CHECK(semantic_element_objective(got, a, q, y, d_old, cfg, m) ==
          doctest::Approx(f(got)).epsilon(1e-12));
  }
}

TEST_CASE("squared semantic element") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = oracle::uniform(5, 1, 0.0, 1.0, rng).col(0);
    const Vector q = oracle::uniform(5, 1, 0.0, 1.0, rng).col(0);
    const Vector target = 5.0 * oracle::labels(5, 1, 0.5, rng).col(0);
    const double d_old = 2.0;
    auto f = [&](double d) {
      return (target - d * a - q).squaredNorm() + 1e-3 * (d - d_old) * (d - d_old);
    };
    const double ref = oracle::grid_golden_argmin(f, 0.0, 5.0, 1e-4);
    CHECK(std::abs(update_semantic_element_squared(a, q, target, d_old, 1e-3, 5.0) - ref) <= 1e-6);
  }
  const Vector one = Vector::Ones(1);
  CHECK(update_semantic_element_squared(one, Vector::Zero(1), one, 0.3, 0.0, 1.0) ==
        doctest::Approx(1.0));
}

TEST_CASE("dictionary update pass") {
  std::mt19937_64 rng(37);
  const Index M = 6, T = 4, K = 8, N = 40;
  const Matrix X = oracle::unit_columns(oracle::gaussian(M, N, rng));
  const Matrix Y = oracle::labels(T, N, 0.4, rng);
  const Matrix DI = oracle::unit_columns(oracle::gaussian(M, K, rng));
  const Matrix DL = oracle::uniform(T, K, 0.0, 5.0, rng);
  Matrix A(K, N);
  for (Index i = 0; i < N; ++i) A.col(i) = oracle::feasible_code(K, 1.0, rng);
  Vector w(N);
  for (Index i = 0; i < N; ++i) w[i] = Y.col(i).sum();
  const SemanticUpdateConfig cfg{0.1, 1e-3, 5.0};
  const MarginParams m{0.5, 0.5, 5.0};

  const DictionaryPair out = dictionary_update_pass(X, Y, A, DI, DL, w, cfg, m, 11);
  for (double lambda : {0.1, 1.0}) {
    CHECK(eq1_oracle(X, Y, A, out.visual, out.semantic, lambda, cfg.beta1, m) <=
          eq1_oracle(X, Y, A, DI, DL, lambda, cfg.beta1, m) + 1e-7);
  }
  for (Index k = 0; k < K; ++k) CHECK(std::abs(out.visual.col(k).norm() - 1.0) <= 1e-9);
  CHECK(out.semantic.minCoeff() >= 0.0);
  CHECK(out.semantic.maxCoeff() <= 5.0);

  const DictionaryPair again = dictionary_update_pass(X, Y, A, DI, DL, w, cfg, m, 11);
  CHECK(again.visual == out.visual);
  CHECK(again.semantic == out.semantic);

  const DictionaryPair idle =
      dictionary_update_pass(X, Y, Matrix::Zero(K, N), DI, DL, w, cfg, m, 11);
  for (Index k = 0; k < K; ++k) {
    CHECK(std::abs(idle.visual.col(k).norm() - 1.0) <= 1e-12);
    double best = 1e9;
    for (Index i = 0; i < N; ++i) best = std::min(best, (idle.visual.col(k) - X.col(i)).norm());
    CHECK(best <= 1e-12);  // replaced by a (normalized) sample
  }
  CHECK((idle.semantic.array() <= DL.array()).all());
}
