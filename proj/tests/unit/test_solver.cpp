#include "mcdl/solver.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace mcdl;

namespace {

const MarginParams kHalf{0.5, 0.5, 5.0};
const MarginParams kQuarter{0.25, 0.375, 5.0};

struct CodingInstance {
  Vector x, y;
  Matrix visual, semantic;
};

CodingInstance random_coding(std::mt19937_64& rng, Index M, Index T, Index K) {
  CodingInstance c;
  c.visual = oracle::unit_columns(oracle::gaussian(M, K, rng));
  c.semantic = oracle::uniform(T, K, 0.0, 5.0, rng);
  c.x = oracle::unit_columns(oracle::gaussian(M, 1, rng)).col(0);
  c.y = oracle::labels(T, 1, 0.4, rng).col(0);
  return c;
}

// f by direct composition of the case-by-case hinge and the reconstruction.
double f_oracle(const CodingInstance& c, const Vector& a, double lambda, const MarginParams& m) {
  const Vector s = c.semantic * a;
  double h = 0.0;
  for (Index t = 0; t < s.size(); ++t) h += oracle::hinge(c.y[t], s[t], m.C, m.tau);
  return (c.x - c.visual * a).squaredNorm() + lambda / c.y.sum() * h;
}

}  // namespace

TEST_CASE("hinge loss values") {
  CHECK(hinge_loss(1.0, 1.0, kHalf) == 0.0);
  CHECK(hinge_loss(1.0, 0.5, kHalf) == doctest::Approx(0.25));
  CHECK(hinge_loss(0.0, 0.75, kHalf) == doctest::Approx(0.5625));
  CHECK(hinge_loss(0.0, 0.0, kHalf) == 0.0);
}

TEST_CASE("slack vector") {
  Vector y(2), s(2);
  y << 1, 0;
  s << 0.625, 0.125;
  CHECK(slack_vector(y, s, kQuarter).isZero());
  s << 0, 0;
  const Vector xi = slack_vector(y, s, kQuarter);
  CHECK(xi[0] == doctest::Approx(0.625));
  CHECK(xi[1] == 0.0);

  std::mt19937_64 rng(21);
  const Vector yy = oracle::labels(30, 1, 0.5, rng).col(0);
  const Vector ss = oracle::uniform(30, 1, 0.0, 2.0, rng).col(0);
  const Vector sl = slack_vector(yy, ss, kHalf);
  for (Index t = 0; t < 30; ++t) {
    CHECK(sl[t] >= 0.0);
    CHECK(sl[t] * sl[t] == doctest::Approx(hinge_loss(yy[t], ss[t], kHalf)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(slack_vector(yy, Vector(Vector::Zero(3)), kHalf), Error);
}

TEST_CASE("surrogate targets") {
  Vector y(3), s(3);
  y << 1, 0, 1;
  s << 0.1, 0.3, 0.2;
  Vector xi(3);
  xi << 0.5, 0.1, 0.0;
  const Vector t = surrogate_targets(y, s, xi, kQuarter);
  CHECK(t[0] == doctest::Approx(0.625));
  CHECK(t[1] == doctest::Approx(0.125));
  CHECK(t[2] == 0.2);
}

TEST_CASE("nn_lasso small closed forms") {
  const Matrix eye = Matrix::Identity(2, 2);
  Vector b(2);
  b << 0.3, 0.2;
  Vector a = nn_lasso(eye, b, 1.0);
  CHECK(a[0] == doctest::Approx(0.3));
  CHECK(a[1] == doctest::Approx(0.2));
  b << 2, 0;
  a = nn_lasso(eye, b, 1.0);
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(0.0));
  b << -1, -2;
  CHECK(nn_lasso(eye, b, 1.0).isZero());
  Matrix bad = eye;
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(nn_lasso(bad, b, 1.0), Error);
}

TEST_CASE("nn_lasso matches projected gradient on random instances") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix D = oracle::gaussian(8, 12, rng);
    const Vector b = 1.5 * oracle::gaussian(8, 1, rng).col(0);
    const Vector a = nn_lasso(D, b, 1.0);
    CHECK(is_feasible(a, 1.0));
    const Vector ref = oracle::projected_gradient_lasso(D, b, 1.0);
    const double f = oracle::lasso_objective(D, b, a);
    const double g = oracle::lasso_objective(D, b, ref);
    CHECK(std::abs(f - g) <= 1e-6 * std::abs(g) + 1e-12);
  }
}

TEST_CASE("nn_lasso handles degenerate dictionaries") {
  std::mt19937_64 rng(23);
  Matrix D = oracle::gaussian(5, 6, rng);
  D.col(3) = D.col(1);  // duplicate atom
  D.col(5).setZero();   // dead atom
  const Vector b = D.col(1) * 0.7;
  const Vector a = nn_lasso(D, b, 1.0);
  CHECK(is_feasible(a, 1.0));
  CHECK(oracle::lasso_objective(D, b, a) <= 1e-12);
  CHECK(a[1] >= a[3]);  // lowest index enters first
}

TEST_CASE("capped simplex projection agrees with the oracle") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector p = 2.0 * oracle::gaussian(9, 1, rng).col(0);
    CHECK((project_capped_simplex(p, 1.0) - oracle::project_capped_simplex(p, 1.0))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("coupled objective composition") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const CodingInstance c = random_coding(rng, 6, 4, 8);
    const Vector a = oracle::feasible_code(8, 1.0, rng);
    const double lambda = 0.3;
    const double f = coupled_objective_f(c.x, c.y, a, c.visual, c.semantic, lambda, c.y.sum(), kHalf);
    CHECK(f == doctest::Approx(f_oracle(c, a, lambda, kHalf)).epsilon(1e-12));
    const double f0 = coupled_objective_f(c.x, c.y, a, c.visual, c.semantic, 0.0, c.y.sum(), kHalf);
    CHECK(f0 == doctest::Approx((c.x - c.visual * a).squaredNorm()).epsilon(1e-14));
  }
  // x = 0, a = 0: only hinge terms at score 0 remain.
  Vector y(2);
  y << 1, 0;
  const double f = coupled_objective_f(Vector::Zero(3), y, Vector::Zero(4), Matrix::Ones(3, 4),
                                       Matrix::Ones(2, 4), 2.0, 1.0, kHalf);
  CHECK(f == doctest::Approx(2.0 * 1.0));  // positive: (0.5 + 0.5)^2; negative: 0
}

TEST_CASE("surrogate majorizes the coupled objective") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 20; ++trial) {
    const CodingInstance c = random_coding(rng, 6, 4, 8);
    const double lambda = 0.7, n = c.y.sum();
    const Vector prev = oracle::feasible_code(8, 1.0, rng);
    const Vector s = c.semantic * prev;
    const Vector targets = surrogate_targets(c.y, s, slack_vector(c.y, s, kHalf), kHalf);
    const double g_prev = surrogate_objective_g(c.x, targets, prev, c.visual, c.semantic, lambda, n);
    CHECK(std::abs(g_prev - f_oracle(c, prev, lambda, kHalf)) <= 1e-12);
    CHECK(surrogate_objective_g(c.x, s, prev, c.visual, c.semantic, lambda, n) ==
          doctest::Approx((c.x - c.visual * prev).squaredNorm()).epsilon(1e-14));
    for (int probe = 0; probe < 100; ++probe) {
      const Vector a = oracle::feasible_code(8, 1.0, rng);
      CHECK(surrogate_objective_g(c.x, targets, a, c.visual, c.semantic, lambda, n) >=
            f_oracle(c, a, lambda, kHalf) - 1e-12);
    }
  }
}

TEST_CASE("mcsc degenerate cases") {
  std::mt19937_64 rng(27);
  const CodingInstance c = random_coding(rng, 6, 4, 8);
  Hyperparams hp;
  hp.K = 8;
  hp.lambda = 0.0;
  const McscState zero = mcsc(c.x, c.y, c.visual, c.semantic, hp);
  CHECK((zero.code - nn_lasso(c.visual, c.x, 1.0)).cwiseAbs().maxCoeff() <= 1e-12);

  hp.lambda = 0.5;
  hp.S = 1;
  const McscState one = mcsc(c.x, c.y, c.visual, c.semantic, hp);
  // One solve against tau +/- C for every label.
  const double w = std::sqrt(hp.lambda / c.y.sum());
  Matrix stacked(6 + 4, 8);
  stacked << c.visual, w * c.semantic;
  Vector rhs(10);
  const Vector targets = (c.y.array() * 2.0 - 1.0) * hp.C + hp.tau;
  rhs << c.x, w * targets;
  const Vector direct = nn_lasso(stacked, rhs, 1.0);
  CHECK(oracle::lasso_objective(stacked, rhs, one.code) <=
        oracle::lasso_objective(stacked, rhs, direct) + 1e-10);

  CHECK_THROWS_AS(mcsc(c.x, Vector(Vector::Zero(4)), c.visual, c.semantic, hp), Error);
  CHECK_THROWS_AS(mcsc(Vector(Vector::Zero(5)), c.y, c.visual, c.semantic, hp), Error);
}

TEST_CASE("mcsc inner iterations never increase f") {
  std::mt19937_64 rng(28);
  Hyperparams hp;
  hp.K = 8;
  hp.lambda = 1.5;
  for (int trial = 0; trial < 30; ++trial) {
    const CodingInstance c = random_coding(rng, 6, 4, 8);
    const McscState st = mcsc(c.x, c.y, c.visual, c.semantic, hp);
    REQUIRE(st.objective_trace.size() == 4);
    for (std::size_t s = 1; s < st.objective_trace.size(); ++s)
      CHECK(st.objective_trace[s] <= st.objective_trace[s - 1] + 1e-9);
    CHECK(is_feasible(st.code, 1.0));
    CHECK(st.objective == doctest::Approx(f_oracle(c, st.code, hp.lambda, hp.margin())).epsilon(1e-12));
    CHECK((st.scores - c.semantic * st.code).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((st.slacks - slack_vector(c.y, st.scores, hp.margin())).cwiseAbs().maxCoeff() <= 1e-15);
  }
}
