#include "mcdl/params.hpp"

#include <cmath>

namespace mcdl {

void MarginParams::validate() const {
  require(std::isfinite(C) && C > 0.0, ErrorCode::invalid_argument, "margin C must be positive");
  require(std::isfinite(v) && v > 0.0, ErrorCode::invalid_argument, "score bound v must be positive");
  require(tau - C >= 0.0 && tau + C <= v, ErrorCode::invalid_argument,
          "margin targets tau - C and tau + C must lie in [0, v]");
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::mcdl: return "mcdl";
    case Method::udl: return "udl";
    case Method::cdl: return "cdl";
  }
  return "mcdl";
}

Method parse_method(const std::string& name) {
  if (name == "mcdl") return Method::mcdl;
  if (name == "udl") return Method::udl;
  if (name == "cdl") return Method::cdl;
  fail(ErrorCode::invalid_argument, "unknown method '" + name + "' (expected mcdl, udl or cdl)");
}

Hyperparams Hyperparams::with_grid_point(double eta_value, double beta1_value, double C_value,
                                         Index tag_count) const {
  require(tag_count > 0, ErrorCode::invalid_argument, "tag count must be positive");
  Hyperparams hp = *this;
  hp.eta = eta_value;
  hp.lambda = eta_value * eta_value / static_cast<double>(tag_count);
  hp.beta1 = beta1_value;
  hp.C = C_value;
  hp.tau = 0.25 + C_value / 2.0;
  return hp;
}

void Hyperparams::validate() const {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::invalid_argument,
          "lambda must be finite and nonnegative");
  require(std::isfinite(beta0) && beta0 > 0.0, ErrorCode::invalid_argument, "beta0 must be positive");
  require(std::isfinite(beta1) && beta1 >= 0.0, ErrorCode::invalid_argument,
          "beta1 must be finite and nonnegative");
  require(std::isfinite(rho) && rho >= 0.0, ErrorCode::invalid_argument,
          "rho must be finite and nonnegative");
  require(S >= 1, ErrorCode::invalid_argument, "S must be at least 1");
  require(R >= 0, ErrorCode::invalid_argument, "R must be nonnegative");
  require(K >= 1, ErrorCode::invalid_argument, "K must be at least 1");
  margin().validate();
}

}  // namespace mcdl
