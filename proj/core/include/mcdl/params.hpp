#pragma once

#include "mcdl/common.hpp"

#include <cstdint>
#include <string>

namespace mcdl {

/// Squared-hinge geometry: positives are pushed above tau + C, negatives
/// below tau - C, and every score lives in [0, v].
struct MarginParams {
  double C = 0.5;
  double tau = 0.5;
  double v = 5.0;

  void validate() const;
};

enum class Method { mcdl, udl, cdl };

const char* to_string(Method method) noexcept;
Method parse_method(const std::string& name);

struct Hyperparams {
  double lambda = 1.0;
  double eta = 1.0;  // lambda = eta^2 / T when set through with_grid_point
  double beta0 = 1.0;
  double beta1 = 0.1;
  double C = 0.5;
  double tau = 0.5;
  double v = 5.0;
  double rho = 1e-3;
  int S = 4;
  int R = 15;
  Index K = 0;
  std::uint64_t seed = kDefaultSeed;

  MarginParams margin() const { return {C, tau, v}; }

  /// Applies the validation-grid parametrization: lambda = eta^2 / T and
  /// tau = 0.25 + C / 2.
  Hyperparams with_grid_point(double eta_value, double beta1_value, double C_value,
                              Index tag_count) const;

  void validate() const;
};

}  // namespace mcdl
