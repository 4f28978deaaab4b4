#pragma once

#include <vector>

#include "mcal/core.hpp"

namespace mcal {

struct BoundRequest {
  int k = 50;            // points per bin
  long n = 0;            // calibration set size
  double alpha = 0.1;    // failure level
  double delta = 1e-10;  // tie-break magnitude
  // per-class hyperparameters for the class-wise guarantees
  std::vector<int> k_per_class;
  std::vector<double> alpha_per_class;
};

struct Theorem1Bounds {
  double eps_marginal = 0.0;       // sqrt(log(2/alpha)/(2(k-1))) + delta
  double eps_conditional = 0.0;    // sqrt(log(2n/(k alpha))/(2(k-1))) + delta
  double expected_tl_ece = 0.0;    // sqrt(1/(2k)) + delta
};

struct Theorem2Bounds {
  std::vector<double> eps_marginal;     // per class
  std::vector<double> eps_conditional;  // per class
  double eps_max_marginal = 0.0;
  double eps_max_conditional = 0.0;
  double alpha_sum = 0.0;  // union bound failure level
  double expected_cw_ece = 0.0;
};

Theorem1Bounds theorem1_bounds(const BoundRequest& req);
Theorem2Bounds theorem2_bounds(const BoundRequest& req);

}  // namespace mcal
