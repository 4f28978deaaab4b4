#include "mcal/bounds.hpp"

#include <cmath>

namespace mcal {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidHyperparameters, what);
}

double eps_marginal(int k, double alpha, double delta) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * (k - 1))) + delta;
}

double eps_conditional(int k, long n, double alpha, double delta) {
  return std::sqrt(std::log(2.0 * static_cast<double>(n) / (k * alpha)) / (2.0 * (k - 1))) +
         delta;
}

}  // namespace

Theorem1Bounds theorem1_bounds(const BoundRequest& req) {
  check(req.k >= 2, "points per bin k must be >= 2");
  check(req.alpha > 0.0 && req.alpha < 1.0, "alpha must be in (0, 1)");
  check(req.delta > 0.0, "delta must be > 0");
  check(req.n >= 1, "n must be >= 1");
  Theorem1Bounds b;
  b.eps_marginal = eps_marginal(req.k, req.alpha, req.delta);
  b.eps_conditional = eps_conditional(req.k, req.n, req.alpha, req.delta);
  b.expected_tl_ece = std::sqrt(1.0 / (2.0 * req.k)) + req.delta;
  return b;
}

Theorem2Bounds theorem2_bounds(const BoundRequest& req) {
  check(!req.k_per_class.empty(), "per-class k array required");
  check(req.k_per_class.size() == req.alpha_per_class.size(),
        "per-class k and alpha arrays must have equal length");
  check(req.delta > 0.0, "delta must be > 0");
  check(req.n >= 1, "n must be >= 1");
  Theorem2Bounds b;
  double worst_exp = 0.0;
  for (std::size_t l = 0; l < req.k_per_class.size(); ++l) {
    int kl = req.k_per_class[l];
    double al = req.alpha_per_class[l];
    check(kl >= 2, "every k_l must be >= 2");
    check(al > 0.0 && al < 1.0, "every alpha_l must be in (0, 1)");
    // class-wise fits use all n rows
    b.eps_marginal.push_back(eps_marginal(kl, al, req.delta));
    b.eps_conditional.push_back(eps_conditional(kl, req.n, al, req.delta));
    b.alpha_sum += al;
    worst_exp = std::max(worst_exp, std::sqrt(1.0 / (2.0 * kl)));
    b.eps_max_marginal = std::max(b.eps_max_marginal, b.eps_marginal.back());
    b.eps_max_conditional = std::max(b.eps_max_conditional, b.eps_conditional.back());
  }
  b.expected_cw_ece = worst_exp + req.delta;
  return b;
}

}  // namespace mcal
