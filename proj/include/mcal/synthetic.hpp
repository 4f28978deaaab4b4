#pragma once

#include <cstdint>

#include "mcal/binary_hb.hpp"
#include "mcal/core.hpp"
#include "mcal/metrics.hpp"
#include "mcal/wrappers.hpp"

namespace mcal {

// Finite-support joint distribution over (feature atom, label) together with
// the base model's score for each atom; enables exact metric oracles.
struct DiscreteDistribution {
  Vector p_x;        // atom probabilities, sum to 1
  Matrix cond;       // atoms x L, P(Y = . | X = atom)
  Matrix score_map;  // atoms x L, g(atom)

  Eigen::Index atoms() const { return p_x.size(); }
  Eigen::Index classes() const { return cond.cols(); }
};

// Two atoms with equal mass, shared confidence 0.6, per-atom hit rates 0.2
// and 1.0: perfectly confidence calibrated yet badly top-label calibrated.
DiscreteDistribution example1_distribution();

// Seeded random distribution. sharpness in [0,1] interpolates the score rows
// between uniform (0) and the true conditionals (1).
DiscreteDistribution random_distribution(int L, int atoms, std::uint64_t seed,
                                         double sharpness);

// Random distribution whose score rows spread top classes and confidences so
// every class receives calibration points; used by coverage experiments.
DiscreteDistribution spread_distribution(int L, int atoms, std::uint64_t seed);

Dataset sample(const DiscreteDistribution& dist, long n, std::uint64_t seed);

// Exact metrics of the base model (c, h) = top_label(score_map).
ExactMetrics exact_metrics_base(const DiscreteDistribution& dist);

// Exact metrics of a fitted top-label model applied to the atoms.
ExactMetrics exact_metrics_model(const DiscreteDistribution& dist,
                                 const TopLabelModel& model);
ExactMetrics exact_metrics_model(const DiscreteDistribution& dist,
                                 const ClassWiseModel& model);

enum class CoverageNotion { top_label, class_wise };

struct CoverageReport {
  long replications = 0;
  double eps_marginal = 0.0;     // threshold used for the marginal event
  double eps_conditional = 0.0;  // threshold used for the conditional event
  double alpha = 0.0;            // target failure level (union over classes for CW)
  // per-replication results
  std::vector<double> max_deviation;       // worst exact cell deviation
  std::vector<double> marginal_coverage;   // P_X(deviation <= eps_marginal)
  std::vector<double> exact_ece;           // exact TL-ECE or CW-ECE
  // summaries
  double conditional_violation_freq = 0.0;  // fraction with max dev > eps_conditional
  double mean_marginal_coverage = 0.0;
  double mean_exact_ece = 0.0;
};

CoverageReport coverage_experiment(const DiscreteDistribution& dist, CoverageNotion notion,
                                   long n, int k, double delta, double alpha, long R,
                                   std::uint64_t seed);

}  // namespace mcal
