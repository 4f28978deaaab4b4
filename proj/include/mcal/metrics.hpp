#pragma once

#include <vector>

#include "mcal/core.hpp"

namespace mcal {

// Equal-width cells [0,1/B),...,[1-1/B,1], or grouping by exact value
// (for discrete-output calibrators).
struct BinningScheme {
  enum class Kind { equal_width, unbinned };
  Kind kind = Kind::equal_width;
  int B = 15;

  static BinningScheme equal_width(int B) { return {Kind::equal_width, B}; }
  static BinningScheme unbinned() { return {Kind::unbinned, 0}; }
};

struct ReliabilityBin {
  int bin = 0;
  double conf = 0.0;    // mean predicted probability
  double acc = 0.0;     // empirical accuracy
  double weight = 0.0;  // fraction of points
  double delta = 0.0;   // weighted average of per-class deviations
  double ordinate = 0.0;  // conf +/- delta, signed by acc vs conf
  struct PerClass {
    int class_index = 0;
    double deviation = 0.0;
    long count = 0;
  };
  std::vector<PerClass> per_class;
};

struct ReliabilityDiagramData {
  int B = 0;
  std::vector<ReliabilityBin> bins;  // non-empty bins only
};

struct ValidityCurve {
  std::vector<double> epsilon;
  std::vector<double> value;  // V(eps), non-decreasing, V(1)=1
};

enum class ValidityGrouping { by_class_and_cell, by_cell };

// Plugin estimators on empirical data.
double conf_ece(const TopLabelDecomposition& preds, const Labels& labels,
                const BinningScheme& scheme);
double tl_ece(const TopLabelDecomposition& preds, const Labels& labels,
              const BinningScheme& scheme);
double tl_mce(const TopLabelDecomposition& preds, const Labels& labels,
              const BinningScheme& scheme);
double conf_mce(const TopLabelDecomposition& preds, const Labels& labels,
                const BinningScheme& scheme);
// Mean over classes of the binary ECE of (h_l, 1{Y=l}).
double cw_ece(const Matrix& preds, const Labels& labels, const BinningScheme& scheme);

ReliabilityDiagramData reliability_diagram(const TopLabelDecomposition& preds,
                                           const Labels& labels, int B);

ValidityCurve validity_curve(const TopLabelDecomposition& preds, const Labels& labels,
                             ValidityGrouping grouping, const BinningScheme& scheme,
                             double grid_step);

// Canonical l1 validity curve: per distinct prediction vector, deviation is
// ||mean one-hot label - prediction||_1.
ValidityCurve validity_curve_canonical(const Matrix& preds, const Labels& labels,
                                       double grid_step);

// ---- Exact oracles on finite-support distributions ----
//
// Inputs are atom-level: `mass` (sums to 1), `cond` (atoms x L conditional
// label distribution), and the predictor's outputs per atom. Grouping is by
// exact predicted value, matching the population definitions.

struct ExactMetrics {
  double conf_ece = 0.0;
  double tl_ece = 0.0;
  double tl_mce = 0.0;
  double cw_ece = 0.0;
  double conf_mce = 0.0;
};

ExactMetrics exact_metrics(const Vector& mass, const Matrix& cond,
                           const Labels& top_class, const Vector& top_prob,
                           const Matrix& matrix_preds);

// Exact top-label deviations per (class, h-value) group: returns group mass
// and |P(Y=c | c, h) - h| pairs. Used by marginal/conditional coverage checks.
struct ExactGroupDeviations {
  std::vector<double> mass;
  std::vector<double> deviation;
};

ExactGroupDeviations exact_top_label_deviations(const Vector& mass, const Matrix& cond,
                                                const Labels& top_class,
                                                const Vector& top_prob);

// Exact class-wise deviations for one class: groups by exact h_l value.
ExactGroupDeviations exact_class_wise_deviations(const Vector& mass, const Matrix& cond,
                                                 int class_index, const Vector& preds_l);

}  // namespace mcal
