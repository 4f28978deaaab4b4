#pragma once

#include <cstdint>
#include <vector>

#include "mcal/core.hpp"

namespace mcal {

enum class CalibratorKind { histogram_binning, identity };

struct BinsPolicy {
  enum class Mode { points_per_bin, fixed_bins };
  Mode mode = Mode::points_per_bin;
  int value = 50;  // k for points_per_bin, B for fixed_bins

  static BinsPolicy points_per_bin(int k) { return {Mode::points_per_bin, k}; }
  static BinsPolicy fixed_bins(int B) { return {Mode::fixed_bins, B}; }
};

struct BinaryCalibratorSpec {
  CalibratorKind kind = CalibratorKind::histogram_binning;
  BinsPolicy bins = BinsPolicy::points_per_bin(50);
  double delta = 1e-10;
  std::uint64_t seed = 0;
};

// Fitted binary calibrator. For histogram binning: uniform-mass bins on the
// perturbed score axis, one calibrated value per bin. Identity models carry
// no bins and map scores through unchanged.
struct BinaryModel {
  CalibratorKind kind = CalibratorKind::histogram_binning;
  std::vector<double> upper_edges;  // B-1 ascending thresholds
  std::vector<double> bin_values;   // B
  std::vector<int> bin_counts;      // B
  double delta = 1e-10;
  std::uint64_t seed = 0;

  int bins() const { return static_cast<int>(bin_values.size()); }
};

// Scores are perturbed by i.i.d. Uniform(0, delta) noise from the seeded RNG,
// bin edges are placed at the perturbed order statistics of ranks
// round(j*m/B), and each bin value is the empirical positive rate in the bin.
BinaryModel fit_binary_hb(const std::vector<double>& scores,
                          const std::vector<int>& binary_labels,
                          const BinaryCalibratorSpec& spec);

BinaryModel fit_identity();

// Dispatches on spec.kind.
BinaryModel fit_binary(const std::vector<double>& scores,
                       const std::vector<int>& binary_labels,
                       const BinaryCalibratorSpec& spec);

// Prediction-time scores are not perturbed; a score equal to an edge falls in
// the lower bin.
double predict_binary(const BinaryModel& model, double score);

}  // namespace mcal
