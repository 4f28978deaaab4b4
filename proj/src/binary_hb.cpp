#include "mcal/binary_hb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcal/rng.hpp"

namespace mcal {

BinaryModel fit_identity() {
  BinaryModel m;
  m.kind = CalibratorKind::identity;
  return m;
}

BinaryModel fit_binary_hb(const std::vector<double>& scores,
                          const std::vector<int>& binary_labels,
                          const BinaryCalibratorSpec& spec) {
  const int m = static_cast<int>(scores.size());
  if (m == 0) throw Error(ErrorKind::EmptyInput, "no points to fit");
  if (scores.size() != binary_labels.size())
    throw Error(ErrorKind::NonRectangular, "scores/labels length mismatch");
  if (spec.delta <= 0.0)
    throw Error(ErrorKind::InvalidHyperparameters, "delta must be > 0");

  int B;
  if (spec.bins.mode == BinsPolicy::Mode::points_per_bin) {
    if (spec.bins.value < 2)
      throw Error(ErrorKind::InvalidHyperparameters, "points per bin k must be >= 2");
    B = std::max(1, m / spec.bins.value);  // single-bin fallback when m < k
  } else {
    B = spec.bins.value;
    if (B < 1) throw Error(ErrorKind::InvalidHyperparameters, "bin count must be >= 1");
    if (B > m) throw Error(ErrorKind::BinsExceedPoints, "more bins than points");
  }

  // One-time tie-breaking perturbation of the fit-set scores.
  Rng rng(spec.seed);
  std::vector<double> perturbed(scores.size());
  for (int i = 0; i < m; ++i) perturbed[i] = scores[i] + rng.uniform(0.0, spec.delta);

  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return perturbed[a] < perturbed[b]; });

  BinaryModel model;
  model.kind = CalibratorKind::histogram_binning;
  model.delta = spec.delta;
  model.seed = spec.seed;
  model.upper_edges.reserve(static_cast<std::size_t>(B - 1));
  model.bin_values.resize(static_cast<std::size_t>(B));
  model.bin_counts.resize(static_cast<std::size_t>(B));

  // Rank boundaries round(j*m/B) give between floor(m/B) and ceil(m/B)
  // points per bin.
  int prev = 0;
  for (int b = 0; b < B; ++b) {
    int hi = (b == B - 1)
                 ? m
                 : static_cast<int>(std::llround(static_cast<double>(b + 1) * m / B));
    double sum = 0.0;
    for (int r = prev; r < hi; ++r) sum += binary_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    model.bin_counts[static_cast<std::size_t>(b)] = hi - prev;
    model.bin_values[static_cast<std::size_t>(b)] = sum / (hi - prev);
    if (b < B - 1)
      model.upper_edges.push_back(perturbed[static_cast<std::size_t>(order[static_cast<std::size_t>(hi - 1)])]);
    prev = hi;
  }
  return model;
}

BinaryModel fit_binary(const std::vector<double>& scores,
                       const std::vector<int>& binary_labels,
                       const BinaryCalibratorSpec& spec) {
  if (spec.kind == CalibratorKind::identity) return fit_identity();
  return fit_binary_hb(scores, binary_labels, spec);
}

double predict_binary(const BinaryModel& model, double score) {
  if (model.kind == CalibratorKind::identity) return score;
  // Equal-to-edge routes to the lower bin.
  std::size_t b = 0;
  while (b < model.upper_edges.size() && score > model.upper_edges[b]) ++b;
  return model.bin_values[b];
}

}  // namespace mcal
