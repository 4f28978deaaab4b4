#pragma once

#include <string>
#include <vector>

#include "mcal/binary_hb.hpp"
#include "mcal/core.hpp"

namespace mcal {

// Per-class calibrators routed by the (unchanged) top-class map.
struct TopLabelModel {
  int L = 0;
  std::vector<BinaryModel> per_class;        // h_l, fitted where c(X)=l
  std::vector<int> fallback_classes;         // classes never predicted on fit data
};

// One calibrator per class, fitted 1-v-all on all rows; no normalization.
struct ClassWiseModel {
  int L = 0;
  std::vector<BinaryModel> per_class;
};

// Single pooled calibrator on (top prob, hit indicator).
struct ConfidenceModel {
  int L = 0;
  BinaryModel pooled;
};

// Class-wise fit with predict-time row normalization.
struct NormalizedModel {
  int L = 0;
  std::vector<BinaryModel> per_class;
};

enum class TopKVariant { label, confidence };

struct TopKModel {
  int L = 0;
  int K = 0;
  TopKVariant variant = TopKVariant::label;
  // label variant: grid[k*L + l] = h_{k,l}; confidence variant: per_rank[k]
  std::vector<BinaryModel> grid;
  std::vector<BinaryModel> per_rank;
  std::vector<std::pair<int, int>> fallback_cells;  // empty (rank, class) cells
};

enum class Notion {
  confidence,
  top_label,
  class_wise,
  normalized,
  top_k_label,
  top_k_confidence,
};

struct M2BNotionSpec {
  Notion notion = Notion::top_label;
  int K = 1;  // for the top-K notions
};

TopLabelModel fit_top_label(const Dataset& data, const BinaryCalibratorSpec& spec);
TopLabelDecomposition predict_top_label(const TopLabelModel& model, const Matrix& scores);

ClassWiseModel fit_class_wise(const Dataset& data, const BinaryCalibratorSpec& spec);
Matrix predict_class_wise(const ClassWiseModel& model, const Matrix& scores);

ConfidenceModel fit_confidence(const Dataset& data, const BinaryCalibratorSpec& spec);
TopLabelDecomposition predict_confidence(const ConfidenceModel& model, const Matrix& scores);

NormalizedModel fit_normalized(const Dataset& data, const BinaryCalibratorSpec& spec);
Matrix predict_normalized(const NormalizedModel& model, const Matrix& scores);

TopKModel fit_top_k(const Dataset& data, int K, TopKVariant variant,
                    const BinaryCalibratorSpec& spec);
// Rank classes come from the base scores; rank probs are calibrated.
TopKDecomposition predict_top_k(const TopKModel& model, const Matrix& scores);

// Generic M2B dispatch (the concrete fits above are its instantiations).
struct M2BModel {
  Notion notion;
  TopLabelModel top_label;
  ClassWiseModel class_wise;
  ConfidenceModel confidence;
  NormalizedModel normalized;
  TopKModel top_k;
};

M2BModel fit_m2b(const M2BNotionSpec& notion, const Dataset& data,
                 const BinaryCalibratorSpec& spec);

}  // namespace mcal
