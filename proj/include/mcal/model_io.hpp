#pragma once

#include <string>

#include "mcal/canonical.hpp"
#include "mcal/core.hpp"
#include "mcal/scaling.hpp"
#include "mcal/wrappers.hpp"

namespace mcal {

enum class CsvMode { probs, logits };

// CSV with header `p_1,...,p_L,label` (probs mode) or `logit_1,...,logit_L,label`
// (logits mode); labels are 1-based in the file. Logits are mapped through a
// row softmax; probability rows go through validate_and_normalize.
Dataset read_dataset(const std::string& path, CsvMode mode, bool renormalize);

// Same parsing, but scores are returned untransformed (raw logits or raw
// probability rows); used where the fit itself consumes logits.
Dataset read_dataset_raw(const std::string& path, CsvMode mode);

// Tagged union over every fittable model; `notion` selects the active member.
struct AnyModel {
  std::string notion;  // top-label | class-wise | confidence | normalized |
                       // top-k-label | top-k-confidence | temperature | canonical
  int L = 0;
  BinaryCalibratorSpec spec;  // meaningful for the binary-reduction notions
  M2BModel m2b;
  TemperatureModel temperature;
  CanonicalModel canonical;
};

// Calibrated output on a score matrix: full rows where the notion produces
// them, otherwise the base rows with the calibrated entries substituted.
Matrix apply_model(const AnyModel& model, const Matrix& scores);

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

// JSON text used by save_model (exposed for byte-identical CLI output).
std::string model_to_json(const AnyModel& model);
AnyModel model_from_json(const std::string& text);

}  // namespace mcal
