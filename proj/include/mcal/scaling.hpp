#pragma once

#include "mcal/core.hpp"

namespace mcal {

struct TemperatureModel {
  double T = 1.0;
  double t_min = 0.01;
  double t_max = 100.0;
  double fit_nll = 0.0;
  int L = 0;
};

// Mean negative log-likelihood of softmax(logits/T) under the labels.
double temperature_nll(const Matrix& logits, const Labels& labels, double T);

// Golden-section search on log T over [0.01, 100]; a flat objective returns
// T = 1.
TemperatureModel fit_temperature(const Matrix& logits, const Labels& labels);

Matrix apply_temperature(const TemperatureModel& model, const Matrix& logits);

}  // namespace mcal
