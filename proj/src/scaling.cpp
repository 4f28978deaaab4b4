#include "mcal/scaling.hpp"

#include <cmath>

namespace mcal {

double temperature_nll(const Matrix& logits, const Labels& labels, double T) {
  double nll = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::RowVectorXd z = logits.row(i) / T;
    double m = z.maxCoeff();
    double lse = std::log((z.array() - m).exp().sum()) + m;
    nll += lse - z[labels[i]];
  }
  return nll / static_cast<double>(logits.rows());
}

TemperatureModel fit_temperature(const Matrix& logits, const Labels& labels) {
  if (logits.rows() == 0) throw Error(ErrorKind::EmptyInput, "no rows");
  if (!logits.allFinite()) throw Error(ErrorKind::NonFinite, "non-finite logit");
  if (logits.rows() != labels.size())
    throw Error(ErrorKind::NonRectangular, "logits rows != labels length");

  TemperatureModel model;
  model.L = static_cast<int>(logits.cols());
  const double tol = 1e-4;
  double lo = std::log(model.t_min), hi = std::log(model.t_max);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;

  auto f = [&](double logT) { return temperature_nll(logits, labels, std::exp(logT)); };

  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = f(x2);
    }
  }
  double best = std::exp(0.5 * (lo + hi));
  double best_nll = temperature_nll(logits, labels, best);
  double nll_at_one = temperature_nll(logits, labels, 1.0);
  // Flat objective (e.g. all-zero logits) resolves to T = 1; also never
  // report a T worse than the identity temperature.
  if (std::abs(best_nll - nll_at_one) <= tol || nll_at_one < best_nll) {
    best = 1.0;
    best_nll = nll_at_one;
  }
  model.T = best;
  model.fit_nll = best_nll;
  return model;
}

Matrix apply_temperature(const TemperatureModel& model, const Matrix& logits) {
  if (model.L != 0 && logits.cols() != model.L)
    throw Error(ErrorKind::ClassCountMismatch, "logit class count != model L");
  return softmax_rows(logits / model.T);
}

}  // namespace mcal
