#include "mcal/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mcal/rng.hpp"

namespace mcal {

double Rng::gaussian() {
  // Box-Muller; one draw per call keeps the stream mapping obvious.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonRectangular: return "NonRectangular";
    case ErrorKind::RowSumZero: return "RowSumZero";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::KOutOfRange: return "KOutOfRange";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::BinsExceedPoints: return "BinsExceedPoints";
    case ErrorKind::ClassCountMismatch: return "ClassCountMismatch";
    case ErrorKind::InvalidHyperparameters: return "InvalidHyperparameters";
    case ErrorKind::NotOnSimplex: return "NotOnSimplex";
    case ErrorKind::NoBinFound: return "NoBinFound";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::NonUnitDirection: return "NonUnitDirection";
    case ErrorKind::UnsupportedPredictor: return "UnsupportedPredictor";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::RaggedRow: return "RaggedRow";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

void validate_dataset(const Dataset& data) {
  if (data.scores.rows() != data.labels.size())
    throw Error(ErrorKind::NonRectangular, "scores rows != labels length");
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] < 0 || data.labels[i] >= data.scores.cols())
      throw Error(ErrorKind::LabelOutOfRange, "label outside [0, L)");
  }
}

Matrix validate_and_normalize(const Matrix& raw, bool renormalize) {
  if (raw.cols() < 2)
    throw Error(ErrorKind::NonRectangular, "need at least 2 classes");
  if (!raw.allFinite())
    throw Error(ErrorKind::NonFinite, "non-finite probability entry");

  Matrix out = raw;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      double v = out(i, j);
      if (v < 0.0) {
        if (!renormalize && v < -1e-6)
          throw Error(ErrorKind::OutOfRange, "negative probability entry");
        out(i, j) = 0.0;  // clip negative dust
      } else if (v > 1.0 + 1e-6 && !renormalize) {
        throw Error(ErrorKind::OutOfRange, "probability entry > 1");
      }
    }
    double s = out.row(i).sum();
    if (renormalize) {
      if (s <= 1e-12)
        throw Error(ErrorKind::RowSumZero, "row sums to ~0, cannot renormalize");
      out.row(i) /= s;
    } else if (std::abs(s - 1.0) > kRowSumTol) {
      throw Error(ErrorKind::OutOfRange, "row does not sum to 1 within tolerance");
    }
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  if (!logits.allFinite())
    throw Error(ErrorKind::NonFinite, "non-finite logit");
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

TopLabelDecomposition top_label(const Matrix& probs) {
  TopLabelDecomposition d;
  d.top_class.resize(probs.rows());
  d.top_prob.resize(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    // maxCoeff already breaks ties toward the lowest index for row scans,
    // but make the rule explicit.
    for (Eigen::Index j = 1; j < probs.cols(); ++j)
      if (probs(i, j) > probs(i, best)) best = j;
    d.top_class[i] = static_cast<int>(best);
    d.top_prob[i] = probs(i, best);
  }
  return d;
}

TopKDecomposition top_k(const Matrix& probs, int K) {
  if (K < 1 || K > probs.cols())
    throw Error(ErrorKind::KOutOfRange, "K must satisfy 1 <= K <= L");
  TopKDecomposition d;
  d.K = K;
  d.rank_class.resize(probs.rows(), K);
  d.rank_prob.resize(probs.rows(), K);
  std::vector<int> order(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return probs(i, a) > probs(i, b);  // stable keeps ties in index order
    });
    for (int k = 0; k < K; ++k) {
      d.rank_class(i, k) = order[static_cast<std::size_t>(k)];
      d.rank_prob(i, k) = probs(i, order[static_cast<std::size_t>(k)]);
    }
  }
  return d;
}

}  // namespace mcal
