#pragma once

#include <Eigen/Dense>

#include "mcal/errors.hpp"

namespace mcal {

// n x L matrix of class probabilities; rows sum to 1.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// 0-based class index per row (1-based in all human-facing output).
using Labels = Eigen::VectorXi;

constexpr double kRowSumTol = 1e-6;

struct Dataset {
  Matrix scores;  // n x L
  Labels labels;  // n

  Eigen::Index rows() const { return scores.rows(); }
  Eigen::Index classes() const { return scores.cols(); }
};

void validate_dataset(const Dataset& data);

// (c(X), h(X)) per row.
struct TopLabelDecomposition {
  Labels top_class;
  Vector top_prob;
};

// k-th highest class and its probability, k = 0..K-1, per row.
struct TopKDecomposition {
  int K = 0;
  Eigen::MatrixXi rank_class;  // n x K
  Matrix rank_prob;            // n x K
};

// Checks entries and row sums; clips negative dust; optionally divides each
// row by its sum.
Matrix validate_and_normalize(const Matrix& raw, bool renormalize);

// Row-wise exp-normalization with max subtraction.
Matrix softmax_rows(const Matrix& logits);

// Argmax per row, ties broken toward the lowest class index.
TopLabelDecomposition top_label(const Matrix& probs);

TopKDecomposition top_k(const Matrix& probs, int K);

}  // namespace mcal
