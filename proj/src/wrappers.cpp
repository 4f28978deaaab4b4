#include "mcal/wrappers.hpp"

#include <algorithm>

#include "mcal/rng.hpp"

namespace mcal {

namespace {

BinaryCalibratorSpec derived_spec(const BinaryCalibratorSpec& spec, int class_index,
                                  int rank) {
  BinaryCalibratorSpec s = spec;
  s.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(class_index),
                    static_cast<std::uint64_t>(rank));
  return s;
}

void check_classes(int model_L, const Matrix& scores) {
  if (scores.cols() != model_L)
    throw Error(ErrorKind::ClassCountMismatch, "score matrix class count != model L");
}

}  // namespace

TopLabelModel fit_top_label(const Dataset& data, const BinaryCalibratorSpec& spec) {
  if (data.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty calibration data");
  validate_dataset(data);
  const int L = static_cast<int>(data.classes());
  TopLabelDecomposition top = top_label(data.scores);

  TopLabelModel model;
  model.L = L;
  model.per_class.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    std::vector<double> scores;
    std::vector<int> hits;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (top.top_class[i] != l) continue;
      scores.push_back(top.top_prob[i]);
      hits.push_back(data.labels[i] == l ? 1 : 0);
    }
    if (scores.empty()) {
      model.per_class[static_cast<std::size_t>(l)] = fit_identity();
      model.fallback_classes.push_back(l);
    } else {
      model.per_class[static_cast<std::size_t>(l)] =
          fit_binary(scores, hits, derived_spec(spec, l, 0));
    }
  }
  return model;
}

TopLabelDecomposition predict_top_label(const TopLabelModel& model, const Matrix& scores) {
  check_classes(model.L, scores);
  TopLabelDecomposition out = top_label(scores);
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    out.top_prob[i] =
        predict_binary(model.per_class[static_cast<std::size_t>(out.top_class[i])],
                       out.top_prob[i]);
  return out;
}

ClassWiseModel fit_class_wise(const Dataset& data, const BinaryCalibratorSpec& spec) {
  if (data.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty calibration data");
  validate_dataset(data);
  const int L = static_cast<int>(data.classes());
  ClassWiseModel model;
  model.L = L;
  model.per_class.resize(static_cast<std::size_t>(L));
  std::vector<double> scores(static_cast<std::size_t>(data.rows()));
  std::vector<int> targets(static_cast<std::size_t>(data.rows()));
  for (int l = 0; l < L; ++l) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      scores[static_cast<std::size_t>(i)] = data.scores(i, l);
      targets[static_cast<std::size_t>(i)] = data.labels[i] == l ? 1 : 0;
    }
    model.per_class[static_cast<std::size_t>(l)] =
        fit_binary(scores, targets, derived_spec(spec, l, 0));
  }
  return model;
}

Matrix predict_class_wise(const ClassWiseModel& model, const Matrix& scores) {
  check_classes(model.L, scores);
  Matrix out(scores.rows(), scores.cols());
  for (int l = 0; l < model.L; ++l)
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
      out(i, l) = predict_binary(model.per_class[static_cast<std::size_t>(l)], scores(i, l));
  return out;
}

ConfidenceModel fit_confidence(const Dataset& data, const BinaryCalibratorSpec& spec) {
  if (data.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty calibration data");
  validate_dataset(data);
  TopLabelDecomposition top = top_label(data.scores);
  std::vector<double> scores(static_cast<std::size_t>(data.rows()));
  std::vector<int> hits(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    scores[static_cast<std::size_t>(i)] = top.top_prob[i];
    hits[static_cast<std::size_t>(i)] = data.labels[i] == top.top_class[i] ? 1 : 0;
  }
  ConfidenceModel model;
  model.L = static_cast<int>(data.classes());
  model.pooled = fit_binary(scores, hits, derived_spec(spec, 0, 0));
  return model;
}

TopLabelDecomposition predict_confidence(const ConfidenceModel& model, const Matrix& scores) {
  check_classes(model.L, scores);
  TopLabelDecomposition out = top_label(scores);
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    out.top_prob[i] = predict_binary(model.pooled, out.top_prob[i]);
  return out;
}

NormalizedModel fit_normalized(const Dataset& data, const BinaryCalibratorSpec& spec) {
  ClassWiseModel cw = fit_class_wise(data, spec);
  NormalizedModel model;
  model.L = cw.L;
  model.per_class = std::move(cw.per_class);
  return model;
}

Matrix predict_normalized(const NormalizedModel& model, const Matrix& scores) {
  check_classes(model.L, scores);
  Matrix out(scores.rows(), scores.cols());
  for (int l = 0; l < model.L; ++l)
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
      out(i, l) = predict_binary(model.per_class[static_cast<std::size_t>(l)], scores(i, l));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double s = out.row(i).sum();
    if (s <= 0.0)
      out.row(i).setConstant(1.0 / model.L);  // zero-sum fallback
    else
      out.row(i) /= s;
  }
  return out;
}

TopKModel fit_top_k(const Dataset& data, int K, TopKVariant variant,
                    const BinaryCalibratorSpec& spec) {
  if (data.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty calibration data");
  validate_dataset(data);
  const int L = static_cast<int>(data.classes());
  if (K < 1 || K > L) throw Error(ErrorKind::KOutOfRange, "need 1 <= K <= L");

  TopKDecomposition ranks = top_k(data.scores, K);
  TopKModel model;
  model.L = L;
  model.K = K;
  model.variant = variant;

  if (variant == TopKVariant::label) {
    model.grid.resize(static_cast<std::size_t>(K * L));
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < L; ++l) {
        std::vector<double> scores;
        std::vector<int> targets;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
          if (ranks.rank_class(i, k) != l) continue;
          scores.push_back(ranks.rank_prob(i, k));
          targets.push_back(data.labels[i] == l ? 1 : 0);
        }
        auto& cell = model.grid[static_cast<std::size_t>(k * L + l)];
        if (scores.empty()) {
          cell = fit_identity();
          model.fallback_cells.emplace_back(k, l);
        } else {
          cell = fit_binary(scores, targets, derived_spec(spec, l, k));
        }
      }
    }
  } else {
    model.per_rank.resize(static_cast<std::size_t>(K));
    std::vector<double> scores(static_cast<std::size_t>(data.rows()));
    std::vector<int> hits(static_cast<std::size_t>(data.rows()));
    for (int k = 0; k < K; ++k) {
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        scores[static_cast<std::size_t>(i)] = ranks.rank_prob(i, k);
        hits[static_cast<std::size_t>(i)] = data.labels[i] == ranks.rank_class(i, k) ? 1 : 0;
      }
      model.per_rank[static_cast<std::size_t>(k)] =
          fit_binary(scores, hits, derived_spec(spec, 0, k));
    }
  }
  return model;
}

TopKDecomposition predict_top_k(const TopKModel& model, const Matrix& scores) {
  check_classes(model.L, scores);
  TopKDecomposition out = top_k(scores, model.K);
  for (int k = 0; k < model.K; ++k) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const BinaryModel& m =
          model.variant == TopKVariant::label
              ? model.grid[static_cast<std::size_t>(k * model.L + out.rank_class(i, k))]
              : model.per_rank[static_cast<std::size_t>(k)];
      out.rank_prob(i, k) = predict_binary(m, out.rank_prob(i, k));
    }
  }
  return out;
}

M2BModel fit_m2b(const M2BNotionSpec& notion, const Dataset& data,
                 const BinaryCalibratorSpec& spec) {
  M2BModel m;
  m.notion = notion.notion;
  switch (notion.notion) {
    case Notion::top_label: m.top_label = fit_top_label(data, spec); break;
    case Notion::class_wise: m.class_wise = fit_class_wise(data, spec); break;
    case Notion::confidence: m.confidence = fit_confidence(data, spec); break;
    case Notion::normalized: m.normalized = fit_normalized(data, spec); break;
    case Notion::top_k_label:
      m.top_k = fit_top_k(data, notion.K, TopKVariant::label, spec);
      break;
    case Notion::top_k_confidence:
      m.top_k = fit_top_k(data, notion.K, TopKVariant::confidence, spec);
      break;
  }
  return m;
}

}  // namespace mcal
