#include "mcal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mcal {

namespace {

// Cell key for a probability under the scheme. Unbinned mode keys on the
// exact floating value.
double cell_key(double p, const BinningScheme& scheme) {
  if (scheme.kind == BinningScheme::Kind::unbinned) return p;
  int b = static_cast<int>(p * scheme.B);
  if (b >= scheme.B) b = scheme.B - 1;  // last cell closed at 1
  return static_cast<double>(b);
}

struct GroupAccum {
  double weight = 0.0;
  double conf_sum = 0.0;
  double hit_sum = 0.0;
};

void check_nonempty(Eigen::Index n) {
  if (n == 0) throw Error(ErrorKind::EmptyInput, "no evaluation points");
}

// Accumulate per-group (weight, mean conf, mean acc) and reduce. In unbinned
// mode the group key IS the shared confidence value; using it directly keeps
// fit-set deviations exactly zero instead of accumulating rounding error.
template <typename KeyFn, typename Reduce>
double grouped_metric(Eigen::Index n, KeyFn&& key_of, const Vector& conf,
                      const std::vector<double>& hit, const BinningScheme& scheme,
                      Reduce&& reduce) {
  std::map<std::pair<long, double>, GroupAccum> groups;
  for (Eigen::Index i = 0; i < n; ++i) {
    GroupAccum& g = groups[key_of(i)];
    g.weight += 1.0;
    g.conf_sum += conf[i];
    g.hit_sum += hit[static_cast<std::size_t>(i)];
  }
  const bool conf_from_key = scheme.kind == BinningScheme::Kind::unbinned;
  double total = static_cast<double>(n);
  double out = 0.0;
  for (const auto& [key, g] : groups) {
    double c = conf_from_key ? key.second : g.conf_sum / g.weight;
    double dev = std::abs(g.hit_sum / g.weight - c);
    out = reduce(out, g.weight / total, dev);
  }
  return out;
}

double sum_reduce(double acc, double w, double dev) { return acc + w * dev; }
double max_reduce(double acc, double /*w*/, double dev) { return std::max(acc, dev); }

std::vector<double> hits(const TopLabelDecomposition& preds, const Labels& labels) {
  std::vector<double> h(static_cast<std::size_t>(labels.size()));
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    h[static_cast<std::size_t>(i)] = labels[i] == preds.top_class[i] ? 1.0 : 0.0;
  return h;
}

}  // namespace

double conf_ece(const TopLabelDecomposition& preds, const Labels& labels,
                const BinningScheme& scheme) {
  check_nonempty(labels.size());
  auto hit = hits(preds, labels);
  return grouped_metric(
      labels.size(),
      [&](Eigen::Index i) { return std::make_pair(0L, cell_key(preds.top_prob[i], scheme)); },
      preds.top_prob, hit, scheme, sum_reduce);
}

double tl_ece(const TopLabelDecomposition& preds, const Labels& labels,
              const BinningScheme& scheme) {
  check_nonempty(labels.size());
  auto hit = hits(preds, labels);
  return grouped_metric(
      labels.size(),
      [&](Eigen::Index i) {
        return std::make_pair(static_cast<long>(preds.top_class[i]),
                              cell_key(preds.top_prob[i], scheme));
      },
      preds.top_prob, hit, scheme, sum_reduce);
}

double tl_mce(const TopLabelDecomposition& preds, const Labels& labels,
              const BinningScheme& scheme) {
  check_nonempty(labels.size());
  auto hit = hits(preds, labels);
  return grouped_metric(
      labels.size(),
      [&](Eigen::Index i) {
        return std::make_pair(static_cast<long>(preds.top_class[i]),
                              cell_key(preds.top_prob[i], scheme));
      },
      preds.top_prob, hit, scheme, max_reduce);
}

double conf_mce(const TopLabelDecomposition& preds, const Labels& labels,
                const BinningScheme& scheme) {
  check_nonempty(labels.size());
  auto hit = hits(preds, labels);
  return grouped_metric(
      labels.size(),
      [&](Eigen::Index i) { return std::make_pair(0L, cell_key(preds.top_prob[i], scheme)); },
      preds.top_prob, hit, scheme, max_reduce);
}

double cw_ece(const Matrix& preds, const Labels& labels, const BinningScheme& scheme) {
  check_nonempty(labels.size());
  if (preds.rows() != labels.size())
    throw Error(ErrorKind::NonRectangular, "preds rows != labels length");
  const int L = static_cast<int>(preds.cols());
  double total = 0.0;
  std::vector<double> target(static_cast<std::size_t>(labels.size()));
  for (int l = 0; l < L; ++l) {
    Vector col = preds.col(l);
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      target[static_cast<std::size_t>(i)] = labels[i] == l ? 1.0 : 0.0;
    total += grouped_metric(
        labels.size(),
        [&](Eigen::Index i) { return std::make_pair(0L, cell_key(col[i], scheme)); }, col,
        target, scheme, sum_reduce);
  }
  return total / L;
}

ReliabilityDiagramData reliability_diagram(const TopLabelDecomposition& preds,
                                           const Labels& labels, int B) {
  check_nonempty(labels.size());
  if (B < 1) throw Error(ErrorKind::InvalidHyperparameters, "B must be >= 1");
  const Eigen::Index n = labels.size();
  BinningScheme scheme = BinningScheme::equal_width(B);

  std::map<int, GroupAccum> bins;
  std::map<std::pair<int, int>, GroupAccum> cells;  // (bin, class)
  for (Eigen::Index i = 0; i < n; ++i) {
    int b = static_cast<int>(cell_key(preds.top_prob[i], scheme));
    double hit = labels[i] == preds.top_class[i] ? 1.0 : 0.0;
    GroupAccum& g = bins[b];
    g.weight += 1.0;
    g.conf_sum += preds.top_prob[i];
    g.hit_sum += hit;
    GroupAccum& c = cells[{b, preds.top_class[i]}];
    c.weight += 1.0;
    c.conf_sum += preds.top_prob[i];
    c.hit_sum += hit;
  }

  ReliabilityDiagramData out;
  out.B = B;
  for (const auto& [b, g] : bins) {
    ReliabilityBin rb;
    rb.bin = b;
    rb.weight = g.weight / static_cast<double>(n);
    rb.conf = g.conf_sum / g.weight;
    rb.acc = g.hit_sum / g.weight;
    for (const auto& [key, c] : cells) {
      if (key.first != b) continue;
      ReliabilityBin::PerClass pc;
      pc.class_index = key.second;
      pc.deviation = std::abs(c.hit_sum / c.weight - c.conf_sum / c.weight);
      pc.count = static_cast<long>(c.weight);
      rb.per_class.push_back(pc);
      rb.delta += (c.weight / g.weight) * pc.deviation;
    }
    rb.ordinate = rb.acc > rb.conf ? rb.conf + rb.delta : rb.conf - rb.delta;
    out.bins.push_back(std::move(rb));
  }
  return out;
}

namespace {

ValidityCurve curve_from_groups(const std::vector<double>& mass,
                                const std::vector<double>& deviation, double grid_step) {
  if (grid_step <= 0.0 || grid_step > 1.0)
    throw Error(ErrorKind::InvalidHyperparameters, "grid step must be in (0, 1]");
  double total = 0.0;
  for (double m : mass) total += m;
  ValidityCurve curve;
  int steps = static_cast<int>(std::llround(1.0 / grid_step));
  for (int s = 0; s <= steps; ++s) {
    double eps = std::min(1.0, s * grid_step);
    double covered = 0.0;
    for (std::size_t g = 0; g < mass.size(); ++g)
      if (deviation[g] <= eps) covered += mass[g];
    curve.epsilon.push_back(eps);
    curve.value.push_back(covered / total);
  }
  return curve;
}

}  // namespace

ValidityCurve validity_curve(const TopLabelDecomposition& preds, const Labels& labels,
                             ValidityGrouping grouping, const BinningScheme& scheme,
                             double grid_step) {
  check_nonempty(labels.size());
  std::map<std::pair<long, double>, GroupAccum> groups;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    long cls = grouping == ValidityGrouping::by_class_and_cell
                   ? static_cast<long>(preds.top_class[i])
                   : 0L;
    GroupAccum& g = groups[{cls, cell_key(preds.top_prob[i], scheme)}];
    g.weight += 1.0;
    g.conf_sum += preds.top_prob[i];
    g.hit_sum += labels[i] == preds.top_class[i] ? 1.0 : 0.0;
  }
  std::vector<double> mass, dev;
  for (const auto& [key, g] : groups) {
    mass.push_back(g.weight);
    dev.push_back(std::abs(g.hit_sum / g.weight - g.conf_sum / g.weight));
  }
  return curve_from_groups(mass, dev, grid_step);
}

ValidityCurve validity_curve_canonical(const Matrix& preds, const Labels& labels,
                                       double grid_step) {
  check_nonempty(labels.size());
  const int L = static_cast<int>(preds.cols());
  std::map<std::vector<double>, std::pair<double, Vector>> groups;  // -> (count, label sums)
  for (Eigen::Index i = 0; i < preds.rows(); ++i) {
    std::vector<double> key(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) key[static_cast<std::size_t>(l)] = preds(i, l);
    auto& [count, sums] = groups[key];
    if (count == 0.0) sums = Vector::Zero(L);
    count += 1.0;
    sums[labels[i]] += 1.0;
  }
  std::vector<double> mass, dev;
  for (const auto& [key, g] : groups) {
    mass.push_back(g.first);
    double d = 0.0;
    for (int l = 0; l < L; ++l)
      d += std::abs(g.second[l] / g.first - key[static_cast<std::size_t>(l)]);
    dev.push_back(d);
  }
  return curve_from_groups(mass, dev, grid_step);
}

// ---- exact oracles ----

ExactGroupDeviations exact_top_label_deviations(const Vector& mass, const Matrix& cond,
                                                const Labels& top_class,
                                                const Vector& top_prob) {
  check_nonempty(mass.size());
  // group by (predicted class, exact h value): accumulate mass and true
  // P(Y = c(X)) mass
  std::map<std::pair<int, double>, std::pair<double, double>> groups;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    auto& [w, truth] = groups[{top_class[i], top_prob[i]}];
    w += mass[i];
    truth += mass[i] * cond(i, top_class[i]);
  }
  ExactGroupDeviations out;
  for (const auto& [key, g] : groups) {
    if (g.first <= 0.0) continue;
    out.mass.push_back(g.first);
    out.deviation.push_back(std::abs(g.second / g.first - key.second));
  }
  return out;
}

ExactGroupDeviations exact_class_wise_deviations(const Vector& mass, const Matrix& cond,
                                                 int class_index, const Vector& preds_l) {
  check_nonempty(mass.size());
  std::map<double, std::pair<double, double>> groups;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    auto& [w, truth] = groups[preds_l[i]];
    w += mass[i];
    truth += mass[i] * cond(i, class_index);
  }
  ExactGroupDeviations out;
  for (const auto& [r, g] : groups) {
    if (g.first <= 0.0) continue;
    out.mass.push_back(g.first);
    out.deviation.push_back(std::abs(g.second / g.first - r));
  }
  return out;
}

ExactMetrics exact_metrics(const Vector& mass, const Matrix& cond,
                           const Labels& top_class, const Vector& top_prob,
                           const Matrix& matrix_preds) {
  check_nonempty(mass.size());
  ExactMetrics m;

  // conf: group by exact h only
  {
    std::map<double, std::pair<double, double>> groups;
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
      auto& [w, truth] = groups[top_prob[i]];
      w += mass[i];
      truth += mass[i] * cond(i, top_class[i]);
    }
    for (const auto& [r, g] : groups) {
      if (g.first <= 0.0) continue;
      double dev = std::abs(g.second / g.first - r);
      m.conf_ece += g.first * dev;
      m.conf_mce = std::max(m.conf_mce, dev);
    }
  }

  // top-label: group by (class, h)
  {
    ExactGroupDeviations d = exact_top_label_deviations(mass, cond, top_class, top_prob);
    for (std::size_t g = 0; g < d.mass.size(); ++g) {
      m.tl_ece += d.mass[g] * d.deviation[g];
      m.tl_mce = std::max(m.tl_mce, d.deviation[g]);
    }
  }

  // class-wise: per class, group by exact h_l
  {
    const int L = static_cast<int>(matrix_preds.cols());
    for (int l = 0; l < L; ++l) {
      ExactGroupDeviations d =
          exact_class_wise_deviations(mass, cond, l, matrix_preds.col(l));
      for (std::size_t g = 0; g < d.mass.size(); ++g) m.cw_ece += d.mass[g] * d.deviation[g];
    }
    m.cw_ece /= L;
  }
  return m;
}

}  // namespace mcal
