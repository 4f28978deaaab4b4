#include "mcal/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "mcal/bounds.hpp"
#include "mcal/rng.hpp"

namespace mcal {

DiscreteDistribution example1_distribution() {
  DiscreteDistribution d;
  d.p_x = Vector::Constant(2, 0.5);
  // L = 3; the off-top-label conditional mass goes to class 3.
  d.cond = Matrix::Zero(2, 3);
  d.cond.row(0) << 0.2, 0.0, 0.8;  // atom a: c(a)=1, P(Y=c|a)=0.2
  d.cond.row(1) << 0.0, 1.0, 0.0;  // atom b: c(b)=2, P(Y=c|b)=1.0
  d.score_map = Matrix::Zero(2, 3);
  d.score_map.row(0) << 0.6, 0.25, 0.15;
  d.score_map.row(1) << 0.25, 0.6, 0.15;
  return d;
}

namespace {

Vector random_simplex_row(Rng& rng, int L) {
  Vector v(L);
  double s = 0.0;
  for (int l = 0; l < L; ++l) {
    v[l] = -std::log(1.0 - rng.uniform());  // Exp(1); normalized = Dirichlet(1)
    s += v[l];
  }
  return v / s;
}

}  // namespace

DiscreteDistribution random_distribution(int L, int atoms, std::uint64_t seed,
                                         double sharpness) {
  if (L < 2 || atoms < 1)
    throw Error(ErrorKind::InvalidHyperparameters, "need L >= 2 and atoms >= 1");
  Rng rng(mix_seed(seed, 0xd15c, 0));
  DiscreteDistribution d;
  d.p_x = Vector(atoms);
  d.cond = Matrix(atoms, L);
  d.score_map = Matrix(atoms, L);
  double total = 0.0;
  for (int a = 0; a < atoms; ++a) {
    d.p_x[a] = rng.uniform(0.1, 1.0);
    total += d.p_x[a];
    d.cond.row(a) = random_simplex_row(rng, L);
    Vector uniform = Vector::Constant(L, 1.0 / L);
    d.score_map.row(a) = sharpness * d.cond.row(a) + (1.0 - sharpness) * uniform.transpose();
  }
  d.p_x /= total;
  return d;
}

DiscreteDistribution spread_distribution(int L, int atoms, std::uint64_t seed) {
  if (L < 2 || atoms < L)
    throw Error(ErrorKind::InvalidHyperparameters, "need atoms >= L >= 2");
  Rng rng(mix_seed(seed, 0x5b3e, 0));
  DiscreteDistribution d;
  d.p_x = Vector(atoms);
  d.cond = Matrix(atoms, L);
  d.score_map = Matrix(atoms, L);
  double total = 0.0;
  for (int a = 0; a < atoms; ++a) {
    int top = a % L;  // round-robin so every class gets predicted mass
    d.p_x[a] = rng.uniform(0.5, 1.0);
    total += d.p_x[a];
    double top_prob = rng.uniform(1.0 / L + 0.05, 0.95);
    for (int l = 0; l < L; ++l)
      d.score_map(a, l) = l == top ? top_prob : (1.0 - top_prob) / (L - 1);
    // True conditional: miscalibrated hit rate around the claimed confidence.
    double hit = std::clamp(top_prob + rng.uniform(-0.3, 0.3), 0.0, 1.0);
    for (int l = 0; l < L; ++l) d.cond(a, l) = l == top ? hit : (1.0 - hit) / (L - 1);
  }
  d.p_x /= total;
  return d;
}

Dataset sample(const DiscreteDistribution& dist, long n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5a11, 0));
  const int atoms = static_cast<int>(dist.atoms());
  const int L = static_cast<int>(dist.classes());
  // atom CDF
  std::vector<double> cdf(static_cast<std::size_t>(atoms));
  double acc = 0.0;
  for (int a = 0; a < atoms; ++a) {
    acc += dist.p_x[a];
    cdf[static_cast<std::size_t>(a)] = acc;
  }
  Dataset data;
  data.scores = Matrix(n, L);
  data.labels = Labels(n);
  for (long i = 0; i < n; ++i) {
    double u = rng.uniform() * acc;
    int a = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (a >= atoms) a = atoms - 1;
    data.scores.row(i) = dist.score_map.row(a);
    double v = rng.uniform();
    double c = 0.0;
    int y = L - 1;
    for (int l = 0; l < L; ++l) {
      c += dist.cond(a, l);
      if (v < c) {
        y = l;
        break;
      }
    }
    data.labels[i] = y;
  }
  return data;
}

ExactMetrics exact_metrics_base(const DiscreteDistribution& dist) {
  TopLabelDecomposition top = top_label(dist.score_map);
  return exact_metrics(dist.p_x, dist.cond, top.top_class, top.top_prob, dist.score_map);
}

ExactMetrics exact_metrics_model(const DiscreteDistribution& dist,
                                 const TopLabelModel& model) {
  TopLabelDecomposition top = predict_top_label(model, dist.score_map);
  // Matrix view for the class-wise component: keep base scores except the
  // top entry (only the top-label pieces are meaningful for TL metrics).
  Matrix preds = dist.score_map;
  for (Eigen::Index i = 0; i < preds.rows(); ++i)
    preds(i, top.top_class[i]) = top.top_prob[i];
  return exact_metrics(dist.p_x, dist.cond, top.top_class, top.top_prob, preds);
}

ExactMetrics exact_metrics_model(const DiscreteDistribution& dist,
                                 const ClassWiseModel& model) {
  Matrix preds = predict_class_wise(model, dist.score_map);
  TopLabelDecomposition top = top_label(dist.score_map);
  for (Eigen::Index i = 0; i < top.top_prob.size(); ++i)
    top.top_prob[i] = preds(i, top.top_class[i]);
  return exact_metrics(dist.p_x, dist.cond, top.top_class, top.top_prob, preds);
}

CoverageReport coverage_experiment(const DiscreteDistribution& dist, CoverageNotion notion,
                                   long n, int k, double delta, double alpha, long R,
                                   std::uint64_t seed) {
  if (R < 1) throw Error(ErrorKind::InvalidHyperparameters, "R must be >= 1");
  const int L = static_cast<int>(dist.classes());

  CoverageReport report;
  report.replications = R;
  report.alpha = alpha;

  if (notion == CoverageNotion::top_label) {
    BoundRequest req{k, n, alpha, delta, {}, {}};
    Theorem1Bounds b = theorem1_bounds(req);
    report.eps_marginal = b.eps_marginal;
    report.eps_conditional = b.eps_conditional;
  } else {
    BoundRequest req;
    req.n = n;
    req.delta = delta;
    req.k_per_class.assign(static_cast<std::size_t>(L), k);
    req.alpha_per_class.assign(static_cast<std::size_t>(L), alpha / L);
    Theorem2Bounds b = theorem2_bounds(req);
    report.eps_marginal = b.eps_max_marginal;
    report.eps_conditional = b.eps_max_conditional;
  }

  for (long r = 0; r < R; ++r) {
    Dataset data = sample(dist, n, mix_seed(seed, static_cast<std::uint64_t>(r), 1));
    BinaryCalibratorSpec spec;
    spec.kind = CalibratorKind::histogram_binning;
    spec.bins = BinsPolicy::points_per_bin(k);
    spec.delta = delta;
    spec.seed = mix_seed(seed, static_cast<std::uint64_t>(r), 2);

    double max_dev = 0.0, marginal = 0.0, ece = 0.0;
    if (notion == CoverageNotion::top_label) {
      TopLabelModel model = fit_top_label(data, spec);
      TopLabelDecomposition top = predict_top_label(model, dist.score_map);
      ExactGroupDeviations dev =
          exact_top_label_deviations(dist.p_x, dist.cond, top.top_class, top.top_prob);
      for (std::size_t g = 0; g < dev.mass.size(); ++g) {
        max_dev = std::max(max_dev, dev.deviation[g]);
        if (dev.deviation[g] <= report.eps_marginal) marginal += dev.mass[g];
        ece += dev.mass[g] * dev.deviation[g];
      }
    } else {
      ClassWiseModel model = fit_class_wise(data, spec);
      Matrix preds = predict_class_wise(model, dist.score_map);
      for (int l = 0; l < L; ++l) {
        ExactGroupDeviations dev =
            exact_class_wise_deviations(dist.p_x, dist.cond, l, preds.col(l));
        double class_marginal = 0.0, class_ece = 0.0;
        for (std::size_t g = 0; g < dev.mass.size(); ++g) {
          max_dev = std::max(max_dev, dev.deviation[g]);
          if (dev.deviation[g] <= report.eps_marginal) class_marginal += dev.mass[g];
          class_ece += dev.mass[g] * dev.deviation[g];
        }
        marginal += class_marginal / L;
        ece += class_ece / L;
      }
    }
    report.max_deviation.push_back(max_dev);
    report.marginal_coverage.push_back(marginal);
    report.exact_ece.push_back(ece);
  }

  long violations = 0;
  double msum = 0.0, esum = 0.0;
  for (long r = 0; r < R; ++r) {
    if (report.max_deviation[static_cast<std::size_t>(r)] > report.eps_conditional)
      ++violations;
    msum += report.marginal_coverage[static_cast<std::size_t>(r)];
    esum += report.exact_ece[static_cast<std::size_t>(r)];
  }
  report.conditional_violation_freq = static_cast<double>(violations) / static_cast<double>(R);
  report.mean_marginal_coverage = msum / static_cast<double>(R);
  report.mean_exact_ece = esum / static_cast<double>(R);
  return report;
}

}  // namespace mcal
