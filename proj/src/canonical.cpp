#include "mcal/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

#include "mcal/rng.hpp"

namespace mcal {

void check_simplex(const Vector& s) {
  for (Eigen::Index l = 0; l < s.size(); ++l)
    if (s[l] < -1e-9 || s[l] > 1.0 + 1e-9)
      throw Error(ErrorKind::NotOnSimplex, "coordinate outside [0, 1]");
  if (std::abs(s.sum() - 1.0) > kRowSumTol)
    throw Error(ErrorKind::NotOnSimplex, "coordinates do not sum to 1");
}

// ---- Sierpinski ----

SierpinskiPath sierpinski_assign(const Vector& s, int L, int q) {
  check_simplex(s);
  if (static_cast<int>(s.size()) != L)
    throw Error(ErrorKind::ClassCountMismatch, "point dimension != L");
  SierpinskiPath path;
  Vector t = s;
  for (int level = 0; level < q; ++level) {
    int chosen = 0;
    for (int l = 0; l < L; ++l) {
      if (t[l] > 0.5) {  // strict: boundary points fall to the catch-all
        chosen = l + 1;
        break;
      }
    }
    if (chosen == 0) {
      path.push_back(0);
      return path;
    }
    path.push_back(chosen);
    t *= 2.0;
    t[chosen - 1] -= 1.0;
  }
  return path;
}

long sierpinski_bin_count(int L, int q) {
  long total = 0, pow = 1;
  for (int j = 0; j <= q; ++j) {
    total += pow;
    pow *= L;
  }
  return total;  // (L^{q+1}-1)/(L-1)
}

namespace {

// Bins in the subtree rooted at a node with r remaining levels.
long sierpinski_subtree(int L, int r) {
  long f = 1;
  for (int j = 0; j < r; ++j) f = 1 + static_cast<long>(L) * f;
  return f;
}

void sierpinski_gen(int L, int remaining, SierpinskiPath& prefix,
                    std::vector<SierpinskiPath>& out) {
  prefix.push_back(0);
  out.push_back(prefix);
  prefix.pop_back();
  for (int l = 1; l <= L; ++l) {
    prefix.push_back(l);
    if (remaining == 1)
      out.push_back(prefix);
    else
      sierpinski_gen(L, remaining - 1, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<SierpinskiPath> sierpinski_enumerate(int L, int q) {
  std::vector<SierpinskiPath> out;
  SierpinskiPath prefix;
  sierpinski_gen(L, q, prefix, out);
  return out;
}

int sierpinski_bin_index(const Vector& s, int L, int q) {
  SierpinskiPath path = sierpinski_assign(s, L, q);
  long idx = 0;
  int remaining = q;
  for (int e : path) {
    if (e == 0) return static_cast<int>(idx);  // catch-all comes first
    idx += 1 + static_cast<long>(e - 1) * sierpinski_subtree(L, remaining - 1);
    --remaining;
  }
  return static_cast<int>(idx);
}

// ---- Grid-style ----

namespace {

constexpr double kGridEps = 1e-9;

bool grid_sum_ok(int sum, int L, int K) {
  return sum >= std::max(L, K + 1) && sum <= K + L - 1;
}

}  // namespace

std::vector<int> grid_assign(const Vector& s, int K) {
  check_simplex(s);
  if (K < 1) throw Error(ErrorKind::InvalidHyperparameters, "K must be >= 1");
  const int L = static_cast<int>(s.size());

  // Candidate coordinates: ceil(s_l K) and floor(s_l K)+1 clipped to [1, K];
  // they differ only when s_l K is integral.
  std::vector<std::vector<int>> cand(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    double x = s[l] * K;
    double r = std::round(x);
    if (std::abs(x - r) <= kGridEps) {
      int v = static_cast<int>(r);
      if (v >= 1 && v <= K) cand[static_cast<std::size_t>(l)].push_back(v);
      if (v + 1 >= 1 && v + 1 <= K) cand[static_cast<std::size_t>(l)].push_back(v + 1);
    } else {
      int v = static_cast<int>(std::ceil(x));
      if (v >= 1 && v <= K) cand[static_cast<std::size_t>(l)].push_back(v);
    }
    if (cand[static_cast<std::size_t>(l)].empty())
      throw Error(ErrorKind::NoBinFound, "no candidate coordinate");
    std::sort(cand[static_cast<std::size_t>(l)].begin(), cand[static_cast<std::size_t>(l)].end());
  }

  // Enumerate the <= 2^L candidate tuples in lexicographic order and return
  // the first member of I containing s.
  std::vector<int> tuple(static_cast<std::size_t>(L));
  std::vector<int> best;
  std::function<void(int, int)> rec = [&](int l, int sum) {
    if (!best.empty()) return;  // lexicographic first wins
    if (l == L) {
      if (grid_sum_ok(sum, L, K)) {
        for (int j = 0; j < L; ++j) {
          double x = s[j] * K;
          if (x < tuple[static_cast<std::size_t>(j)] - 1 - kGridEps ||
              x > tuple[static_cast<std::size_t>(j)] + kGridEps)
            return;
        }
        best = tuple;
      }
      return;
    }
    for (int v : cand[static_cast<std::size_t>(l)]) {
      tuple[static_cast<std::size_t>(l)] = v;
      rec(l + 1, sum + v);
    }
  };
  rec(0, 0);
  if (best.empty()) throw Error(ErrorKind::NoBinFound, "grid assignment failed");
  return best;
}

std::vector<std::vector<int>> grid_enumerate(int L, int K) {
  std::vector<std::vector<int>> out;
  std::vector<int> tuple(static_cast<std::size_t>(L), 1);
  std::function<void(int, int)> rec = [&](int l, int sum) {
    if (l == L) {
      if (grid_sum_ok(sum, L, K)) out.push_back(tuple);
      return;
    }
    for (int v = 1; v <= K; ++v) {
      tuple[static_cast<std::size_t>(l)] = v;
      rec(l + 1, sum + v);
    }
  };
  rec(0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

int grid_bin_index(const Vector& s, int L, int K) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::map<std::vector<int>, int>> cache;
  std::vector<int> tuple = grid_assign(s, K);
  std::lock_guard<std::mutex> lock(mu);
  auto& index = cache[{L, K}];
  if (index.empty()) {
    auto all = grid_enumerate(L, K);
    for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = static_cast<int>(i);
  }
  auto it = index.find(tuple);
  if (it == index.end()) throw Error(ErrorKind::NoBinFound, "tuple outside index set");
  return it->second;
}

// ---- Projection histogram binning ----

Matrix default_directions(int L, int B, DirectionPolicy policy, std::uint64_t seed) {
  if (B < 1) throw Error(ErrorKind::InvalidHyperparameters, "B must be >= 1");
  Matrix q = Matrix::Zero(B, L);
  if (policy == DirectionPolicy::canonical_cycle) {
    for (int b = 0; b < B; ++b) q(b, b % L) = -1.0;
  } else {
    Rng rng(seed);
    for (int b = 0; b < B; ++b) {
      double norm = 0.0;
      while (norm == 0.0) {
        for (int l = 0; l < L; ++l) q(b, l) = rng.gaussian();
        norm = q.row(b).norm();
      }
      q.row(b) /= norm;
    }
  }
  return q;
}

ProjectionHBScheme fit_projection_hb(const Matrix& simplex_points, int B,
                                     const Matrix& q_vectors) {
  const Eigen::Index n = simplex_points.rows();
  if (B < 1) throw Error(ErrorKind::InvalidHyperparameters, "B must be >= 1");
  if (n < B) throw Error(ErrorKind::TooFewPoints, "need n >= B");
  if (q_vectors.rows() < B - 1)
    throw Error(ErrorKind::InvalidHyperparameters, "need at least B-1 directions");
  if (q_vectors.cols() != simplex_points.cols())
    throw Error(ErrorKind::ClassCountMismatch, "direction dimension != L");
  for (Eigen::Index b = 0; b < std::min<Eigen::Index>(q_vectors.rows(), B); ++b)
    if (std::abs(q_vectors.row(b).norm() - 1.0) > 1e-9)
      throw Error(ErrorKind::NonUnitDirection, "direction must have unit norm");

  ProjectionHBScheme scheme;
  scheme.B = B;
  scheme.q_vectors = Matrix::Zero(B, simplex_points.cols());
  for (int b = 0; b < B; ++b) {
    if (b < q_vectors.rows())
      scheme.q_vectors.row(b) = q_vectors.row(b);
    else
      scheme.q_vectors(b, 0) = -1.0;  // residual-bin direction, sentinel only
  }
  scheme.interior_quota = static_cast<int>((n + 1) / (B));
  scheme.thresholds.assign(static_cast<std::size_t>(B), 1.01);

  const int c = scheme.interior_quota;
  std::vector<Eigen::Index> remaining(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) remaining[static_cast<std::size_t>(i)] = i;

  for (int b = 0; b < B - 1; ++b) {
    if (static_cast<int>(remaining.size()) < c)
      throw Error(ErrorKind::TooFewPoints, "insufficient points for threshold");
    std::vector<double> proj(remaining.size());
    for (std::size_t j = 0; j < remaining.size(); ++j)
      proj[j] = simplex_points.row(remaining[j]).dot(scheme.q_vectors.row(b));
    std::vector<double> sorted = proj;
    std::nth_element(sorted.begin(), sorted.begin() + (c - 1), sorted.end());
    double T = sorted[static_cast<std::size_t>(c - 1)];  // c-th order statistic
    scheme.thresholds[static_cast<std::size_t>(b)] = T;
    std::vector<Eigen::Index> kept;
    for (std::size_t j = 0; j < remaining.size(); ++j)
      if (proj[j] > T) kept.push_back(remaining[j]);
    remaining.swap(kept);
  }
  return scheme;
}

int projection_bin_index(const ProjectionHBScheme& scheme, const Vector& s) {
  for (int b = 0; b < scheme.B; ++b)
    if (s.dot(scheme.q_vectors.row(b)) < scheme.thresholds[static_cast<std::size_t>(b)])
      return b;
  throw Error(ErrorKind::NoBinFound, "sentinel threshold not crossed");
}

bool projection_on_boundary(const ProjectionHBScheme& scheme, const Vector& s) {
  for (int b = 0; b < scheme.B - 1; ++b)
    if (s.dot(scheme.q_vectors.row(b)) == scheme.thresholds[static_cast<std::size_t>(b)])
      return true;
  return false;
}

// ---- Canonical model ----

int canonical_bin_count(const CanonicalScheme& scheme, int L) {
  switch (scheme.kind) {
    case CanonicalSchemeKind::sierpinski:
      return static_cast<int>(sierpinski_bin_count(L, scheme.sierpinski.q));
    case CanonicalSchemeKind::grid:
      return static_cast<int>(grid_enumerate(L, scheme.grid.K).size());
    case CanonicalSchemeKind::projection_hb:
      return scheme.projection.B;
  }
  return 0;
}

int canonical_bin_index(const CanonicalScheme& scheme, const Vector& s) {
  switch (scheme.kind) {
    case CanonicalSchemeKind::sierpinski:
      return sierpinski_bin_index(s, scheme.sierpinski.L, scheme.sierpinski.q);
    case CanonicalSchemeKind::grid:
      return grid_bin_index(s, scheme.grid.L, scheme.grid.K);
    case CanonicalSchemeKind::projection_hb:
      return projection_bin_index(scheme.projection, s);
  }
  throw Error(ErrorKind::UnsupportedPredictor, "unknown scheme kind");
}

CanonicalModel fit_canonical(const CanonicalScheme& scheme, const Dataset& data) {
  if (data.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty calibration data");
  validate_dataset(data);
  const int L = static_cast<int>(data.classes());
  const int B = canonical_bin_count(scheme, L);

  CanonicalModel model;
  model.L = L;
  model.scheme = scheme;
  Matrix counts = Matrix::Zero(B, L);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    Vector s = data.scores.row(i);
    if (scheme.kind == CanonicalSchemeKind::projection_hb &&
        projection_on_boundary(scheme.projection, s))
      continue;  // boundary points excluded from bias estimation
    counts(canonical_bin_index(scheme, s), data.labels[i]) += 1.0;
  }
  model.pi_hat = Matrix::Zero(B, L);
  for (int b = 0; b < B; ++b) {
    double nb = counts.row(b).sum();
    if (nb > 0.0)
      model.pi_hat.row(b) = counts.row(b) / nb;
    else
      model.pi_hat.row(b).setConstant(1.0 / L);  // empty-bin fallback
  }
  return model;
}

Vector predict_canonical(const CanonicalModel& model, const Vector& s) {
  if (static_cast<int>(s.size()) != model.L)
    throw Error(ErrorKind::ClassCountMismatch, "point dimension != L");
  return model.pi_hat.row(canonical_bin_index(model.scheme, s));
}

Matrix predict_canonical_rows(const CanonicalModel& model, const Matrix& scores) {
  Matrix out(scores.rows(), model.L);
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    out.row(i) = predict_canonical(model, Vector(scores.row(i)));
  return out;
}

}  // namespace mcal
