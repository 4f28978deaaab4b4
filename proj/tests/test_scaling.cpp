#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcal/rng.hpp"
#include "mcal/scaling.hpp"

using namespace mcal;

namespace {

Matrix random_logits(Rng& rng, int n, int L, double scale) {
  Matrix z(n, L);
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < L; ++l) z(i, l) = scale * rng.gaussian();
  return z;
}

}  // namespace

TEST_CASE("flat objective returns T=1") {
  Matrix z = Matrix::Zero(20, 3);
  Labels y(20);
  for (int i = 0; i < 20; ++i) y[i] = i % 3;
  TemperatureModel m = fit_temperature(z, y);
  CHECK(m.T == 1.0);
}

TEST_CASE("fitted NLL never exceeds the untempered NLL") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix z = random_logits(rng, 100, 4, 3.0);
    Labels y(100);
    for (int i = 0; i < 100; ++i) y[i] = static_cast<int>(rng.below(4));
    TemperatureModel m = fit_temperature(z, y);
    CHECK(m.fit_nll <= temperature_nll(z, y, 1.0) + 1e-9);
    CHECK(m.T >= m.t_min);
    CHECK(m.T <= m.t_max);
  }
}

TEST_CASE("argmax is invariant under temperature") {
  Rng rng(11);
  Matrix z = random_logits(rng, 500, 5, 2.0);
  Matrix base = softmax_rows(z);
  TopLabelDecomposition t0 = top_label(base);
  for (double T : {0.05, 0.7, 1.0, 13.0, 100.0}) {
    TemperatureModel m;
    m.T = T;
    m.L = 5;
    TopLabelDecomposition t = top_label(apply_temperature(m, z));
    for (int i = 0; i < 500; ++i) CHECK(t.top_class[i] == t0.top_class[i]);
  }
}

TEST_CASE("T=1 reproduces the plain softmax; large T flattens") {
  Rng rng(13);
  Matrix z = random_logits(rng, 50, 3, 1.0);
  TemperatureModel one;
  one.T = 1.0;
  one.L = 3;
  CHECK((apply_temperature(one, z) - softmax_rows(z)).cwiseAbs().maxCoeff() == 0.0);

  TemperatureModel big;
  big.T = 100.0;
  big.L = 3;
  Matrix flat = apply_temperature(big, z);
  for (int i = 0; i < 50; ++i)
    for (int l = 0; l < 3; ++l) CHECK(std::abs(flat(i, l) - 1.0 / 3) < 0.02);
}

TEST_CASE("well-calibrated symmetric logits fit T close to 1") {
  // two-class symmetric logits (z, -z) with labels drawn at the matching
  // sigmoid frequencies: NLL is minimized at T=1
  Rng rng(17);
  const int n = 20000;
  Matrix z(n, 2);
  Labels y(n);
  for (int i = 0; i < n; ++i) {
    double v = 2.0 * rng.uniform() - 1.0;
    z(i, 0) = v;
    z(i, 1) = -v;
    double p0 = 1.0 / (1.0 + std::exp(-2.0 * v));
    y[i] = rng.uniform() < p0 ? 0 : 1;
  }
  TemperatureModel m = fit_temperature(z, y);
  CHECK(std::abs(m.T - 1.0) < 0.1);
}

TEST_CASE("class-count mismatch at apply") {
  TemperatureModel m;
  m.T = 2.0;
  m.L = 3;
  Matrix z = Matrix::Zero(4, 5);
  CHECK_THROWS_AS(apply_temperature(m, z), Error);
}
