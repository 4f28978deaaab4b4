#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mcal/core.hpp"
#include "mcal/rng.hpp"

using namespace mcal;

TEST_CASE("validate_and_normalize accepts and renormalizes") {
  Matrix m(1, 2);
  m << 0.2, 0.8;
  Matrix out = validate_and_normalize(m, false);
  CHECK(out(0, 0) == 0.2);
  CHECK(out(0, 1) == 0.8);

  Matrix raw(1, 2);
  raw << 2, 2;
  out = validate_and_normalize(raw, true);
  CHECK(out(0, 0) == 0.5);
  CHECK(out(0, 1) == 0.5);

  Matrix raw3(1, 3);
  raw3 << 1, 2, 1;
  out = validate_and_normalize(raw3, true);
  CHECK(out(0, 0) == 0.25);
  CHECK(out(0, 1) == 0.5);
  CHECK(out(0, 2) == 0.25);
}

TEST_CASE("validate_and_normalize rejects bad rows") {
  Matrix neg(1, 2);
  neg << -0.5, 1.5;
  CHECK_THROWS_AS(validate_and_normalize(neg, false), Error);

  Matrix zero(1, 2);
  zero << 0, 0;
  CHECK_THROWS_AS(validate_and_normalize(zero, true), Error);

  Matrix off(1, 2);
  off << 0.3, 0.3;
  CHECK_THROWS_AS(validate_and_normalize(off, false), Error);
}

TEST_CASE("softmax_rows") {
  Matrix z(1, 2);
  z << 0, 0;
  Matrix out = softmax_rows(z);
  CHECK(out(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  z << std::log(3.0), 0.0;
  out = softmax_rows(z);
  CHECK(out(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.25).epsilon(1e-12));

  z << 1000, 0;
  out = softmax_rows(z);
  CHECK(std::isfinite(out(0, 0)));
  CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.row(0).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("top_label argmax with low-index ties") {
  Matrix m(3, 3);
  m << 0.1, 0.9, 0.0, 0.5, 0.5, 0.0, 0.2, 0.5, 0.3;
  TopLabelDecomposition t = top_label(m);
  CHECK(t.top_class[0] == 1);
  CHECK(t.top_prob[0] == 0.9);
  CHECK(t.top_class[1] == 0);
  CHECK(t.top_prob[1] == 0.5);
  CHECK(t.top_class[2] == 1);
  CHECK(t.top_prob[2] == 0.5);
}

TEST_CASE("top_k ordering and tie rule") {
  Matrix m(1, 3);
  m << 0.5, 0.3, 0.2;
  TopKDecomposition t = top_k(m, 2);
  CHECK(t.rank_class(0, 0) == 0);
  CHECK(t.rank_prob(0, 0) == 0.5);
  CHECK(t.rank_class(0, 1) == 1);
  CHECK(t.rank_prob(0, 1) == 0.3);

  Matrix tie(1, 3);
  tie << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  TopKDecomposition full = top_k(tie, 3);
  CHECK(full.rank_class(0, 0) == 0);
  CHECK(full.rank_class(0, 1) == 1);
  CHECK(full.rank_class(0, 2) == 2);

  CHECK_THROWS_AS(top_k(m, 4), Error);
  CHECK_THROWS_AS(top_k(m, 0), Error);
}

TEST_CASE("top_k(1) agrees with top_label on random matrices") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(20, 4);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double s = 0;
      for (Eigen::Index l = 0; l < 4; ++l) {
        m(i, l) = rng.uniform();
        s += m(i, l);
      }
      m.row(i) /= s;
    }
    TopLabelDecomposition t = top_label(m);
    TopKDecomposition k1 = top_k(m, 1);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      CHECK(t.top_class[i] == k1.rank_class(i, 0));
      CHECK(t.top_prob[i] == k1.rank_prob(i, 0));
      CHECK(t.top_prob[i] >= 1.0 / 4 - 1e-12);
    }
  }
}
