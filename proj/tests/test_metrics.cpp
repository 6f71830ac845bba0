#include <doctest.h>

#include <vector>

#include "lift/errors.hpp"
#include "lift/metrics.hpp"
#include "lift/rng.hpp"
#include "oracles.hpp"

using lift::icc31;
using lift::mae;
using lift::pspi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("mae: examples and errors") {
  CHECK(mae(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(mae(vec({1, 2}), vec({2, 4})) == doctest::Approx(1.5));
  CHECK_THROWS_AS(mae(vec({1}), vec({1, 2})), lift::LengthMismatch);
  CHECK_THROWS_AS(mae(Eigen::VectorXd(), Eigen::VectorXd()), lift::LengthMismatch);
}

TEST_CASE("mae: symmetric and translation invariant") {
  lift::Rng rng(7);
  Eigen::VectorXd a(20), b(20);
  for (int i = 0; i < 20; ++i) {
    a[i] = rng.uniform(-3, 3);
    b[i] = rng.uniform(-3, 3);
  }
  CHECK(mae(a, b) == doctest::Approx(mae(b, a)));
  CHECK(mae(a.array() + 2.5, b.array() + 2.5) == doctest::Approx(mae(a, b)));
}

TEST_CASE("icc31: hand cases") {
  CHECK(icc31(vec({1, 2, 3}), vec({1, 2, 3})) == doctest::Approx(1.0));
  CHECK(icc31(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(-1.0));
  // Constant shift is a pure rater effect, absorbed by the two-way model.
  CHECK(icc31(vec({1, 2, 3}), vec({6, 7, 8})) == doctest::Approx(1.0));
  // Fully degenerate input reports 0 instead of NaN.
  CHECK(icc31(vec({4, 4, 4}), vec({4, 4, 4})) == 0.0);
  CHECK_THROWS_AS(icc31(vec({1}), vec({2})), lift::TooFewTargets);
  CHECK_THROWS_AS(icc31(vec({1, 2}), vec({1, 2, 3})), lift::LengthMismatch);
}

TEST_CASE("icc31: matches the two-way ANOVA oracle") {
  lift::Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const int n = rng.uniform_int(2, 40);
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) {
      a.push_back(rng.uniform(0, 10));
      b.push_back(rng.uniform(0, 10));
    }
    const Eigen::VectorXd ea = Eigen::Map<const Eigen::VectorXd>(a.data(), n);
    const Eigen::VectorXd eb = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
    CHECK(std::abs(icc31(ea, eb) - oracles::ref_icc31({a, b})) < 1e-10);
  }
}

TEST_CASE("icc31: independent raters score near zero") {
  lift::Rng rng(3);
  const int n = 10000;
  Eigen::VectorXd a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
  }
  const double v = icc31(a, b);
  CHECK(v > -0.05);
  CHECK(v < 0.05);
}

TEST_CASE("pspi: examples") {
  CHECK(pspi(lift::AuIntensities{0, 0, 0, 0, 0, 0}) == 0);
  CHECK(pspi(lift::AuIntensities{2, 1, 3, 2, 0, 1}) == 8);
  CHECK(pspi(lift::AuIntensities{5, 5, 5, 5, 5, 1}) == 16);
}

TEST_CASE("pspi: monotone nondecreasing in each AU") {
  lift::Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    lift::AuIntensities au;
    for (int k = 0; k < 5; ++k) au[k] = rng.uniform_int(0, 4);
    au[5] = rng.uniform_int(0, 1);
    const int base = pspi(au);
    for (int k = 0; k < 6; ++k) {
      lift::AuIntensities bumped = au;
      bumped[k] += 1;
      if (k == 5 && bumped[5] > 1) continue;
      CHECK(pspi(bumped) >= base);
    }
  }
}

TEST_CASE("pspi: range and missing-AU errors") {
  CHECK_THROWS_AS(pspi(lift::AuIntensities{6, 0, 0, 0, 0, 0}), lift::RangeViolation);
  CHECK_THROWS_AS(pspi(lift::AuIntensities{0, 0, 0, 0, 0, 2}), lift::RangeViolation);
  CHECK_THROWS_AS(pspi(lift::AuIntensities{-1, 0, 0, 0, 0, 0}), lift::RangeViolation);
  std::map<std::string, int> au{{"AU4", 1}, {"AU6", 1}, {"AU7", 1}, {"AU9", 1}, {"AU10", 1}};
  CHECK_THROWS_AS(pspi(au), lift::MissingAU);
  au["AU43"] = 1;
  CHECK(pspi(au) == 4);
}
