#include <doctest.h>

#include <cmath>
#include <vector>

#include "promptpg/errors.hpp"
#include "promptpg/metrics.hpp"

using namespace promptpg;

namespace {
const std::vector<std::size_t> kPred = {1, 1, 0, 1, 0, 0, 1, 0};
const std::vector<std::size_t> kGold = {1, 0, 0, 1, 1, 0, 1, 1};
// Confusion: tp=3 (pred1,gold1), fp=1, fn=2, tn=2.
}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy(kPred, kGold) == doctest::Approx(5.0 / 8.0));
  CHECK(compute_metric(Metric::accuracy, kPred, kGold, 2) ==
        doctest::Approx(5.0 / 8.0));
  const std::vector<std::size_t> p = {0}, g = {1};
  CHECK(accuracy(p, g) == 0.0);
}

TEST_CASE("binary f1 for the positive class") {
  // precision 3/4, recall 3/5, f1 = 2pr/(p+r) = 2/3.
  CHECK(compute_metric(Metric::f1, kPred, kGold, 2) ==
        doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(compute_metric(Metric::f1, kPred, kGold, 3), InvalidInput);
}

TEST_CASE("macro f1 averages per-class f1") {
  // class0: tp=2, fp=2, fn=1 -> f1 = 4/7.
  const double expected = 0.5 * (4.0 / 7.0 + 2.0 / 3.0);
  CHECK(compute_metric(Metric::macro_f1, kPred, kGold, 2) ==
        doctest::Approx(expected));
}

TEST_CASE("matthews correlation matches the hand computation") {
  // phi = (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn))
  const double expected =
      (3.0 * 2.0 - 1.0 * 2.0) / std::sqrt(4.0 * 5.0 * 3.0 * 4.0);
  CHECK(compute_metric(Metric::mcc, kPred, kGold, 2) ==
        doctest::Approx(expected));
}

TEST_CASE("matthews of a constant predictor is 0") {
  const std::vector<std::size_t> pred = {1, 1, 1, 1};
  const std::vector<std::size_t> gold = {0, 1, 0, 1};
  CHECK(compute_metric(Metric::mcc, pred, gold, 2) == 0.0);
}

TEST_CASE("multiclass matthews on a perfect and a permuted predictor") {
  const std::vector<std::size_t> gold = {0, 1, 2, 0, 1, 2};
  CHECK(compute_metric(Metric::mcc, gold, gold, 3) == doctest::Approx(1.0));
  const std::vector<std::size_t> rotated = {1, 2, 0, 1, 2, 0};
  CHECK(compute_metric(Metric::mcc, rotated, gold, 3) ==
        doctest::Approx(-0.5));
}

TEST_CASE("multiclass macro f1") {
  const std::vector<std::size_t> gold = {0, 0, 1, 1, 2, 2};
  const std::vector<std::size_t> pred = {0, 1, 1, 1, 2, 0};
  // class0: tp1 fp1 fn1 -> 0.5; class1: tp2 fp1 fn0 -> 0.8; class2: tp1 fp0 fn1 -> 2/3.
  CHECK(compute_metric(Metric::macro_f1, pred, gold, 3) ==
        doctest::Approx((0.5 + 0.8 + 2.0 / 3.0) / 3.0));
}

TEST_CASE("metric input validation") {
  const std::vector<std::size_t> a = {0, 1}, b = {0};
  CHECK_THROWS_AS(compute_metric(Metric::accuracy, a, b, 2), InvalidInput);
  CHECK_THROWS_AS(
      compute_metric(Metric::accuracy, std::vector<std::size_t>{},
                     std::vector<std::size_t>{}, 2),
      InvalidInput);
  const std::vector<std::size_t> oob = {0, 2};
  CHECK_THROWS_AS(compute_metric(Metric::accuracy, oob, a, 2), InvalidInput);
}

TEST_CASE("metric names parse and print") {
  for (Metric m :
       {Metric::accuracy, Metric::f1, Metric::macro_f1, Metric::mcc})
    CHECK(parse_metric(metric_name(m)) == m);
  CHECK_THROWS_AS(parse_metric("auc"), ConfigError);
}
