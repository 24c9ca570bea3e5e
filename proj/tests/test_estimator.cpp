#include <doctest.h>

#include <cmath>
#include <vector>

#include "promptpg/errors.hpp"
#include "promptpg/estimator.hpp"
#include "test_oracles.hpp"

using namespace promptpg;

namespace {

PromptDistribution fixture_dist() {
  std::vector<ProbVector> rows;
  rows.emplace_back(std::vector<double>{0.5, 0.3, 0.2});
  return PromptDistribution(std::move(rows));
}

SampleBatchRecord make_record(const PromptDistribution& dist,
                              const std::vector<std::vector<std::size_t>>& idx,
                              const std::vector<double>& losses) {
  SampleBatchRecord r;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    PromptSample s;
    s.indices = idx[k];
    ScoreMatrix m = score(dist, s);
    r.add(std::move(s), losses[k], std::move(m));
  }
  return r;
}

double max_abs(const RowMatrix& a, const RowMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
  return m;
}

}  // namespace

TEST_CASE("record validation rejects ragged and short batches") {
  const auto dist = fixture_dist();
  auto r = make_record(dist, {{0}}, {0.5});
  CHECK_THROWS_AS(vr_pge(r), InvalidInput);  // needs >= 2 samples
  CHECK_NOTHROW(plain_pge(r));
  r.losses.push_back(0.1);
  CHECK_THROWS_AS(r.validate(1), InvalidInput);

  auto nan_rec = make_record(dist, {{0}, {1}}, {0.5, NAN});
  CHECK_THROWS_AS(vr_pge(nan_rec), InvalidInput);
}

TEST_CASE("two-sample vr matches the hand formula") {
  const auto dist = fixture_dist();
  const auto r = make_record(dist, {{0}, {2}}, {1.0, 3.0});
  // mean 2; coefficients (1-2)/1 = -1 and (3-2)/1 = +1.
  const GradientEstimate g = vr_pge(r);
  const RowMatrix s0 = score(dist, r.samples[0]);
  const RowMatrix s1 = score(dist, r.samples[1]);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(g.at(0, j) ==
          doctest::Approx(-s0.at(0, j) + s1.at(0, j)).epsilon(1e-12));
}

TEST_CASE("plain estimator averages loss-weighted scores") {
  const auto dist = fixture_dist();
  const auto r = make_record(dist, {{0}, {1}}, {2.0, 4.0});
  const GradientEstimate g = plain_pge(r);
  const RowMatrix s0 = score(dist, r.samples[0]);
  const RowMatrix s1 = score(dist, r.samples[1]);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(g.at(0, j) ==
          doctest::Approx(0.5 * (2.0 * s0.at(0, j) + 4.0 * s1.at(0, j)))
              .epsilon(1e-12));
}

TEST_CASE("vr estimate is exactly invariant to a loss baseline shift") {
  const auto dist = fixture_dist();
  const auto r1 = make_record(dist, {{0}, {1}, {2}}, {0.3, 0.9, 0.4});
  const auto r2 = make_record(dist, {{0}, {1}, {2}}, {10.3, 10.9, 10.4});
  const GradientEstimate g1 = vr_pge(r1);
  const GradientEstimate g2 = vr_pge(r2);
  CHECK(g1.data() == g2.data());
}

// The enumerated mean of the variance-reduced estimator obeys
//   E[vr] = sum_T P(T) L(T) s(T) - E[L] * E[s]
// exactly, for arbitrary (uncentered) losses. The second term vanishes
// when the losses are centered under P.
TEST_CASE("enumerated vr mean matches the exact identity") {
  promptpg::Rng rng(21);
  for (std::size_t n : {1u, 2u}) {
    for (std::size_t N : {2u, 3u}) {
      std::vector<ProbVector> rows;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> raw(N);
        double sum = 0.0;
        for (double& v : raw) {
          v = 0.2 + rng.uniform01();
          sum += v;
        }
        for (double& v : raw) v /= sum;
        rows.emplace_back(std::move(raw));
      }
      const PromptDistribution dist(std::move(rows));

      const std::size_t tuple_count =
          testoracle::all_index_tuples(n, N).size();
      std::vector<double> losses(tuple_count);
      for (double& l : losses) l = 2.0 * rng.uniform01() + 0.5;

      for (std::size_t I : {2u, 3u}) {
        const RowMatrix mean = testoracle::enumerate_estimator_mean(
            dist, losses, I,
            [&](const std::vector<std::vector<std::size_t>>& drawn,
                const std::vector<double>& drawn_losses) {
              return vr_pge(make_record(dist, drawn, drawn_losses));
            });
        RowMatrix expected = testoracle::loss_score_sum(dist, losses);
        const double mean_loss = testoracle::expected_loss(dist, losses);
        const RowMatrix es = testoracle::expected_score(dist);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < N; ++j)
            expected.at(i, j) -= mean_loss * es.at(i, j);
        CHECK(max_abs(mean, expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("enumerated plain mean equals the loss-score sum exactly") {
  promptpg::Rng rng(22);
  const auto dist = fixture_dist();
  std::vector<double> losses(3);
  for (double& l : losses) l = rng.uniform01();
  for (std::size_t I : {1u, 2u, 3u}) {
    const RowMatrix mean = testoracle::enumerate_estimator_mean(
        dist, losses, I,
        [&](const std::vector<std::vector<std::size_t>>& drawn,
            const std::vector<double>& drawn_losses) {
          return plain_pge(make_record(dist, drawn, drawn_losses));
        });
    const RowMatrix expected = testoracle::loss_score_sum(dist, losses);
    CHECK(max_abs(mean, expected) < 1e-12);
  }
}
