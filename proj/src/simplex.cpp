#include "promptpg/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "promptpg/errors.hpp"
#include "promptpg/kernels.hpp"

namespace promptpg {

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("ProbVector: empty");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InvalidInput("ProbVector: entry outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw InvalidInput("ProbVector: sum not 1 within tolerance");
}

ProbVector ProbVector::uniform(std::size_t n) {
  if (n == 0) throw InvalidInput("ProbVector: empty");
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::size_t ProbVector::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (values_[i] > values_[best]) best = i;
  return best;
}

namespace simplex {

namespace {

void check_input(std::span<const double> z) {
  if (z.empty()) throw InvalidInput("simplex: empty input");
  for (double v : z)
    if (!std::isfinite(v)) throw InvalidInput("simplex: non-finite input");
}

}  // namespace

double solve_threshold(std::span<const double> z) {
  check_input(z);
  const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
  double lo = *mn - 1.0;  // residual >= n - 1 >= 0 here
  double hi = *mx;        // residual = -1 here
  double v = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisectionIterations; ++it) {
    v = 0.5 * (lo + hi);
    const double residual = kernels::clipped_shift_sum(z, v) - 1.0;
    if (std::abs(residual) < kResidualTolerance) break;
    if (residual > 0.0)
      lo = v;
    else
      hi = v;
    if (hi - lo < kBracketTolerance) {
      v = 0.5 * (lo + hi);
      break;
    }
  }
  return v;
}

ProbVector project(std::span<const double> z) {
  const double v = solve_threshold(z);
  std::vector<double> p(z.size());
  kernels::clipped_shift(z, v, p);
  const double sum = kernels::sum(p);
  if (!(sum > 0.0)) throw Error("simplex: projection collapsed to zero");
  if (sum != 1.0) kernels::scale(p, 1.0 / sum);
  // Renormalizing divides by sum >= max entry, so entries stay in [0, 1].
  return ProbVector(std::move(p));
}

}  // namespace simplex
}  // namespace promptpg
