#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace promptpg {

// Probability vector: entries in [0, 1], sums to 1 within kSumTolerance.
class ProbVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbVector(std::vector<double> values);
  static ProbVector uniform(std::size_t n);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }

  std::size_t argmax() const;  // ties resolve to the lowest index

  bool operator==(const ProbVector& other) const {
    return values_ == other.values_;
  }

 private:
  std::vector<double> values_;
};

namespace simplex {

inline constexpr double kBracketTolerance = 1e-12;
inline constexpr double kResidualTolerance = 1e-10;
inline constexpr int kMaxBisectionIterations = 200;

// Threshold v such that sum_j min(1, max(0, z_j - v)) = 1, found by
// bisection on [min(z) - 1, max(z)].
double solve_threshold(std::span<const double> z);

// Euclidean projection of z onto the probability simplex:
// p_j = min(1, max(0, z_j - v)), renormalized if floating point left the
// sum off 1.
ProbVector project(std::span<const double> z);

}  // namespace simplex
}  // namespace promptpg
