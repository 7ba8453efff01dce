#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace refprior {

using Rng = std::mt19937_64;
using ParamVector = std::vector<double>;

/// Parameter value outside the support of a model or kernel.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed call: bad sizes, counts or shapes.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unreadable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stand-in for log(0). Finite so that max/argmax over log-likelihoods stay
/// well defined.
inline constexpr double kLogZero = std::numeric_limits<double>::lowest();

/// Stand-in for an infinite divergence.
inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::max();

inline constexpr double kPi = 3.14159265358979323846;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  bool contains(double x) const { return x >= lower && x <= upper; }
  double width() const { return upper - lower; }
};

/// Dense row-major matrix of doubles. Rows are samples, columns dimensions.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Independent stream derived from (seed, stream index). Used wherever work is
/// split into cells or parallel chunks so results do not depend on scheduling.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// log(sum(exp(x))) with the usual max shift. Empty input gives kLogZero.
double log_sum_exp(std::span<const double> x);

/// Evenly spaced grid including both ends; a single point sits at the midpoint.
std::vector<double> linspace(const Interval& bounds, std::size_t count);

/// Midpoints of `count` equal cells of bounds (midpoint-rule nodes).
std::vector<double> cell_centres(const Interval& bounds, std::size_t count);

}  // namespace refprior
