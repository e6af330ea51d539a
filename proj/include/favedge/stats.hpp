#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace favedge::stats {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) c_ += (sum_ - t) + x;
    else c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

/// Point estimate with its standard error (sample sd / sqrt(count)).
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::int64_t count = 0;

  /// |mean - target| in standard-error units (infinite if se == 0 and the
  /// mean misses the target).
  double z_score(double target) const noexcept;
  bool within(double target, double n_se) const noexcept {
    return z_score(target) <= n_se;
  }
};

/// Mean and standard error of a sample, summed in the given order.
Estimate estimate(std::span<const double> xs);

/// Streaming first/second moments with compensated sums.
class MomentAccumulator {
 public:
  void add(double x) noexcept {
    sum_.add(x);
    sq_.add(x * x);
    ++n_;
  }
  std::int64_t count() const noexcept { return n_; }
  Estimate result() const noexcept;

 private:
  CompensatedSum sum_;
  CompensatedSum sq_;
  std::int64_t n_ = 0;
};

enum class FitModel { linear_in_log, log_log };

struct FitResult {
  FitModel model = FitModel::linear_in_log;
  double slope = 0.0;
  double intercept = 0.0;
  double correlation = 0.0;
  std::vector<double> residuals;
};

/// Least squares of y = a + b log x (linear_in_log) or log y = a + b log x
/// (log_log). Needs >= 3 points and positive x (and positive y for
/// log_log); throws std::invalid_argument on degenerate abscissae.
FitResult fit(FitModel model, std::span<const double> x,
              std::span<const double> y);

/// Total-variation distance between two probability vectors (padded with
/// zeros to equal length).
double total_variation(std::span<const double> p, std::span<const double> q);

/// Counts normalised to frequencies.
std::vector<double> normalise(std::span<const std::int64_t> counts);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0;
};

/// Goodness of fit of observed counts against expected probabilities.
/// Cells are merged left to right until each has expected count >= 5
/// (the remainder is folded into the last cell); `probs` need not cover
/// the whole support, the missing mass forms a tail cell.
ChiSquareResult chi_square_gof(std::span<const std::int64_t> observed,
                               std::span<const double> probs);

/// Two-sample homogeneity test on a 2 x K table with the same pooling.
ChiSquareResult chi_square_two_sample(std::span<const std::int64_t> a,
                                      std::span<const std::int64_t> b);

/// Upper-tail probability of the chi-square distribution.
double chi_square_sf(double statistic, int dof);

/// Sample quantile with linear interpolation (type 7); `xs` is copied.
double quantile(std::vector<double> xs, double q);

/// Histogram of nonnegative integers with an overflow bucket at `max_value`.
std::vector<std::int64_t> histogram(std::span<const std::int64_t> values,
                                    std::int64_t max_value);

}  // namespace favedge::stats
