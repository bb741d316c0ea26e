#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace elflab {

// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
  double stderr_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  double r2 = 0;
  double ci_low = 0;   // 95% interval for the slope
  double ci_high = 0;
  std::size_t n = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// y = slope * x; r2 relative to the mean of y.
LinearFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y);

// Pearson chi-square test that two samples of category counts share a law.
double chi_square_homogeneity_pvalue(const std::vector<double>& a, const std::vector<double>& b);
// Goodness of fit of category counts against probabilities.
double chi_square_gof_pvalue(const std::vector<double>& counts, const std::vector<double>& probs);

std::pair<double, double> wilson_interval(double successes, double n, double z = 1.96);

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);
int default_threads();

// 17 significant digits, enough to round-trip a double.
std::string fmt17(double x);

}  // namespace elflab
