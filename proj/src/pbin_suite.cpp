#include <algorithm>
#include <cmath>

#include "elflab/experiments.hpp"
#include "elflab/pbin.hpp"

namespace elflab {

namespace {

struct Instance {
  int t = 0;
  double l = 0;
  Eigen::VectorXd theta;
};

Instance draw_instance(Rng& rng, int t_min, int t_max, double l_lo, double l_hi, double u_cap = 0.5) {
  Instance in;
  in.l = rng.uniform(l_lo, l_hi);
  const int lo = std::max(t_min, 1);
  in.t = lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(std::max(t_max - lo + 1, 1))));
  in.theta.resize(in.t);
  for (int s = 0; s < in.t; ++s) in.theta(s) = rng.uniform(in.l, u_cap);
  return in;
}

void record(SuiteResult& r, double excess) {
  ++r.comparisons;
  if (excess > 0) {
    ++r.violations;
    r.worst_excess = std::max(r.worst_excess, excess);
  }
}

Eigen::VectorXd enumerate_pmf(const Eigen::VectorXd& theta) {
  const int t = static_cast<int>(theta.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(t + 1);
  for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
    double w = 1;
    int ones = 0;
    for (int s = 0; s < t; ++s) {
      const bool on = (mask >> s) & 1u;
      w *= on ? theta(s) : 1 - theta(s);
      ones += on;
    }
    p(ones) += w;
  }
  return p;
}

}  // namespace

SuiteResult pbin_exactness_suite(int instances, int t_max, std::uint64_t seed) {
  if (t_max < 1 || t_max > 20) throw std::invalid_argument("enumeration needs 1 <= t <= 20");
  SuiteResult r{"exactness", instances};
  Rng rng(derive_seed(seed, 0xe1, 0));
  for (int i = 0; i < instances; ++i) {
    const int t = 1 + static_cast<int>(rng.index(t_max));
    Eigen::VectorXd theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform();
    const Eigen::VectorXd dp = pbin_pmf(theta), brute = enumerate_pmf(theta);
    for (int k = 0; k <= t; ++k) record(r, std::abs(dp(k) - brute(k)) - 1e-12);
  }
  return r;
}

SuiteResult pbin_mode_suite(int instances, int t_max, std::uint64_t seed) {
  SuiteResult r{"modes", instances};
  Rng rng(derive_seed(seed, 0xe2, 0));
  for (int i = 0; i < instances; ++i) {
    const int t = 1 + static_cast<int>(rng.index(t_max));
    Eigen::VectorXd theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(0.01, 0.99);
    const PoissonBinomial<double> y(theta);
    const double mean = theta.sum();
    const auto [left, right] = y.modes();
    record(r, std::abs(left - mean) - 1);
    record(r, std::abs(right - mean) - 1);
    for (int k = 1; k < t; ++k) record(r, y.ratio(k) >= y.ratio(k + 1) ? y.ratio(k) - y.ratio(k + 1) + 1e-300 : 0.0);
  }
  return r;
}

SuiteResult pbin_separation_suite(int instances, int t_max, std::uint64_t seed, double u_max, double slack) {
  SuiteResult r{"separation", instances};
  Rng rng(derive_seed(seed, 0xe3, 0));
  for (int i = 0; i < instances; ++i) {
    const double l = rng.uniform(0.25, 0.45);
    const double u = rng.uniform(l + 0.01, std::max(u_max, l + 0.02));
    const int t = 2 + static_cast<int>(rng.index(std::max(t_max - 1, 1)));
    Eigen::VectorXd theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(l, u);
    auto compare = [&](const std::vector<Eigen::VectorXd>& chain) {
      for (std::size_t c = 1; c < chain.size(); ++c) {
        const auto cmp = compare_separated_tails(chain[c - 1], chain[c], slack);
        record(r, cmp.worst_excess);
      }
    };
    compare(homogenize_to_extremes_chain(theta, l, u));
    compare(homogenize_to_uniform_chain(theta));
  }
  return r;
}

SuiteResult pbin_tail_upper_suite(int instances, int t_max, std::uint64_t seed, double slack) {
  SuiteResult r{"tail-upper", instances};
  Rng rng(derive_seed(seed, 0xe4, 0));
  for (int i = 0; i < instances; ++i) {
    const auto in = draw_instance(rng, 2, t_max, 0.25, 0.45);
    const PoissonBinomial<double> y(in.theta);
    const double bar = in.theta.mean();
    const double centre = in.t * bar;
    for (int k = 0; k <= in.t; ++k) {
      if (k > centre - 1 + 1e-9 && k < centre + 1 - 1e-9) continue;
      const auto b = pbin_tail_upper(in.t, bar, k);
      const double exact = b.upper_tail ? y.tail(k - 1) : y.cdf(k);
      record(r, exact - b.kl_form - slack);
      record(r, exact - b.quadratic_form - slack);
    }
  }
  return r;
}

SuiteResult pbin_tail_lower_suite(int instances, int t_max, std::uint64_t seed, double slack) {
  SuiteResult r{"tail-lower", instances};
  Rng rng(derive_seed(seed, 0xe5, 0));
  for (int i = 0; i < instances; ++i) {
    const double l = rng.uniform(0.25, 0.45);
    const int t_min = std::max(6, static_cast<int>(std::ceil(24 / l)));
    const int t = t_min + static_cast<int>(rng.index(std::max(t_max - t_min + 1, 1)));
    Eigen::VectorXd theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(l, 0.5);
    const PoissonBinomial<double> y(theta);
    const double bar = theta.mean(), centre = t * bar;
    const int lo = static_cast<int>(std::ceil(centre + 1 - l * t / 8 - 1e-9));
    const int hi = static_cast<int>(std::floor(centre - 1 + 1e-9));
    for (int k = std::max(lo, 0); k <= hi; ++k) record(r, pbin_tail_lower(t, l, bar, k) - y.cdf(k) - slack);
  }
  return r;
}

SuiteResult pbin_ratio_suite(int instances, int t_max, std::uint64_t seed, double slack) {
  SuiteResult r{"ratio", instances};
  Rng rng(derive_seed(seed, 0xe6, 0));
  const double l_floor = std::max(0.25, 576.0 / t_max);
  if (l_floor > 0.45) throw std::invalid_argument("ratio suite needs t_max >= 1280");
  for (int i = 0; i < instances; ++i) {
    const double l = rng.uniform(l_floor, 0.45);
    const int t_min = static_cast<int>(std::ceil(576 / l));
    const int t = t_min + static_cast<int>(rng.index(std::max(t_max - t_min + 1, 1)));
    Eigen::VectorXd theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(l, 0.5);
    const PoissonBinomial<double> y(theta);
    const double bar = theta.mean(), centre = t * bar, half = l * t / 24;
    const int lo = static_cast<int>(std::ceil(centre + 2 - half - 1e-9));
    const int hi = static_cast<int>(std::floor(centre - 2 + half + 1e-9));
    for (int k = std::max(lo, 1); k <= std::min(hi, t); ++k)
      record(r, pbin_ratio_lower(t, l, bar, k) - y.ratio(k) - slack);
  }
  return r;
}

}  // namespace elflab
