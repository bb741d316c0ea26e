#include "elflab/stats.hpp"

#include <atomic>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace elflab {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::stderr_mean() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

namespace {

void fill_interval(LinearFit& f, std::size_t dof) {
  if (dof == 0) {
    f.ci_low = f.ci_high = f.slope;
    return;
  }
  const boost::math::students_t dist(static_cast<double>(dof));
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci_low = f.slope - q * f.slope_se;
  f.ci_high = f.slope + q * f.slope_se;
}

double total_sum_squares(const std::vector<double>& y) {
  double m = 0;
  for (double v : y) m += v;
  m /= static_cast<double>(y.size());
  double s = 0;
  for (double v : y) s += (v - m) * (v - m);
  return s;
}

}  // namespace

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs two or more points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    sse += e * e;
  }
  const double sst = total_sum_squares(y);
  f.r2 = sst > 0 ? 1 - sse / sst : 1.0;
  f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
  fill_interval(f, x.size() - 2);
  return f;
}

LinearFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit needs points");
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.slope * x[i];
    sse += e * e;
  }
  const double sst = total_sum_squares(y);
  f.r2 = sst > 0 ? 1 - sse / sst : 1.0;
  f.slope_se = x.size() > 1 ? std::sqrt(sse / static_cast<double>(x.size() - 1) / sxx) : 0.0;
  fill_interval(f, x.size() - 1);
  return f;
}

double chi_square_homogeneity_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("category counts differ in length");
  double na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    na += a[k];
    nb += b[k];
  }
  double stat = 0;
  int used = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double col = a[k] + b[k];
    if (col == 0) continue;
    ++used;
    const double ea = col * na / (na + nb), eb = col * nb / (na + nb);
    stat += (a[k] - ea) * (a[k] - ea) / ea + (b[k] - eb) * (b[k] - eb) / eb;
  }
  if (used < 2) return 1.0;
  const boost::math::chi_squared dist(used - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double chi_square_gof_pvalue(const std::vector<double>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw std::invalid_argument("category counts differ in length");
  double n = 0;
  for (double c : counts) n += c;
  double stat = 0;
  int used = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (probs[k] <= 0) {
      if (counts[k] > 0) return 0.0;
      continue;
    }
    ++used;
    const double e = n * probs[k];
    stat += (counts[k] - e) * (counts[k] - e) / e;
  }
  if (used < 2) return 1.0;
  const boost::math::chi_squared dist(used - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

std::pair<double, double> wilson_interval(double successes, double n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double p = successes / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace elflab
