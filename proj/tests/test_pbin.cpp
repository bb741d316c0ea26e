#include <doctest.h>

#include <cmath>

#include "elflab/pbin.hpp"
#include "elflab/rng.hpp"

using namespace elflab;
using V = Eigen::VectorXd;

namespace {

V vec(std::initializer_list<double> x) {
  V v(x.size());
  int i = 0;
  for (double e : x) v(i++) = e;
  return v;
}

// Brute force over all 2^t outcomes, long double accumulation.
std::vector<long double> brute_pmf(const V& theta) {
  const int t = static_cast<int>(theta.size());
  std::vector<long double> p(t + 1, 0.0L);
  for (unsigned m = 0; m < (1u << t); ++m) {
    long double w = 1;
    int k = 0;
    for (int s = 0; s < t; ++s) {
      const bool on = (m >> s) & 1u;
      w *= on ? theta(s) : 1 - theta(s);
      k += on;
    }
    p[k] += w;
  }
  return p;
}

double binom_cdf(int t, double p, int k) {
  double acc = 0;
  for (int j = 0; j <= k; ++j) acc += std::exp(std::lgamma(t + 1.0) - std::lgamma(j + 1.0) - std::lgamma(t - j + 1.0)) *
                                      std::pow(p, j) * std::pow(1 - p, t - j);
  return acc;
}

}  // namespace

TEST_CASE("pmf examples") {
  const V a = pbin_pmf(vec({0.5, 0.5}));
  CHECK(a(0) == 0.25);
  CHECK(a(1) == 0.5);
  CHECK(a(2) == 0.25);
  const V b = pbin_pmf(vec({1.0}));
  CHECK(b(0) == 0.0);
  CHECK(b(1) == 1.0);
  CHECK_THROWS(pbin_pmf(V()));
  CHECK_THROWS(pbin_pmf(vec({1.2})));
}

TEST_CASE("pmf matches enumeration") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const int t = 1 + rng.index(12);
    V theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform();
    const PoissonBinomial<double> y(theta);
    const auto brute = brute_pmf(theta);
    long double acc = 0;
    for (int k = 0; k <= t; ++k) {
      acc += brute[k];
      CHECK(std::abs(y.pmf(k) - static_cast<double>(brute[k])) <= 1e-12);
      CHECK(std::abs(y.cdf(k) - static_cast<double>(acc)) <= 1e-12);
      CHECK(y.cdf(k) + y.tail(k) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("cdf and tail edges") {
  const PoissonBinomial<double> y(vec({0.5, 0.5}));
  CHECK(y.cdf(-1) == 0.0);
  CHECK(y.cdf(0) == 0.25);
  CHECK(y.cdf(2) == doctest::Approx(1.0));
  CHECK(y.tail(2) == 0.0);
  CHECK(y.mean() == 0.5);
}

TEST_CASE("modes") {
  CHECK(PoissonBinomial<double>(vec({0.5, 0.5})).modes() == std::pair{1, 1});
  CHECK(PoissonBinomial<double>(vec({0.5, 0.5, 0.5})).modes() == std::pair{1, 2});
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const int t = 1 + rng.index(100);
    V theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(0.01, 0.99);
    const PoissonBinomial<double> y(theta);
    const auto [l, r] = y.modes();
    CHECK(r - l <= 1);
    CHECK(std::abs(l - theta.sum()) <= 1.0);
    CHECK(std::abs(r - theta.sum()) <= 1.0);
    for (int k = 1; k <= l; ++k) CHECK(y.pmf(k) > y.pmf(k - 1));
    for (int k = r; k < t; ++k) CHECK(y.pmf(k + 1) < y.pmf(k));
    for (int k = 1; k < t; ++k) CHECK(y.ratio(k) < y.ratio(k + 1));
  }
}

TEST_CASE("ratio examples") {
  const PoissonBinomial<double> y(vec({0.5, 0.5}));
  CHECK(y.ratio(1) == 0.5);
  CHECK(y.ratio(2) == 2.0);
  CHECK(y.ratio(0) == 0.0);
  CHECK_THROWS(PoissonBinomial<double>(vec({1.0, 1.0})).ratio(0));
}

TEST_CASE("kl divergence") {
  CHECK(kl_bernoulli(0.5, 0.5) == 0.0);
  CHECK(kl_bernoulli(0.0, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(kl_bernoulli(0.3, 0.6) == doctest::Approx(0.3 * std::log(0.5) + 0.7 * std::log(1.75)));
  CHECK(kl_bernoulli(0.3, 0.6) == doctest::Approx(0.18383).epsilon(1e-4));
  CHECK_THROWS(kl_bernoulli(0.3, 0.0));
}

TEST_CASE("binomial tail lower bound") {
  CHECK(binomial_tail_lower(4, 0.5, 0) == doctest::Approx(1 / std::sqrt(8.0) / 16));
  CHECK(binomial_tail_lower(4, 0.5, 4) <= 1.0);
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const int t = 1 + rng.index(200);
    const double th = rng.uniform(0.01, 0.99);
    const int k = rng.index(t + 1);
    CHECK(binomial_tail_lower(t, th, k) <= binom_cdf(t, th, k) + 1e-13);
  }
}

TEST_CASE("hoeffding") {
  CHECK(hoeffding_tail(2, 0.5, 1.0) == doctest::Approx(std::exp(-1.0)));
  const PoissonBinomial<double> y(vec({0.5, 0.5}));
  CHECK(hoeffding_tail(2, 0.5, 1.0) >= y.tail(1));
  CHECK(hoeffding_tail(2, 0.5, 50.0) < 1e-300);
}

TEST_CASE("separation step examples") {
  const V a = separation_step(vec({0.3, 0.5}), 0.2, 0.6);
  CHECK(a(0) == doctest::Approx(0.2));
  CHECK(a(1) == doctest::Approx(0.6));
  const V b = separation_step(vec({0.25, 0.4, 0.45}), 0.2, 0.5);
  CHECK(b(0) == doctest::Approx(0.2));
  CHECK(b(1) == doctest::Approx(0.4));
  CHECK(b(2) == doctest::Approx(0.5));
  CHECK(b.sum() == doctest::Approx(1.1));
  CHECK_THROWS(separation_step(vec({0.2, 0.5}), 0.2, 0.5));
  CHECK_THROWS(separation_step(vec({0.1, 0.3, 0.4}), 0.2, 0.5));
}

TEST_CASE("homogenisation chains") {
  CHECK(homogenize_to_uniform_chain(vec({0.3, 0.3, 0.3})).size() == 1);
  CHECK(homogenize_to_uniform_chain(vec({0.2, 0.6})).size() == 2);
  const V e = homogenize_to_extremes(vec({0.3, 0.5}), 0.2, 0.6);
  CHECK(e(0) == doctest::Approx(0.2));
  CHECK(e(1) == doctest::Approx(0.6));
  const V same = homogenize_to_extremes(vec({0.2, 0.2}), 0.2, 0.6);
  CHECK(same(0) == 0.2);

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const int t = 2 + rng.index(9);
    V theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform();
    const auto chain = homogenize_to_uniform_chain(theta);
    CHECK(static_cast<int>(chain.size()) - 1 <= t - 1);
    V end = chain.back(), want = theta;
    std::sort(end.data(), end.data() + t);
    std::sort(want.data(), want.data() + t);
    CHECK((end - want).cwiseAbs().maxCoeff() <= 1e-12);
    for (std::size_t c = 1; c < chain.size(); ++c) {
      CHECK(chain[c].sum() == doctest::Approx(theta.sum()).epsilon(1e-12));
      CHECK(compare_separated_tails(chain[c - 1], chain[c]).ok);
    }

    const double l = rng.uniform(0, 0.4), u = rng.uniform(0.6, 1);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(l, u);
    const auto ext = homogenize_to_extremes_chain(theta, l, u);
    int interior = 0;
    for (int s = 0; s < t; ++s) interior += ext.back()(s) > l && ext.back()(s) < u;
    CHECK(interior <= 1);
    for (std::size_t c = 1; c < ext.size(); ++c) CHECK(compare_separated_tails(ext[c - 1], ext[c]).ok);
  }
}

TEST_CASE("separation tails need the mode qualifier above one half") {
  // Without restricting k to the modes of the untouched parameters, a move
  // inside [l', u'] with u' > 1/2 can fatten the lower tail.
  Rng rng(11);
  int unqualified_failures = 0;
  for (int i = 0; i < 300 && unqualified_failures == 0; ++i) {
    const double l = rng.uniform(0.25, 0.45), u = rng.uniform(l + 0.01, 1.0);
    const int t = 2 + rng.index(59);
    V theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(l, u);
    const auto chain = homogenize_to_extremes_chain(theta, l, u);
    for (std::size_t c = 1; c < chain.size(); ++c) {
      const PoissonBinomial<double> a(chain[c - 1]), b(chain[c]);
      const double centre = theta.sum();
      for (int k = 0; k <= t; ++k) {
        if (k <= centre - 1 && b.cdf(k) > a.cdf(k) + 1e-13) ++unqualified_failures;
        if (k >= centre + 1 && a.cdf(k) > b.cdf(k) + 1e-13) ++unqualified_failures;
      }
      CHECK(compare_separated_tails(chain[c - 1], chain[c]).ok);
    }
  }
  CHECK(unqualified_failures > 0);
}

TEST_CASE("upper tail bound examples") {
  const auto b = pbin_tail_upper(4, 0.5, 0);
  CHECK(b.kl_form == doctest::Approx(1.0 / 16));
  CHECK(b.quadratic_form == doctest::Approx(std::exp(-1.0)));
  CHECK_FALSE(b.upper_tail);
  CHECK(pbin_tail_upper(4, 0.5, 4).upper_tail);
  CHECK_THROWS(pbin_tail_upper(4, 0.5, 2));
  CHECK_THROWS(pbin_tail_upper(4, 0.6, 0));
}

TEST_CASE("upper tail bounds hold for parameters in [1/4, 1/2]") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int t = 2 + rng.index(199);
    const double l = rng.uniform(0.25, 0.45);
    V theta(t);
    for (int s = 0; s < t; ++s) theta(s) = rng.uniform(l, 0.5);
    const PoissonBinomial<double> y(theta);
    const double bar = theta.mean();
    for (int k = 0; k <= t; ++k) {
      if (k > t * bar - 1 && k < t * bar + 1) continue;
      const auto b = pbin_tail_upper(t, bar, k);
      const double exact = b.upper_tail ? y.tail(k - 1) : y.cdf(k);
      CHECK(exact <= b.kl_form + 1e-13);
      CHECK(exact <= b.quadratic_form + 1e-13);
      if (!b.upper_tail) CHECK(b.kl_form <= b.quadratic_form + 1e-13);
    }
  }
}

TEST_CASE("quadratic upper-tail relaxation fails for small means") {
  // Bin(20, 0.1): P[Y >= 18] is about 1.6e-16, the quadratic form exp(-64) about 1.6e-28.
  const V theta = V::Constant(20, 0.1);
  const PoissonBinomial<double> y(theta);
  const auto b = pbin_tail_upper(20, 0.1, 18);
  CHECK(b.upper_tail);
  CHECK(y.tail(17) <= b.kl_form);
  CHECK(y.tail(17) > b.quadratic_form);
}

TEST_CASE("lower tail bound") {
  CHECK_THROWS(pbin_tail_lower(5, 0.3, 0.4, 1));
  CHECK_THROWS(pbin_tail_lower(20, 0.3, 0.4, 7));  // window empty for small l't
  Rng rng(6);
  V theta(200);
  for (int s = 0; s < 200; ++s) theta(s) = rng.uniform(0.3, 0.5);
  theta.array() += 0.4 - theta.mean();
  const PoissonBinomial<double> y(theta);
  CHECK(pbin_tail_lower(200, 0.3, theta.mean(), 79) <= y.cdf(79) + 1e-13);
  const int top = static_cast<int>(std::floor(200 * theta.mean() - 1));
  CHECK(pbin_tail_lower(200, 0.3, theta.mean(), top) <= y.cdf(top) + 1e-13);
}

TEST_CASE("ratio lower bound") {
  CHECK_THROWS(pbin_ratio_lower(1000, 0.3, 0.4, 400));
  Rng rng(7);
  V theta(2000);
  for (int s = 0; s < 2000; ++s) theta(s) = rng.uniform(0.3, 0.5);
  const PoissonBinomial<double> y(theta);
  const double c = theta.sum(), half = 0.3 * 2000 / 24;
  for (int k = static_cast<int>(std::ceil(c + 2 - half)); k <= c - 2 + half; ++k) {
    const double bound = pbin_ratio_lower(2000, 0.3, theta.mean(), k);
    CHECK(bound <= y.ratio(k) + 1e-13);
    CHECK(bound < 0);  // vacuous at this size
  }
}

TEST_CASE("lead pack bound") {
  CHECK(lead_pack_bound(10, 0.1, 4) == 1.0);
  const double a = lead_pack_bound(2000000, 0.25, 4), b = lead_pack_bound(4000000, 0.25, 4);
  CHECK(a > 0);
  CHECK(b < a);
}
