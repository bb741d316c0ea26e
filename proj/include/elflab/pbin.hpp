#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <iterator>
#include <tuple>
#include <stdexcept>
#include <utility>
#include <vector>

namespace elflab {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Exact pmf of a sum of independent Bernoulli(theta_s), by iterated convolution.
template <typename Scalar>
Vec<Scalar> pbin_pmf(const Vec<Scalar>& theta) {
  if (theta.size() == 0) throw std::invalid_argument("empty parameter vector");
  if ((theta.array() < 0).any() || (theta.array() > 1).any())
    throw std::domain_error("success probability outside [0,1]");
  const Eigen::Index t = theta.size();
  Vec<Scalar> p = Vec<Scalar>::Zero(t + 1);
  p(0) = 1;
  for (Eigen::Index s = 0; s < t; ++s) {
    const Scalar on = theta(s);
    const Scalar off = Scalar(1) - on;
    for (Eigen::Index k = s + 1; k > 0; --k) p(k) = p(k) * off + p(k - 1) * on;
    p(0) *= off;
  }
  return p;
}

template <typename Scalar>
class PoissonBinomial {
 public:
  explicit PoissonBinomial(Vec<Scalar> theta)
      : theta_(std::move(theta)), pmf_(pbin_pmf(theta_)), below_(pmf_.size()), above_(pmf_.size()) {
    Scalar acc = 0;
    for (Eigen::Index k = 0; k < pmf_.size(); ++k) below_(k) = acc += pmf_(k);
    acc = 0;
    for (Eigen::Index k = pmf_.size() - 1; k >= 0; --k) {
      above_(k) = acc;
      acc += pmf_(k);
    }
  }

  int trials() const { return static_cast<int>(theta_.size()); }
  const Vec<Scalar>& theta() const { return theta_; }
  const Vec<Scalar>& pmf() const { return pmf_; }
  Scalar pmf(int k) const { return k < 0 || k > trials() ? Scalar(0) : pmf_(k); }
  Scalar mean() const { return theta_.mean(); }

  // P[Y <= k]; k = -1 gives 0.
  Scalar cdf(int k) const {
    if (k < 0) return 0;
    return below_(std::min(k, trials()));
  }
  // P[Y > k], summed directly so small upper tails keep their precision.
  Scalar tail(int k) const {
    if (k >= trials()) return 0;
    if (k < 0) return below_(trials());
    return above_(k);
  }

  // p(k-1) / p(k)
  Scalar ratio(int k) const {
    if (k < 0 || k > trials()) throw std::out_of_range("ratio index outside [0,t]");
    if (!(pmf_(k) > 0)) throw std::domain_error("ratio with zero denominator");
    return pmf(k - 1) / pmf_(k);
  }

  // Left and right mode; equal unless the two largest masses tie (relative 1e-12).
  std::pair<int, int> modes() const {
    Eigen::Index m = 0;
    pmf_.maxCoeff(&m);
    // maxCoeff returns the first maximum; look one step right for a tie.
    const int left = static_cast<int>(m);
    if (left < trials() && pmf_(left + 1) >= pmf_(left) * (1 - Scalar(1e-12))) return {left, left + 1};
    if (left > 0 && pmf_(left - 1) >= pmf_(left) * (1 - Scalar(1e-12))) return {left - 1, left};
    return {left, left};
  }

 private:
  Vec<Scalar> theta_;
  Vec<Scalar> pmf_;
  Vec<Scalar> below_;
  Vec<Scalar> above_;
};

template <typename Scalar>
Scalar kl_bernoulli(Scalar p, Scalar q) {
  using std::log;
  if (!(q > 0 && q < 1)) throw std::domain_error("kl reference probability must lie in (0,1)");
  if (!(p >= 0 && p <= 1)) throw std::domain_error("kl probability outside [0,1]");
  Scalar d = 0;
  if (p > 0) d += p * log(p / q);
  if (p < 1) d += (1 - p) * log((1 - p) / (1 - q));
  return std::max(d, Scalar(0));
}

// Lower bound on P[Bin(t, theta) <= k].
template <typename Scalar>
Scalar binomial_tail_lower(int t, Scalar theta, int k) {
  using std::exp;
  using std::sqrt;
  if (t < 1 || k < 0 || k > t) throw std::domain_error("need 0 <= k <= t, t >= 1");
  return exp(-Scalar(t) * kl_bernoulli(Scalar(k) / t, theta)) / sqrt(Scalar(2 * t));
}

template <typename Scalar>
Scalar hoeffding_tail(int t, Scalar /*theta_bar*/, Scalar k) {
  using std::exp;
  if (!(k > 0) || t < 1) throw std::domain_error("hoeffding bound needs k > 0");
  return exp(-2 * k * k / Scalar(t));
}

template <typename Scalar>
struct TailUpper {
  Scalar kl_form;
  Scalar quadratic_form;
  bool upper_tail;  // bounds P[Y >= k] rather than P[Y <= k]
};

// Chernoff-type bounds for a Poisson binomial with mean parameter theta_bar <= 1/2.
template <typename Scalar>
TailUpper<Scalar> pbin_tail_upper(int t, Scalar theta_bar, int k) {
  using std::exp;
  if (!(theta_bar > 0 && theta_bar <= Scalar(0.5) + Scalar(1e-12)))
    throw std::domain_error("mean parameter must lie in (0, 1/2]");
  const Scalar centre = t * theta_bar;
  const Scalar tol(1e-9);
  bool upper;
  if (k >= 0 && k <= centre - 1 + tol) {
    upper = false;
  } else if (k <= t && k >= centre + 1 - tol) {
    upper = true;
  } else {
    throw std::domain_error("k outside the tail windows");
  }
  const Scalar x = Scalar(k) / t;
  return {exp(-Scalar(t) * kl_bernoulli(x, theta_bar)),
          exp(-Scalar(t) / (2 * theta_bar) * (x - theta_bar) * (x - theta_bar)), upper};
}

// Lower bound on P[Y <= k] when every theta_s lies in [l_prime, 1/2].
template <typename Scalar>
Scalar pbin_tail_lower(int t, Scalar l_prime, Scalar theta_bar, int k) {
  using std::exp;
  using std::sqrt;
  if (t < 6) throw std::domain_error("needs t >= 6");
  if (!(l_prime > 0 && l_prime <= theta_bar + Scalar(1e-12) && theta_bar <= Scalar(0.5) + Scalar(1e-12)))
    throw std::domain_error("need 0 < l' <= mean <= 1/2");
  const Scalar centre = t * theta_bar;
  const Scalar tol(1e-9);
  if (!(k >= centre + 1 - l_prime * t / 8 - tol && k <= centre - 1 + tol))
    throw std::domain_error("k outside the lower-tail window");
  const Scalar gap = theta_bar - Scalar(k - 1) / t;
  return exp(-36 * Scalar(t) / l_prime * gap * gap) / sqrt(Scalar(2 * t));
}

template <typename Scalar>
Scalar pbin_ratio_lower(int t, Scalar l_prime, Scalar theta_bar, int k, Scalar c1 = 362,
                        Scalar c2 = 864) {
  using std::abs;
  using std::log;
  using std::sqrt;
  if (!(l_prime > 0 && l_prime <= Scalar(0.5))) throw std::domain_error("need 0 < l' <= 1/2");
  if (Scalar(t) < 576 / l_prime) throw std::domain_error("needs t >= 576 / l'");
  const Scalar centre = t * theta_bar;
  const Scalar half = l_prime * t / 24;
  const Scalar tol(1e-9);
  if (!(k >= centre + 2 - half - tol && k <= centre - 2 + half + tol))
    throw std::domain_error("k outside the ratio window");
  const Scalar lt = l_prime * t;
  return 1 - c1 * log(Scalar(t)) / sqrt(lt) - c2 * abs(k - centre) / lt;
}

template <typename Scalar>
Scalar lead_pack_bound(int t, Scalar l_poi, int n_experts, Scalar c1 = 362, Scalar c2 = 864) {
  using std::log;
  using std::sqrt;
  const Scalar lt = l_poi * t;
  if (t < 2 || !(24 + sqrt(8 * lt * log(n_experts * Scalar(t) / l_poi)) < lt / 24)) return 1;
  return c1 * log(Scalar(t)) / sqrt(lt) + c2 * sqrt(Scalar(t) * log(Scalar(n_experts))) / lt;
}

namespace detail {

template <typename Scalar>
bool inside(Scalar x, Scalar lo, Scalar hi) {
  return x > lo && x < hi;
}

// One separation move on the positions listed in `idx`, which must be sorted by value.
template <typename Scalar>
std::pair<Eigen::Index, Eigen::Index> separate(Vec<Scalar>& theta, const std::vector<Eigen::Index>& idx,
                                               Scalar l, Scalar u) {
  Eigen::Index down = -1;
  Eigen::Index up = -1;
  for (auto i : idx)
    if (theta(i) > l) {
      down = i;
      break;
    }
  for (auto it = idx.rbegin(); it != idx.rend(); ++it)
    if (theta(*it) < u) {
      up = *it;
      break;
    }
  const Scalar total = theta(down) + theta(up);
  if (theta(down) - l >= u - theta(up)) {
    theta(down) = total - u;
    theta(up) = u;
  } else {
    theta(down) = l;
    theta(up) = total - l;
  }
  return {down, up};
}

}  // namespace detail

// Moves two parameters apart by equal amounts until one reaches l' or u'.
template <typename Scalar>
Vec<Scalar> separation_step(const Vec<Scalar>& theta, Scalar l_prime, Scalar u_prime) {
  if (!(l_prime < u_prime)) throw std::invalid_argument("need l' < u'");
  Vec<Scalar> out = theta;
  std::sort(out.data(), out.data() + out.size());
  const Scalar tol(1e-12);
  if (out.size() == 0 || out(0) < l_prime - tol || out(out.size() - 1) > u_prime + tol)
    throw std::invalid_argument("entries outside [l', u']");
  int interior = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) interior += detail::inside(out(i), l_prime, u_prime);
  if (interior < 2) throw std::invalid_argument("fewer than two interior entries");
  std::vector<Eigen::Index> idx(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) idx[i] = i;
  detail::separate(out, idx, l_prime, u_prime);
  return out;
}

// Chain of separation moves from the constant vector (mean, ..., mean) to a
// permutation of theta. Each move uses the extreme remaining targets as bounds.
template <typename Scalar>
std::vector<Vec<Scalar>> homogenize_to_uniform_chain(const Vec<Scalar>& theta) {
  if (theta.size() == 0) throw std::invalid_argument("empty parameter vector");
  std::vector<Scalar> targets(theta.data(), theta.data() + theta.size());
  std::sort(targets.begin(), targets.end());
  const Eigen::Index t = theta.size();
  Vec<Scalar> cur = Vec<Scalar>::Constant(t, theta.mean());
  std::vector<bool> fixed(t, false);
  std::vector<Vec<Scalar>> chain{cur};
  const Scalar tol(1e-12);

  while (targets.size() >= 2) {
    const Scalar l = targets.front();
    const Scalar u = targets.back();
    std::vector<Eigen::Index> open;
    for (Eigen::Index i = 0; i < t; ++i)
      if (!fixed[i]) open.push_back(i);
    std::sort(open.begin(), open.end(), [&](auto a, auto b) { return cur(a) < cur(b); });
    int interior = 0;
    for (auto i : open) {
      if (cur(i) < l - tol || cur(i) > u + tol) throw std::logic_error("chain left the target hull");
      interior += detail::inside(cur(i), l + tol, u - tol);
    }
    if (interior < 2) break;
    auto [down, up] = detail::separate(cur, open, l, u);
    bool moved = false;
    for (auto i : {down, up}) {
      if (std::abs(cur(i) - targets.front()) <= tol && targets.size() > 0) {
        cur(i) = targets.front();
        targets.erase(targets.begin());
        fixed[i] = moved = true;
      } else if (!targets.empty() && std::abs(cur(i) - targets.back()) <= tol) {
        cur(i) = targets.back();
        targets.pop_back();
        fixed[i] = moved = true;
      }
    }
    if (!moved) throw std::logic_error("separation move placed no entry");
    chain.push_back(cur);
  }
  return chain;
}

// Separation moves inside [l', u'] until at most one entry is interior.
template <typename Scalar>
std::vector<Vec<Scalar>> homogenize_to_extremes_chain(const Vec<Scalar>& theta, Scalar l_prime,
                                                      Scalar u_prime) {
  Vec<Scalar> cur = theta;
  std::sort(cur.data(), cur.data() + cur.size());
  std::vector<Vec<Scalar>> chain{cur};
  for (;;) {
    int interior = 0;
    for (Eigen::Index i = 0; i < cur.size(); ++i) interior += detail::inside(cur(i), l_prime, u_prime);
    if (interior < 2) break;
    cur = separation_step(cur, l_prime, u_prime);
    chain.push_back(cur);
  }
  return chain;
}

template <typename Scalar>
Vec<Scalar> homogenize_to_extremes(const Vec<Scalar>& theta, Scalar l_prime, Scalar u_prime) {
  return homogenize_to_extremes_chain(theta, l_prime, u_prime).back();
}

struct TailComparison {
  bool ok = true;
  int worst_k = -1;
  double worst_excess = 0;  // largest violation beyond slack, 0 if none
  int mode_left = 0;        // modes of the parameters the move left untouched
  int mode_right = 0;
};

// After a separation move (before -> after, same sum), the CDF must not
// increase at k <= min(t mean - 1, m_L) and must not decrease at
// k >= max(t mean + 1, m_R), where m_L, m_R are the modes of the untouched
// parameters.
template <typename Scalar>
TailComparison compare_separated_tails(const Vec<Scalar>& before, const Vec<Scalar>& after,
                                       Scalar slack = Scalar(1e-13)) {
  if (before.size() != after.size() || before.size() < 2) throw std::invalid_argument("size mismatch");
  const PoissonBinomial<Scalar> a(before), b(after);
  const int t = a.trials();
  const Scalar centre = before.sum();
  TailComparison out;

  std::vector<Scalar> x(before.data(), before.data() + t), y(after.data(), after.data() + t), rest;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(rest));
  out.mode_left = 0;
  out.mode_right = t;
  if (!rest.empty()) {
    const PoissonBinomial<Scalar> r(Eigen::Map<const Vec<Scalar>>(rest.data(), rest.size()));
    std::tie(out.mode_left, out.mode_right) = r.modes();
  }
  for (int k = 0; k <= t; ++k) {
    Scalar excess = 0;
    if (k <= centre - 1 && k <= out.mode_left) excess = b.cdf(k) - a.cdf(k) - slack;
    else if (k >= centre + 1 && k >= out.mode_right) excess = a.cdf(k) - b.cdf(k) - slack;
    if (excess > 0 && static_cast<double>(excess) > out.worst_excess) {
      out.ok = false;
      out.worst_excess = static_cast<double>(excess);
      out.worst_k = k;
    }
  }
  return out;
}

}  // namespace elflab
