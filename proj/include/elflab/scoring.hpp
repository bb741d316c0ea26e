#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace elflab {

template <typename Scalar>
Scalar brier_loss(Scalar r, int o) {
  const Scalar d = r - Scalar(o);
  return d * d;
}

// One minus the spherical score.
template <typename Scalar>
Scalar spherical_loss(Scalar r, int o) {
  using std::sqrt;
  const Scalar p = o == 1 ? r : Scalar(1) - r;
  return Scalar(1) - p / sqrt(r * r + (Scalar(1) - r) * (Scalar(1) - r));
}

// Log loss on [delta, 1 - delta]; outside that band the Bayes risk is continued
// by its second-order Taylor polynomial, which keeps the loss bounded and
// strictly proper. Affinely rescaled onto [0, 1].
template <typename Scalar>
Scalar scaled_log_loss(Scalar r, int o) {
  using std::log;
  const Scalar delta(0.01);
  const auto entropy = [](Scalar p) { return -p * log(p) - (1 - p) * log(1 - p); };
  const Scalar h_d = entropy(delta);
  const Scalar dh_d = log((1 - delta) / delta);
  const Scalar d2h_d = -1 / (delta * (1 - delta));
  // Extended risk and slope at p <= delta; the upper band mirrors it.
  const auto low = [&](Scalar p, Scalar& h, Scalar& dh) {
    const Scalar x = p - delta;
    h = h_d + dh_d * x + d2h_d * x * x / 2;
    dh = dh_d + d2h_d * x;
  };
  Scalar h0, dh0;
  low(Scalar(0), h0, dh0);
  const Scalar lo = h0;         // loss at r = o
  const Scalar hi = h0 + dh0;   // loss at r = 1 - o
  const Scalar p = o == 1 ? r : 1 - r;  // probability put on the realized outcome
  Scalar raw;
  if (p < delta) {
    Scalar h, dh;
    low(p, h, dh);
    raw = h + dh * (1 - p);
  } else if (p > 1 - delta) {
    Scalar h, dh;
    low(1 - p, h, dh);
    raw = h - dh * (1 - p);
  } else {
    raw = -log(p);
  }
  return (raw - lo) / (hi - lo);
}

class LossFn {
 public:
  using Eval = std::function<double(double, int)>;

  static LossFn brier() { return {"brier", brier_loss<double>}; }
  static LossFn spherical() { return {"spherical", spherical_loss<double>}; }
  static LossFn scaled_log() { return {"scaled-log", scaled_log_loss<double>}; }
  static LossFn custom(std::string name, Eval eval) { return {std::move(name), std::move(eval)}; }
  static LossFn from_name(std::string_view name);

  double operator()(double r, int o) const { return eval_(r, o); }
  const std::string& name() const { return name_; }

 private:
  LossFn(std::string name, Eval eval) : name_(std::move(name)), eval_(std::move(eval)) {}

  std::string name_;
  Eval eval_;
};

inline double expected_loss(double r, double b, const LossFn& loss) {
  return b * loss(r, 1) + (1 - b) * loss(r, 0);
}

struct ProperCheck {
  bool strict = false;
  double min_gap = 0;   // min over beliefs b and reports r != b of E_b[l(r)] - E_b[l(b)]
  double belief = 0;    // where min_gap is attained
  double report = 0;
};

ProperCheck verify_strict_properness(const LossFn& loss, int grid_size);

struct ElfParams {
  double a1 = 0.5;
  double a2 = 0.25;
  double rho = 0.0;
  double epsilon = 1.0;
  double beta = 1.0;  // multiplier applied to losses before the lottery

  void validate() const;
};

// (eps/N)(1/2 + loss/4)
double woe_probability(double loss, int n_experts, double epsilon = 1.0);

// Entry 0 is the dummy expert, entries 1..N the experts.
Eigen::VectorXd general_elf_winner_distribution(const Eigen::Ref<const Eigen::VectorXd>& losses,
                                                const ElfParams& params);

double ielf_point_probability(const Eigen::Ref<const Eigen::VectorXd>& losses, int expert);
double elfx_point_probability(const Eigen::Ref<const Eigen::VectorXd>& losses, int expert);

}  // namespace elflab
