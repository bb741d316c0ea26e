#include "elflab/scoring.hpp"

#include <cmath>
#include <limits>

namespace elflab {

LossFn LossFn::from_name(std::string_view name) {
  if (name == "brier") return brier();
  if (name == "spherical") return spherical();
  if (name == "scaled-log" || name == "scaled_log") return scaled_log();
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

ProperCheck verify_strict_properness(const LossFn& loss, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid needs at least two points");
  ProperCheck out;
  out.min_gap = std::numeric_limits<double>::infinity();
  const double step = 1.0 / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) {
    const double b = i * step;
    const double truthful = expected_loss(b, b, loss);
    for (int j = 0; j < grid_size; ++j) {
      if (j == i) continue;
      const double r = j * step;
      const double gap = expected_loss(r, b, loss) - truthful;
      if (gap < out.min_gap) {
        out.min_gap = gap;
        out.belief = b;
        out.report = r;
      }
    }
  }
  out.strict = out.min_gap > 0;
  return out;
}

void ElfParams::validate() const {
  const bool ok = a1 >= 0 && a1 <= 1 && a2 > 0 && a2 <= 1 &&
                  rho >= 1 - (1 - a1) / a2 - 1e-12 && rho <= a1 / a2 + 1e-12 &&
                  epsilon >= 0 && epsilon <= 1 && beta > 0 && beta <= 1;
  if (!ok) throw std::invalid_argument("lottery parameters outside the admissible range");
}

double woe_probability(double loss, int n_experts, double epsilon) {
  if (!(loss >= 0 && loss <= 1)) throw std::domain_error("loss outside [0,1]");
  if (n_experts < 2) throw std::invalid_argument("need at least two experts");
  if (!(epsilon >= 0 && epsilon <= 1)) throw std::domain_error("epsilon outside [0,1]");
  return epsilon / n_experts * (0.5 + loss / 4);
}

namespace {

void check_losses(const Eigen::Ref<const Eigen::VectorXd>& losses) {
  if (losses.size() < 2) throw std::invalid_argument("need at least two experts");
  if ((losses.array() < 0).any() || (losses.array() > 1).any())
    throw std::domain_error("loss outside [0,1]");
}

}  // namespace

Eigen::VectorXd general_elf_winner_distribution(const Eigen::Ref<const Eigen::VectorXd>& losses,
                                                const ElfParams& params) {
  params.validate();
  check_losses(losses);
  const auto n = losses.size();
  const Eigen::VectorXd l = params.beta * losses;
  const double total = l.sum();
  Eigen::VectorXd out(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double others = total - l(i);
    out(i + 1) = (params.a1 + params.a2 * l(i) - params.a2 * params.rho / (n - 1) * others) / n;
  }
  out(0) = 1 - params.a1 - params.a2 * (1 - params.rho) / n * total;
  // Boundary parameters can produce -0 or -1e-17; anything worse is a bug upstream.
  for (Eigen::Index i = 0; i <= n; ++i) {
    if (out(i) < -1e-12) throw std::logic_error("negative lottery probability");
    out(i) = std::max(out(i), 0.0);
  }
  return out;
}

double ielf_point_probability(const Eigen::Ref<const Eigen::VectorXd>& losses, int expert) {
  check_losses(losses);
  const auto n = static_cast<double>(losses.size());
  const double others = losses.sum() - losses(expert);
  return (1 - losses(expert) + others / (n - 1)) / n;
}

double elfx_point_probability(const Eigen::Ref<const Eigen::VectorXd>& losses, int expert) {
  check_losses(losses);
  const auto n = static_cast<double>(losses.size());
  return (1 - losses(expert) + losses.sum() / n) / n;
}

}  // namespace elflab
