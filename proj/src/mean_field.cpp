#include <algorithm>
#include <cmath>

#include "sdepi/errors.hpp"
#include "sdepi/ssa.hpp"

namespace sdepi {

std::vector<Vector> mean_field_trajectory(const LocalityGraph& g, double beta, double beta_int, double delta,
                                          const Vector& x0, const TimeGrid& grid,
                                          const std::optional<DiagonalModulation>& D) {
  const auto n = g.node_count();
  if (static_cast<std::size_t>(x0.size()) != n) throw ValidationError("initial vector length differs from node count");
  if (D && D->size() != n) throw ValidationError("D length differs from node count");
  if (beta < 0.0 || beta_int < 0.0 || !(delta > 0.0)) throw ValidationError("rates must be >= 0 and delta > 0");

  SparseMatrix a = beta * g.weights();
  for (std::size_t u = 0; u < n; ++u) {
    const double d = D ? (*D)[u] : 1.0;
    a.coeffRef(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u)) += beta_int * d - delta;
  }
  a.makeCompressed();
  double norm = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    norm = std::max(norm, s);
  }

  std::vector<Vector> out;
  out.reserve(grid.size());
  Vector x = x0;
  out.push_back(x);
  // Substeps keep h ||A||_inf <= 0.01, well inside RK4's stable region.
  const auto substeps =
      static_cast<std::size_t>(std::max(1.0, std::ceil(grid.step * norm / 0.01)));
  const double h = grid.step / static_cast<double>(substeps);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    for (std::size_t s = 0; s < substeps; ++s) {
      const Vector k1 = a * x;
      const Vector k2 = a * (x + 0.5 * h * k1);
      const Vector k3 = a * (x + 0.5 * h * k2);
      const Vector k4 = a * (x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Vector> mean_field_trajectory(const LocalityGraph& g, const RateProfile& beta,
                                          const RateProfile& beta_int, double delta, const Vector& x0,
                                          const TimeGrid& grid, const std::optional<DiagonalModulation>& D) {
  if (!beta.is_constant() || !beta_int.is_constant())
    throw ValidationError("the mean-field equation is linear only for constant profiles");
  return mean_field_trajectory(g, beta.limit_at_infinity(), beta_int.limit_at_infinity(), delta, x0, grid, D);
}

}  // namespace sdepi
