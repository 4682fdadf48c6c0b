#pragma once

#include <vector>

#include "sdepi/ssa.hpp"

namespace sdepi::detail {

// Gillespie engine with cached pressures P_u = sum_v G_uv X_v. Birth rates
// are beta(n) P_u + beta_int(n) D_u X_u, so a change at v only touches the
// rows listed in column v, plus the two running sums.
class Simulator {
 public:
  Simulator(const SimConfig& cfg, const LocalityGraph& g);
  Trajectory run(std::uint64_t run_index) const;

 private:
  struct Column {
    std::vector<std::uint32_t> rows;
    std::vector<double> weights;
    double sum = 0.0;
  };

  void resync(const std::vector<std::uint64_t>& x, std::vector<double>& p, double& sum_p, double& sum_dx) const;

  const SimConfig& cfg_;
  const LocalityGraph& g_;
  TimeGrid grid_;
  std::vector<Column> columns_;
};

}  // namespace sdepi::detail
