#include "sdepi/regime.hpp"

#include <algorithm>
#include <cmath>

#include "sdepi/errors.hpp"

namespace sdepi {

namespace {

void check_inputs(double beta_inf, double betaint_inf, double delta) {
  if (!(beta_inf >= 0.0) || !(betaint_inf >= 0.0))
    throw ValidationError("infectiousness limits must be >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("curing rate delta must be > 0");
}

bool on_boundary(double delta, double threshold, double tol) {
  return std::abs(delta - threshold) <= tol * std::max(std::abs(delta), std::abs(threshold));
}

RegimeReport compare(double threshold, double delta, ClassifyMethod method, const ClassifyOptions& opts) {
  RegimeReport r;
  r.threshold = threshold;
  r.delta = delta;
  r.margin = delta - threshold;
  r.method = method;
  if (on_boundary(delta, threshold, opts.boundary_tol))
    r.regime = Regime::Indeterminate;
  else
    r.regime = delta > threshold ? Regime::FastExtinction : Regime::LongLasting;
  return r;
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::FastExtinction: return "FastExtinction";
    case Regime::LongLasting: return "LongLasting";
    case Regime::Indeterminate: return "Indeterminate";
  }
  return "?";
}

std::string_view to_string(ClassifyMethod m) {
  switch (m) {
    case ClassifyMethod::SymmetricSpectral: return "SymmetricSpectral";
    case ClassifyMethod::GeneralSpectral: return "GeneralSpectral";
    case ClassifyMethod::ScalarD: return "ScalarD";
    case ClassifyMethod::DecoupledWeyl: return "DecoupledWeyl";
  }
  return "?";
}

bool is_symmetric(const LocalityGraph& g) {
  SparseMatrix t = g.weights().transpose();
  return (g.weights() - t).norm() == 0.0;
}

RegimeReport classify_symmetric(double lambda_r, double beta_inf, double betaint_inf, double delta,
                                const ClassifyOptions& opts) {
  check_inputs(beta_inf, betaint_inf, delta);
  if (!(lambda_r >= 0.0)) throw ValidationError("spectral radius must be >= 0");
  return compare(beta_inf * lambda_r + betaint_inf, delta, ClassifyMethod::SymmetricSpectral, opts);
}

RegimeReport classify_general(const LocalityGraph& g, const DiagonalModulation& d, double beta_inf,
                              double betaint_inf, double delta, const ClassifyOptions& opts) {
  check_inputs(beta_inf, betaint_inf, delta);
  const auto info = spectral_radius(effective_matrix(g, d, beta_inf, betaint_inf), opts.spectral);
  auto r = compare(info.radius, delta, ClassifyMethod::GeneralSpectral, opts);
  r.strongly_connected = is_strongly_connected(g);
  return r;
}

RegimeReport classify_scalar_D(const LocalityGraph& g, double eta, double beta_inf, double betaint_inf,
                               double delta, const ClassifyOptions& opts) {
  check_inputs(beta_inf, betaint_inf, delta);
  if (!(eta > 0.0)) throw ValidationError("eta must be > 0");
  const auto info = spectral_radius(g.weights(), opts.spectral);
  auto r = compare(beta_inf * info.radius + betaint_inf * eta, delta, ClassifyMethod::ScalarD, opts);
  r.strongly_connected = is_strongly_connected(g);
  return r;
}

RegimeReport classify_decoupled(const LocalityGraph& g, const DiagonalModulation& d, double beta_inf,
                                double betaint_inf, double delta, const ClassifyOptions& opts) {
  check_inputs(beta_inf, betaint_inf, delta);
  if (d.size() != g.node_count()) throw ValidationError("classify_decoupled: D has wrong dimension");
  const double rho_upper = spectral_radius(symmetrized_upper(g), opts.spectral).radius;
  const double rho_lower = spectral_radius(geometric_lower(g), opts.spectral).radius;
  DecoupledThresholds th{beta_inf * rho_lower + betaint_inf * d.min(),
                         beta_inf * rho_upper + betaint_inf * d.max()};

  RegimeReport r;
  r.method = ClassifyMethod::DecoupledWeyl;
  r.delta = delta;
  r.threshold = th.upper;
  r.margin = delta - th.upper;
  r.detail = th;
  r.strongly_connected = is_strongly_connected(g);
  if (delta > th.upper && !on_boundary(delta, th.upper, opts.boundary_tol))
    r.regime = Regime::FastExtinction;
  else if (delta < th.lower && !on_boundary(delta, th.lower, opts.boundary_tol))
    r.regime = Regime::LongLasting;
  else
    r.regime = Regime::Indeterminate;
  return r;
}

}  // namespace sdepi
