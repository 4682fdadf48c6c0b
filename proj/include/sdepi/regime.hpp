#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sdepi/graphcore.hpp"

namespace sdepi {

enum class Regime { FastExtinction, LongLasting, Indeterminate };
enum class ClassifyMethod { SymmetricSpectral, GeneralSpectral, ScalarD, DecoupledWeyl };

std::string_view to_string(Regime r);
std::string_view to_string(ClassifyMethod m);

struct DecoupledThresholds {
  double lower = 0.0;
  double upper = 0.0;
};

struct RegimeReport {
  Regime regime = Regime::Indeterminate;
  /// The quantity compared against delta. For DecoupledWeyl this is the
  /// upper threshold; both sides live in `detail`.
  double threshold = 0.0;
  double delta = 0.0;
  double margin = 0.0;  // delta - threshold
  ClassifyMethod method = ClassifyMethod::GeneralSpectral;
  std::optional<DecoupledThresholds> detail;
  /// False when the graph is not strongly connected; the threshold results
  /// assume strong connectivity and do not apply as stated.
  bool strongly_connected = true;
};

struct ClassifyOptions {
  /// Relative band around the threshold reported as Indeterminate.
  double boundary_tol = 1e-9;
  SpectralOptions spectral{};
};

RegimeReport classify_symmetric(double lambda_r, double beta_inf, double betaint_inf, double delta,
                                const ClassifyOptions& opts = {});

RegimeReport classify_general(const LocalityGraph& g, const DiagonalModulation& d, double beta_inf,
                              double betaint_inf, double delta, const ClassifyOptions& opts = {});

RegimeReport classify_scalar_D(const LocalityGraph& g, double eta, double beta_inf, double betaint_inf,
                               double delta, const ClassifyOptions& opts = {});

RegimeReport classify_decoupled(const LocalityGraph& g, const DiagonalModulation& d, double beta_inf,
                                double betaint_inf, double delta, const ClassifyOptions& opts = {});

/// True when G equals its transpose exactly.
bool is_symmetric(const LocalityGraph& g);

}  // namespace sdepi
