#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sdepi {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Node count above which spectral work stays in sparse form.
inline constexpr std::size_t kDenseNodeLimit = 2048;

/// Weighted directed graph over localities.
///
/// Entry (u, v) of the weight matrix is the multiplier applied to the
/// infection pressure that locality v exerts on locality u: row u lists
/// what u receives. The diagonal is always zero; intra-locality growth
/// is modelled separately through DiagonalModulation.
class LocalityGraph {
 public:
  LocalityGraph(std::vector<std::string> labels, SparseMatrix weights);

  static LocalityGraph from_dense(std::vector<std::string> labels, const Matrix& weights);
  /// Labels "0", "1", ... for fixtures and tests.
  static LocalityGraph from_dense(const Matrix& weights);

  std::size_t node_count() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const SparseMatrix& weights() const noexcept { return weights_; }
  Matrix dense() const { return Matrix(weights_); }
  double weight(std::size_t u, std::size_t v) const { return weights_.coeff(u, v); }
  std::optional<std::size_t> index_of(const std::string& label) const;

  /// Induced subgraph on `nodes`, in the given order.
  LocalityGraph subgraph(std::span<const std::size_t> nodes) const;

 private:
  std::vector<std::string> labels_;
  SparseMatrix weights_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Per-locality intra-locality growth multipliers D_u > 0.
class DiagonalModulation {
 public:
  explicit DiagonalModulation(std::vector<double> values);
  static DiagonalModulation scalar(std::size_t n, double eta);
  static DiagonalModulation identity(std::size_t n) { return scalar(n, 1.0); }

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t u) const { return values_[u]; }
  double min() const;
  double max() const;
  bool is_scalar() const;

 private:
  std::vector<double> values_;
};

struct SpectralOptions {
  /// Bound on ||M q - rho q||_inf / ||M||_inf with sum(q) = 1.
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

struct SpectralInfo {
  double radius = 0.0;
  Vector eigvec;  // sums to 1
  double q_min = 0.0;
  double q_max = 0.0;
  /// Final ||M q - rho q||_inf, relative to the max absolute row sum of M.
  double residual = 0.0;
  std::size_t iterations = 0;
};

struct DegreeExtremes {
  double d_max = 0.0;
  double d_min = 0.0;
};

/// Parses "src dst weight" lines; '#' starts a comment. Labels are
/// numbered in order of first appearance.
LocalityGraph load_edge_list(std::istream& in);
LocalityGraph load_edge_list_file(const std::filesystem::path& path);

/// Divides every weight by the mean column sum (total weight / n).
LocalityGraph normalize_mean_column_weight(const LocalityGraph& g);

bool is_strongly_connected(const LocalityGraph& g);
bool is_strongly_connected(const SparseMatrix& m);

/// Perron root of a nonnegative square matrix by shifted power iteration.
SpectralInfo spectral_radius(const Matrix& m, const SpectralOptions& opts = {});
SpectralInfo spectral_radius(const SparseMatrix& m, const SpectralOptions& opts = {});

/// Row-sum extremes: d_max = max_u sum_v G_uv, d_min = min_u sum_v G_uv.
DegreeExtremes weighted_degrees(const LocalityGraph& g);

/// (G + G^T) / 2
SparseMatrix symmetrized_upper(const LocalityGraph& g);
/// sqrt(G (.) G^T), elementwise
SparseMatrix geometric_lower(const LocalityGraph& g);

/// beta_inf * G + betaint_inf * D
SparseMatrix effective_matrix(const LocalityGraph& g, const DiagonalModulation& d,
                              double beta_inf, double betaint_inf);

/// Indices of the k nodes with the largest total (in + out) weight,
/// ties broken by first appearance.
std::vector<std::size_t> top_nodes_by_weight(const LocalityGraph& g, std::size_t k);

}  // namespace sdepi
