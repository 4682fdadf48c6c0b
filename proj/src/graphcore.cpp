#include "sdepi/graphcore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "sdepi/errors.hpp"

namespace sdepi {

namespace {

void check_weights(const SparseMatrix& w) {
  for (Eigen::Index r = 0; r < w.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) {
      if (!std::isfinite(it.value()) || it.value() < 0.0) {
        throw ValidationError("weights must be finite and nonnegative (entry " +
                              std::to_string(it.row()) + "," + std::to_string(it.col()) + ")");
      }
      if (it.row() == it.col() && it.value() != 0.0) {
        throw ValidationError("self-loop on node " + std::to_string(it.row()) +
                              ": intra-locality growth belongs to D, not G");
      }
    }
  }
}

SparseMatrix to_sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView();
  s.makeCompressed();
  return s;
}

template <class Mat>
double max_abs_row_sum(const Mat& m) {
  double best = 0.0;
  if constexpr (std::is_same_v<Mat, Matrix>) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) best = std::max(best, m.row(r).cwiseAbs().sum());
  } else {
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      double s = 0.0;
      for (typename Mat::InnerIterator it(m, r); it; ++it) s += std::abs(it.value());
      best = std::max(best, s);
    }
  }
  return best;
}

template <class Mat>
void check_spectral_input(const Mat& m) {
  if (m.rows() != m.cols()) throw ValidationError("spectral_radius: matrix is not square");
  if (m.rows() == 0) throw ValidationError("spectral_radius: empty matrix");
  if constexpr (std::is_same_v<Mat, Matrix>) {
    if (!m.allFinite() || (m.array() < 0.0).any())
      throw ValidationError("spectral_radius: entries must be finite and nonnegative");
  } else {
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (typename Mat::InnerIterator it(m, r); it; ++it)
        if (!std::isfinite(it.value()) || it.value() < 0.0)
          throw ValidationError("spectral_radius: entries must be finite and nonnegative");
  }
}

// Iterates q <- (A q + c q) / sum(...) on A = M / s, where s is the max row
// sum, so the Perron root of A lies in [0, 1]. The shift c makes the
// Perron root strictly dominant even for periodic (e.g. bipartite) graphs.
template <class Mat>
SpectralInfo power_iterate(const Mat& m, const SpectralOptions& opts) {
  check_spectral_input(m);
  const auto n = m.rows();
  SpectralInfo info;
  const double scale = max_abs_row_sum(m);
  Vector q = Vector::Constant(n, 1.0 / static_cast<double>(n));
  if (scale == 0.0) {
    info.eigvec = q;
    info.q_min = info.q_max = q[0];
    return info;
  }
  constexpr double shift = 0.5;
  double rho = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    Vector aq = (m * q) / scale;
    rho = aq.sum();
    residual = (aq - rho * q).cwiseAbs().maxCoeff();
    if (residual <= opts.tolerance) break;
    q = (aq + shift * q) / (rho + shift);
    q /= q.sum();
  }
  if (residual > opts.tolerance) {
    throw ConvergenceError("spectral_radius: no convergence after " +
                               std::to_string(opts.max_iterations) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);
  }
  info.radius = rho * scale;
  info.eigvec = std::move(q);
  info.q_min = info.eigvec.minCoeff();
  info.q_max = info.eigvec.maxCoeff();
  info.residual = residual;
  info.iterations = it;
  return info;
}

std::vector<bool> reach(const SparseMatrix& adj, std::size_t start) {
  std::vector<bool> seen(static_cast<std::size_t>(adj.rows()), false);
  std::vector<std::size_t> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (SparseMatrix::InnerIterator it(adj, static_cast<Eigen::Index>(u)); it; ++it) {
      const auto v = static_cast<std::size_t>(it.col());
      if (it.value() > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

LocalityGraph::LocalityGraph(std::vector<std::string> labels, SparseMatrix weights)
    : labels_(std::move(labels)), weights_(std::move(weights)) {
  if (labels_.empty()) throw ValidationError("graph must have at least one node");
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (weights_.rows() != n || weights_.cols() != n)
    throw ValidationError("weight matrix dimensions do not match label count");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second)
      throw ValidationError("duplicate node label '" + labels_[i] + "'");
  }
  check_weights(weights_);
  weights_.prune(0.0);
  weights_.makeCompressed();
}

LocalityGraph LocalityGraph::from_dense(std::vector<std::string> labels, const Matrix& weights) {
  return LocalityGraph(std::move(labels), to_sparse(weights));
}

LocalityGraph LocalityGraph::from_dense(const Matrix& weights) {
  std::vector<std::string> labels(static_cast<std::size_t>(weights.rows()));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = std::to_string(i);
  return from_dense(std::move(labels), weights);
}

std::optional<std::size_t> LocalityGraph::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LocalityGraph LocalityGraph::subgraph(std::span<const std::size_t> nodes) const {
  std::vector<std::string> labels;
  std::vector<Eigen::Index> remap(node_count(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= node_count()) throw ValidationError("subgraph: node index out of range");
    remap[nodes[i]] = static_cast<Eigen::Index>(i);
    labels.push_back(labels_[nodes[i]]);
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (SparseMatrix::InnerIterator it(weights_, static_cast<Eigen::Index>(nodes[i])); it; ++it) {
      const auto j = remap[static_cast<std::size_t>(it.col())];
      if (j >= 0) trips.emplace_back(static_cast<Eigen::Index>(i), j, it.value());
    }
  }
  SparseMatrix w(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(nodes.size()));
  w.setFromTriplets(trips.begin(), trips.end());
  return LocalityGraph(std::move(labels), std::move(w));
}

DiagonalModulation::DiagonalModulation(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("D must have at least one entry");
  for (double v : values_)
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("D entries must be finite and > 0");
}

DiagonalModulation DiagonalModulation::scalar(std::size_t n, double eta) {
  return DiagonalModulation(std::vector<double>(n, eta));
}

double DiagonalModulation::min() const { return *std::min_element(values_.begin(), values_.end()); }
double DiagonalModulation::max() const { return *std::max_element(values_.begin(), values_.end()); }
bool DiagonalModulation::is_scalar() const { return min() == max(); }

LocalityGraph load_edge_list(std::istream& in) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<Eigen::Triplet<double>> trips;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = index.emplace(s, labels.size());
    if (inserted) labels.push_back(s);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string src, dst, wtext, extra;
    if (!(fields >> src)) continue;
    if (!(fields >> dst >> wtext) || (fields >> extra))
      throw ParseError("expected 'src dst weight'", lineno);
    double w = 0.0;
    const auto* end = wtext.data() + wtext.size();
    auto [ptr, ec] = std::from_chars(wtext.data(), end, w);
    if (ec != std::errc() || ptr != end) throw ParseError("bad weight '" + wtext + "'", lineno);
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("line " + std::to_string(lineno) + ": negative or non-finite weight");
    const auto u = intern(src);
    const auto v = intern(dst);
    if (u == v) throw ValidationError("line " + std::to_string(lineno) + ": self-loop '" + src + "'");
    if (!seen.emplace(u, v).second)
      throw ValidationError("line " + std::to_string(lineno) + ": duplicate edge " + src + " " + dst);
    trips.emplace_back(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v), w);
  }
  if (labels.empty()) throw ParseError("edge list contains no edges");
  const auto n = static_cast<Eigen::Index>(labels.size());
  SparseMatrix w(n, n);
  w.setFromTriplets(trips.begin(), trips.end());
  return LocalityGraph(std::move(labels), std::move(w));
}

LocalityGraph load_edge_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path.string() + "'");
  return load_edge_list(in);
}

LocalityGraph normalize_mean_column_weight(const LocalityGraph& g) {
  const double total = g.weights().sum();
  if (!(total > 0.0)) throw ValidationError("cannot normalize a graph with no positive weight");
  const double mean_column = total / static_cast<double>(g.node_count());
  SparseMatrix w = g.weights() / mean_column;
  return LocalityGraph(g.labels(), std::move(w));
}

bool is_strongly_connected(const SparseMatrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("is_strongly_connected: matrix is not square");
  if (m.rows() <= 1) return true;
  auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
  if (!all(reach(m, 0))) return false;
  SparseMatrix rev = m.transpose();
  return all(reach(rev, 0));
}

bool is_strongly_connected(const LocalityGraph& g) { return is_strongly_connected(g.weights()); }

SpectralInfo spectral_radius(const Matrix& m, const SpectralOptions& opts) {
  return power_iterate(m, opts);
}

SpectralInfo spectral_radius(const SparseMatrix& m, const SpectralOptions& opts) {
  if (static_cast<std::size_t>(m.rows()) <= kDenseNodeLimit) return power_iterate(Matrix(m), opts);
  return power_iterate(m, opts);
}

DegreeExtremes weighted_degrees(const LocalityGraph& g) {
  DegreeExtremes out{0.0, std::numeric_limits<double>::infinity()};
  const auto& w = g.weights();
  for (Eigen::Index r = 0; r < w.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) s += it.value();
    out.d_max = std::max(out.d_max, s);
    out.d_min = std::min(out.d_min, s);
  }
  return out;
}

SparseMatrix symmetrized_upper(const LocalityGraph& g) {
  SparseMatrix t = g.weights().transpose();
  SparseMatrix out = (g.weights() + t) * 0.5;
  out.makeCompressed();
  return out;
}

SparseMatrix geometric_lower(const LocalityGraph& g) {
  SparseMatrix t = g.weights().transpose();
  SparseMatrix out = g.weights().cwiseProduct(t);
  for (Eigen::Index r = 0; r < out.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() = std::sqrt(it.value());
  out.prune(0.0);
  out.makeCompressed();
  return out;
}

SparseMatrix effective_matrix(const LocalityGraph& g, const DiagonalModulation& d,
                              double beta_inf, double betaint_inf) {
  if (d.size() != g.node_count()) throw ValidationError("effective_matrix: D has wrong dimension");
  if (!(beta_inf >= 0.0) || !(betaint_inf >= 0.0))
    throw ValidationError("effective_matrix: infectiousness limits must be >= 0");
  const auto n = static_cast<Eigen::Index>(g.node_count());
  SparseMatrix diag(n, n);
  diag.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index u = 0; u < n; ++u) diag.insert(u, u) = betaint_inf * d[static_cast<std::size_t>(u)];
  SparseMatrix out = beta_inf * g.weights() + diag;
  out.prune(0.0);
  out.makeCompressed();
  return out;
}

std::vector<std::size_t> top_nodes_by_weight(const LocalityGraph& g, std::size_t k) {
  const auto n = g.node_count();
  std::vector<double> total(n, 0.0);
  const auto& w = g.weights();
  for (Eigen::Index r = 0; r < w.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) {
      total[static_cast<std::size_t>(it.row())] += it.value();
      total[static_cast<std::size_t>(it.col())] += it.value();
    }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return total[a] > total[b]; });
  order.resize(std::min(k, n));
  return order;
}

}  // namespace sdepi
