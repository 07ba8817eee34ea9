#include "sicd/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include <Eigen/QR>

namespace sicd {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<std::size_t> EdgeGraph::degrees() const {
  std::vector<std::size_t> deg(node_count, 0);
  for (const auto& [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

namespace {

bool parse_index(std::string_view token, std::size_t& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

EdgeGraph load_edge_list(std::istream& in) {
  EdgeGraph graph;
  std::string line;
  std::size_t line_no = 0;
  bool any_node = false;
  std::size_t max_id = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;

    std::istringstream fields(line);
    std::string a_tok, b_tok, extra;
    if (!(fields >> a_tok >> b_tok)) {
      throw ParseError(line_no, "expected two node ids");
    }
    if (fields >> extra) {
      throw ParseError(line_no, "unexpected token '" + extra + "'");
    }
    std::size_t a = 0, b = 0;
    if (!parse_index(a_tok, a)) throw ParseError(line_no, "bad node id '" + a_tok + "'");
    if (!parse_index(b_tok, b)) throw ParseError(line_no, "bad node id '" + b_tok + "'");

    any_node = true;
    max_id = std::max({max_id, a, b});
    if (a == b) continue;
    graph.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  if (!any_node) throw std::runtime_error("edge list contains no edges");

  std::sort(graph.edges.begin(), graph.edges.end());
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
  graph.node_count = max_id + 1;
  return graph;
}

EdgeGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list " + path.string());
  try {
    return load_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

SymmetricMatrix SymmetricMatrix::from_entries(std::size_t dim, std::vector<Entry> entries) {
  if (dim == 0) throw std::invalid_argument("matrix dimension must be positive");

  std::vector<Entry> full;
  full.reserve(2 * entries.size());
  for (const auto& e : entries) {
    if (e.row >= dim || e.col >= dim) {
      throw std::invalid_argument("entry (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") out of range");
    }
    full.push_back(e);
    if (e.row != e.col) full.push_back({e.col, e.row, e.value});
  }
  std::sort(full.begin(), full.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.col, x.row) < std::tie(y.col, y.row);
  });

  SymmetricMatrix m;
  m.col_start_.assign(dim + 1, 0);
  m.rows_.reserve(full.size());
  m.values_.reserve(full.size());
  for (std::size_t k = 0; k < full.size(); ++k) {
    if (k > 0 && full[k].row == full[k - 1].row && full[k].col == full[k - 1].col) {
      throw std::invalid_argument("entry (" + std::to_string(full[k].row) + ", " +
                                  std::to_string(full[k].col) + ") given twice");
    }
    ++m.col_start_[full[k].col + 1];
    m.rows_.push_back(full[k].row);
    m.values_.push_back(full[k].value);
  }
  for (std::size_t j = 0; j < dim; ++j) m.col_start_[j + 1] += m.col_start_[j];
  m.diag_.assign(dim, 0.0);
  m.finish();
  return m;
}

SymmetricMatrix SymmetricMatrix::from_dense(const Eigen::MatrixXd& dense) {
  const auto d = static_cast<std::size_t>(dense.rows());
  if (d == 0 || dense.cols() != dense.rows()) {
    throw std::invalid_argument("dense matrix must be square and nonempty");
  }
  std::vector<Entry> entries;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = dense(i, j);
      if (v != dense(j, i)) throw std::invalid_argument("dense matrix is not symmetric");
      if (v != 0.0) entries.push_back({i, j, v});
    }
  }
  return from_entries(d, std::move(entries));
}

void SymmetricMatrix::finish() {
  const std::size_t d = diag_.size();
  norm_bound_ = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double col_sum = 0.0;
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      if (rows_[k] == j) diag_[j] = values_[k];
      col_sum += std::abs(values_[k]);
    }
    norm_bound_ = std::max(norm_bound_, col_sum);
  }
  lower_bound_ = d == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d; ++j) {
    double off = 0.0;
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k)
      if (rows_[k] != j) off += std::abs(values_[k]);
    lower_bound_ = std::min(lower_bound_, diag_[j] - off);
  }
}

void SymmetricMatrix::add_column(std::size_t j, double alpha, Vector& out) const {
  for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
    out[static_cast<Eigen::Index>(rows_[k])] += alpha * values_[k];
  }
}

Vector SymmetricMatrix::apply(const Vector& v) const {
  Vector out = Vector::Zero(v.size());
  for (std::size_t j = 0; j < dim(); ++j) {
    const double vj = v[static_cast<Eigen::Index>(j)];
    if (vj != 0.0) add_column(j, vj, out);
  }
  return out;
}

std::span<const std::size_t> SymmetricMatrix::column_rows(std::size_t j) const {
  return {rows_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
}

std::span<const double> SymmetricMatrix::column_values(std::size_t j) const {
  return {values_.data() + col_start_[j], col_start_[j + 1] - col_start_[j]};
}

double SymmetricMatrix::value(std::size_t i, std::size_t j) const {
  const auto rows = column_rows(j);
  const auto it = std::lower_bound(rows.begin(), rows.end(), i);
  if (it == rows.end() || *it != i) return 0.0;
  return column_values(j)[static_cast<std::size_t>(it - rows.begin())];
}

// ---------------------------------------------------------------------------

DeflatedOperator::DeflatedOperator(const SymmetricOperator& base, Vector p1)
    : base_(base), p1_(std::move(p1)) {
  if (static_cast<std::size_t>(p1_.size()) != base_.dim()) {
    throw std::invalid_argument("deflation vector has wrong length");
  }
  if (std::abs(p1_.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("deflation vector must be unit norm");
  }
  ap1_ = base_.apply(p1_);
  p1_a_p1_ = p1_.dot(ap1_);
}

double DeflatedOperator::diagonal(std::size_t i) const {
  const auto k = static_cast<Eigen::Index>(i);
  const double p = p1_[k];
  return base_.diagonal(i) - 2.0 * p * ap1_[k] + p * p * p1_a_p1_;
}

void DeflatedOperator::add_column(std::size_t j, double alpha, Vector& out) const {
  // c = A[:, j] - p_j A p;  A'[:, j] = c - p (p^T c),  p^T c = (A p)_j - p_j p^T A p
  const auto k = static_cast<Eigen::Index>(j);
  const double pj = p1_[k];
  const double pc = ap1_[k] - pj * p1_a_p1_;
  base_.add_column(j, alpha, out);
  out.noalias() -= (alpha * pj) * ap1_;
  out.noalias() -= (alpha * pc) * p1_;
}

Vector DeflatedOperator::apply(const Vector& v) const {
  Vector projected = v - p1_ * p1_.dot(v);
  Vector out = base_.apply(projected);
  out -= p1_ * p1_.dot(out);
  return out;
}

double DeflatedOperator::cache_error() const {
  return (base_.apply(p1_) - ap1_).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

SymmetricMatrix normalized_laplacian(const EdgeGraph& graph, double scale) {
  if (graph.node_count == 0) throw std::invalid_argument("graph is empty");
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");

  const auto deg = graph.degrees();
  std::vector<double> inv_sqrt(deg.size(), 0.0);
  for (std::size_t i = 0; i < deg.size(); ++i) {
    if (deg[i] > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(deg[i]));
  }

  std::vector<SymmetricMatrix::Entry> entries;
  entries.reserve(graph.node_count + graph.edges.size());
  for (std::size_t i = 0; i < deg.size(); ++i) {
    if (deg[i] > 0) entries.push_back({i, i, scale});
  }
  for (const auto& [a, b] : graph.edges) {
    if (a >= graph.node_count || b >= graph.node_count) {
      throw std::invalid_argument("edge endpoint exceeds node_count");
    }
    entries.push_back({a, b, -scale * inv_sqrt[a] * inv_sqrt[b]});
  }
  return SymmetricMatrix::from_entries(graph.node_count, std::move(entries));
}

SymmetricMatrix rotated_spectrum(std::span<const double> eigenvalues, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(eigenvalues.size());
  if (d == 0) throw std::invalid_argument("spectrum is empty");

  // separate stream from random_unit_vector: with equal seeds the first
  // rotation column would otherwise be that vector
  std::mt19937_64 rng(seed ^ 0x5eed0f5eed0f5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gauss(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) gauss(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }

  const Eigen::Map<const Eigen::VectorXd> s(eigenvalues.data(), d);
  Eigen::MatrixXd a = q * s.asDiagonal() * q.transpose();
  // mirror the upper triangle so the stored pattern is exactly symmetric
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) a(i, j) = a(j, i);
  }
  return SymmetricMatrix::from_dense(a);
}

SymmetricMatrix synthetic_spiked(std::size_t d, double delta, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("synthetic_spiked needs d >= 2");
  if (!(delta > 0.0) || !(delta < 1.0 / static_cast<double>(d - 1))) {
    throw std::invalid_argument("delta must lie in (0, 1/(d-1))");
  }
  std::vector<double> spectrum(d);
  for (std::size_t k = 0; k < d; ++k) spectrum[k] = 1.0 - static_cast<double>(k) * delta;
  return rotated_spectrum(spectrum, seed);
}

// ---------------------------------------------------------------------------

namespace {

void check_length(const SymmetricOperator& a, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != a.dim()) {
    throw std::invalid_argument("vector length " + std::to_string(v.size()) +
                                " does not match dimension " + std::to_string(a.dim()));
  }
}

}  // namespace

Vector apply(const SymmetricOperator& a, const Vector& v) {
  check_length(a, v);
  return a.apply(v);
}

double quadratic_form(const SymmetricOperator& a, const Vector& v) {
  check_length(a, v);
  return v.dot(a.apply(v));
}

Vector deflated_column(const DeflatedOperator& op, std::size_t j) {
  if (j >= op.dim()) throw std::out_of_range("column index out of range");
  Vector col = Vector::Zero(static_cast<Eigen::Index>(op.dim()));
  op.add_column(j, 1.0, col);
  return col;
}

Vector normalized(const Vector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("cannot normalize a zero vector");
  return v / n;
}

Vector random_unit_vector(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = normal(rng);
  return normalized(v);
}

}  // namespace sicd
