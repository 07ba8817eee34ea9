#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sicd {

using Vector = Eigen::VectorXd;

/// Raised by the edge-list reader; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Undirected simple graph. Edges are stored once as (min, max) pairs,
/// sorted and without duplicates or self-loops.
struct EdgeGraph {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::vector<std::size_t> degrees() const;
};

EdgeGraph load_edge_list(std::istream& in);
EdgeGraph load_edge_list(const std::filesystem::path& path);

/// Read-only symmetric operator with the column access coordinate methods
/// need. Implementations are immutable after construction.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;

  virtual std::size_t dim() const = 0;
  virtual double diagonal(std::size_t i) const = 0;
  /// out += alpha * A[:, j]
  virtual void add_column(std::size_t j, double alpha, Vector& out) const = 0;
  virtual Vector apply(const Vector& v) const = 0;
  /// Upper bound on the spectral radius (max absolute row sum).
  virtual double norm_bound() const = 0;
  /// Lower bound on the smallest eigenvalue.
  virtual double lower_bound() const { return -norm_bound(); }
};

/// Sparse symmetric matrix stored column-wise with both triangles present,
/// plus a dense cache of the diagonal.
class SymmetricMatrix final : public SymmetricOperator {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  /// Each off-diagonal pair is given once, in either orientation, and is
  /// mirrored. Repeating a pair is an error.
  static SymmetricMatrix from_entries(std::size_t dim, std::vector<Entry> entries);
  /// Stores every nonzero of a dense matrix; it must be exactly symmetric.
  static SymmetricMatrix from_dense(const Eigen::MatrixXd& dense);

  std::size_t dim() const override { return diag_.size(); }
  double diagonal(std::size_t i) const override { return diag_[i]; }
  void add_column(std::size_t j, double alpha, Vector& out) const override;
  Vector apply(const Vector& v) const override;
  double norm_bound() const override { return norm_bound_; }
  /// Gershgorin: min_i A[ii] - sum_{j != i} |A[ij]|.
  double lower_bound() const override { return lower_bound_; }

  std::span<const std::size_t> column_rows(std::size_t j) const;
  std::span<const double> column_values(std::size_t j) const;
  /// Entry lookup by binary search within column j.
  double value(std::size_t i, std::size_t j) const;
  std::size_t nnz() const { return values_.size(); }

 private:
  SymmetricMatrix() = default;
  void finish();

  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> rows_;
  std::vector<double> values_;
  std::vector<double> diag_;
  double norm_bound_ = 0.0;
  double lower_bound_ = 0.0;
};

/// A' = (I - p p^T) A (I - p p^T) evaluated lazily from A and a cached A p.
/// Holds a reference to `base`, which must outlive this object.
class DeflatedOperator final : public SymmetricOperator {
 public:
  DeflatedOperator(const SymmetricOperator& base, Vector p1);

  std::size_t dim() const override { return p1_.size(); }
  double diagonal(std::size_t i) const override;
  void add_column(std::size_t j, double alpha, Vector& out) const override;
  Vector apply(const Vector& v) const override;
  double norm_bound() const override { return base_.norm_bound(); }

  const SymmetricOperator& base() const { return base_; }
  const Vector& p1() const { return p1_; }
  const Vector& ap1() const { return ap1_; }
  /// max |A p1 - cached| over entries; recomputes A p1.
  double cache_error() const;

 private:
  const SymmetricOperator& base_;
  Vector p1_;
  Vector ap1_;
  double p1_a_p1_;
};

/// scale * D^{-1/2} (D - W) D^{-1/2}; isolated nodes get zero rows.
SymmetricMatrix normalized_laplacian(const EdgeGraph& graph, double scale = 0.5);

/// U diag(eigenvalues) U^T with U a seeded random rotation (QR of a Gaussian
/// matrix, columns sign-fixed by diag(R) > 0).
SymmetricMatrix rotated_spectrum(std::span<const double> eigenvalues, std::uint64_t seed);

/// Spectrum {1, 1 - delta, 1 - 2 delta, ...} under a random rotation.
SymmetricMatrix synthetic_spiked(std::size_t d, double delta, std::uint64_t seed);

Vector apply(const SymmetricOperator& a, const Vector& v);
double quadratic_form(const SymmetricOperator& a, const Vector& v);
/// Column j of a deflated operator, without forming A'.
Vector deflated_column(const DeflatedOperator& op, std::size_t j);

/// v / ||v||; throws on a zero vector.
Vector normalized(const Vector& v);
/// Standard Gaussian vector, normalized. Deterministic per (d, seed).
Vector random_unit_vector(std::size_t d, std::uint64_t seed);

}  // namespace sicd
