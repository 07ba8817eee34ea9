#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "sicd/linalg.hpp"

namespace sicd {

/// Largest dimension the dense routines accept.
inline constexpr std::size_t kDenseLimit = 1000;

/// Materializes an operator column by column. Refuses dim > kDenseLimit.
Eigen::MatrixXd to_dense(const SymmetricOperator& a);

/// Full eigendecomposition, eigenvalues sorted descending.
struct SpectrumOracle {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues[i]

  std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
  double gap() const { return eigenvalues[0] - eigenvalues[1]; }
  Vector leading() const { return eigenvectors.col(0); }
  /// || sum_i rho_i p_i p_i^T - a ||_max
  double reconstruction_error(const Eigen::MatrixXd& a) const;
};

SpectrumOracle dense_spectrum(const SymmetricOperator& a);
SpectrumOracle dense_spectrum(const Eigen::MatrixXd& a);

/// |w^T p_1| against the oracle's leading eigenvector.
double alignment(const SpectrumOracle& oracle, const Vector& w);

/// Potential of the accurate regime:
///   sqrt(sum_{i>=2} (lambda - rho_i) xi_i^2) / sqrt((lambda - rho_1) xi_1^2),
/// with xi_i = w^T p_i. Requires lambda > rho_1.
double alignment_potential(const SpectrumOracle& oracle, double lambda, const Vector& w);

/// Quantities from the convergence analysis of the inexact power method on
/// (lambda I - A)^{-1}, evaluated against a known spectrum.
struct TheoryParams {
  Eigen::VectorXd betas;  // 1 / (lambda - rho_i)
  double gamma = 0;       // (3 b1 + b2) / (b1 + 3 b2)
  double g0 = 0;          // alignment_potential at w0
  std::size_t t1 = 0;     // crude-regime iteration count
  std::size_t t2 = 0;     // accurate-regime iteration count
  double kappa = 0;       // (lambda - rho_d) / (lambda - rho_1)
  double sigma_upper = 0; // 4 / delta_tilde

  /// (b1 + 3 b2) / (3 b1 + b2): per-step potential contraction factor.
  double contraction() const { return 1.0 / gamma; }
};

TheoryParams theory_params(const SpectrumOracle& oracle, double lambda, const Vector& w0,
                           double epsilon, double delta_tilde);

}  // namespace sicd
