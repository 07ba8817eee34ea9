#include "sicd/spectrum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace sicd {

Eigen::MatrixXd to_dense(const SymmetricOperator& a) {
  const std::size_t d = a.dim();
  if (d > kDenseLimit) {
    throw std::invalid_argument("dense oracle refuses dimension " + std::to_string(d));
  }
  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < d; ++j) {
    Vector col = Vector::Zero(n);
    a.add_column(j, 1.0, col);
    dense.col(static_cast<Eigen::Index>(j)) = col;
  }
  return dense;
}

SpectrumOracle dense_spectrum(const Eigen::MatrixXd& a) {
  if (static_cast<std::size_t>(a.rows()) > kDenseLimit) {
    throw std::invalid_argument("dense oracle refuses dimension " + std::to_string(a.rows()));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  // Eigen returns ascending order
  SpectrumOracle out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

SpectrumOracle dense_spectrum(const SymmetricOperator& a) { return dense_spectrum(to_dense(a)); }

double SpectrumOracle::reconstruction_error(const Eigen::MatrixXd& a) const {
  const Eigen::MatrixXd rebuilt = eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  return (rebuilt - a).cwiseAbs().maxCoeff();
}

double alignment(const SpectrumOracle& oracle, const Vector& w) {
  return std::abs(oracle.eigenvectors.col(0).dot(w));
}

double alignment_potential(const SpectrumOracle& oracle, double lambda, const Vector& w) {
  const Vector xi = oracle.eigenvectors.transpose() * w;
  const double mu = lambda - oracle.eigenvalues[0];
  if (!(mu > 0.0)) throw std::invalid_argument("potential needs lambda > rho_1");
  double tail = 0.0;
  for (Eigen::Index i = 1; i < xi.size(); ++i) {
    tail += (lambda - oracle.eigenvalues[i]) * xi[i] * xi[i];
  }
  return std::sqrt(tail) / std::sqrt(mu * xi[0] * xi[0]);
}

TheoryParams theory_params(const SpectrumOracle& oracle, double lambda, const Vector& w0,
                           double epsilon, double delta_tilde) {
  const auto& rho = oracle.eigenvalues;
  if (!(lambda > rho[0])) throw std::invalid_argument("theory params need lambda > rho_1");

  TheoryParams p;
  p.betas = (lambda - rho.array()).inverse().matrix();
  const double b1 = p.betas[0];
  const double b2 = p.betas.size() > 1 ? p.betas[1] : 0.0;
  p.gamma = (3.0 * b1 + b2) / (b1 + 3.0 * b2);
  p.g0 = alignment_potential(oracle, lambda, w0);
  p.kappa = (lambda - rho[rho.size() - 1]) / (lambda - rho[0]);
  p.sigma_upper = 4.0 / delta_tilde;

  const double xi01 = oracle.eigenvectors.col(0).dot(w0);
  p.t1 = static_cast<std::size_t>(
      std::ceil(2.0 / epsilon * std::log(4.0 / (epsilon * xi01 * xi01))));
  const double t2 = 0.5 * std::log(p.g0 * p.g0 / epsilon) / std::log(p.gamma);
  p.t2 = t2 > 0.0 ? static_cast<std::size_t>(std::ceil(t2)) : 0;
  return p;
}

}  // namespace sicd
