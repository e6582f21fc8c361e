#include "tvesim/eigensolve.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace tvesim {

namespace {

// Deterministic start block from a fixed linear congruential stream.
Eigen::MatrixXd start_block(Eigen::Index n, Eigen::Index m) {
  Eigen::MatrixXd x(n, m);
  unsigned long long state = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      x(i, j) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    }
  return x;
}

}  // namespace

EigenPairs smallest_eigenpairs(const Eigen::SparseMatrix<double>& k,
                               const Eigen::SparseMatrix<double>& m, int p,
                               const EigenOptions& opt) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || m.rows() != n || m.cols() != n)
    throw std::invalid_argument("smallest_eigenpairs: pencil matrices must be square and equal size");
  if (p < 1 || p > n) throw std::invalid_argument("smallest_eigenpairs: invalid pair count");

  const Eigen::Index sub = std::min<Eigen::Index>(n, p + std::max<Eigen::Index>(opt.buffer_min, p));

  const double k_scale = Eigen::VectorXd(k.diagonal()).cwiseAbs().mean();
  const double m_scale = Eigen::VectorXd(m.diagonal()).cwiseAbs().mean();
  double sigma = -0.01 * (k_scale > 0.0 ? k_scale / m_scale : 1.0);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  for (int attempt = 0;; ++attempt) {
    Eigen::SparseMatrix<double> shifted = k - sigma * m;
    solver.compute(shifted);
    if (solver.info() == Eigen::Success) break;
    if (attempt >= 3) throw std::runtime_error("smallest_eigenpairs: factorization failed");
    sigma *= 10.0;
  }

  Eigen::MatrixXd x = start_block(n, sub);
  EigenPairs out;
  Eigen::VectorXd values(sub);

  for (int it = 1; it <= opt.max_iter; ++it) {
    const Eigen::MatrixXd y = solver.solve(m * x);

    // Rayleigh-Ritz on span(y); ritz vectors come out M-orthonormal.
    const Eigen::MatrixXd kr = y.transpose() * (k * y);
    const Eigen::MatrixXd mr = y.transpose() * (m * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(
        0.5 * (kr + kr.transpose()), 0.5 * (mr + mr.transpose()));
    if (ritz.info() != Eigen::Success)
      throw std::runtime_error("smallest_eigenpairs: dense Rayleigh-Ritz step failed");
    x = y * ritz.eigenvectors();
    values = ritz.eigenvalues();

    double worst = 0.0;
    for (int i = 0; i < p; ++i) {
      const Eigen::VectorXd r = k * x.col(i) - values[i] * (m * x.col(i));
      const double denom = (1.0 + std::abs(values[i])) * (m * x.col(i)).norm();
      worst = std::max(worst, r.norm() / denom);
    }
    out.iterations = it;
    out.max_residual = worst;
    if (worst <= opt.tol) break;
  }

  if (out.max_residual > opt.tol)
    throw std::runtime_error("smallest_eigenpairs: no convergence within iteration budget");

  out.values = values.head(p);
  out.vectors = x.leftCols(p);
  return out;
}

}  // namespace tvesim
