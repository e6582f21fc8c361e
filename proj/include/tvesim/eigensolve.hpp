#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tvesim {

// Shift-invert subspace iteration for the generalized symmetric pencil
// K x = lambda M x with K positive semidefinite and M positive definite.
// The shift sits below zero so the factored matrix K - sigma M is definite
// even when K has a kernel (pure Neumann operators).
struct EigenOptions {
  int max_iter = 400;
  double tol = 1e-10;  // ||K x - lambda M x|| <= tol (1 + |lambda|) ||M x||
  int buffer_min = 8;  // extra subspace vectors beyond the requested count
};

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, M-orthonormal
  int iterations = 0;
  double max_residual = 0.0;
};

EigenPairs smallest_eigenpairs(const Eigen::SparseMatrix<double>& k,
                               const Eigen::SparseMatrix<double>& m, int p,
                               const EigenOptions& opt = {});

}  // namespace tvesim
