#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "tvesim/expression.hpp"
#include "tvesim/fem.hpp"

namespace tvesim {

// Static elastic shift: u solves -div(D eps(u)) = f with u = g on the
// boundary, computed as u = u1 + g_I with g_I the nodal interpolant of g and
// u1 the zero-Dirichlet correction.
struct LiftingElastic {
  Eigen::VectorXd u;                            // interleaved nodal field
  std::vector<SymTensor3> strain;               // P0 strain of u
  std::vector<std::vector<SymTensor3>> stress;  // per element and quad point
  double stress_max = 0.0;                      // max |T| over quad points
  double stability = 0.0;  // stress_max over the data norm, 0 when unloaded

  SymTensor3 stress_dev(int e, int q) const {
    return stress[static_cast<std::size_t>(e)][static_cast<std::size_t>(q)].dev();
  }
};

// Shares one factorization of the constrained stiffness across solves.
class ElasticLiftingSolver {
 public:
  ElasticLiftingSolver(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule);

  // f, g interleaved nodal fields. Interior values of g only shape the
  // correction; the solution depends on its boundary trace alone.
  LiftingElastic solve(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

 private:
  const Mesh& mesh_;
  const MaterialField& mat_;
  TriangleRule rule_;
  DofMap map_;
  SpMat k_full_;
  SpMat m_full_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

LiftingElastic solve_static_elastic(const Mesh& mesh, const MaterialField& mat,
                                    const TriangleRule& rule, const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& g);

// Expression-driven elastic shift with a per-time cache; time-independent
// data is solved exactly once.
class ElasticLifting {
 public:
  ElasticLifting(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
                 std::array<Expression, 2> f, std::array<Expression, 2> g);

  const LiftingElastic& at(double t) const;
  bool time_dependent() const { return time_dep_; }

 private:
  const Mesh& mesh_;
  ElasticLiftingSolver solver_;
  std::array<Expression, 2> f_, g_;
  bool time_dep_ = false;
  mutable std::map<double, LiftingElastic> cache_;
};

// Heat shift trajectory: theta_t - Laplace theta = 0 with Neumann datum g,
// stepped by implicit Euler on the evolution time grid so downstream shifts
// need no interpolation. Queries between grid points blend linearly.
struct LiftingHeat {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> theta;
  double sup_l1 = 0.0;           // sup over steps of the lumped L1 norm
  double space_time_norm = 0.0;  // sqrt(sum of dt (L2^2 + |grad|_2^2))
  double data_norm = 0.0;        // boundary datum in L2(time; L2) + initial L2
  double stability = 0.0;        // (sup_l1 + space_time_norm) / data_norm

  const Eigen::VectorXd& at_step(int n) const { return theta[static_cast<std::size_t>(n)]; }
  Eigen::VectorXd at_time(double t) const;
};

using BoundaryFn = std::function<double(double, double, double)>;  // (x, y, t)

LiftingHeat solve_lifting_heat(const Mesh& mesh, const BoundaryFn& g_theta,
                               const Eigen::VectorXd& theta0, double t_final, int steps);
LiftingHeat solve_lifting_heat(const Mesh& mesh, const Expression& g_theta,
                               const Eigen::VectorXd& theta0, double t_final, int steps);

}  // namespace tvesim
