#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <vector>

#include "tvesim/kernels.hpp"
#include "tvesim/material.hpp"
#include "tvesim/mesh.hpp"
#include "tvesim/quadrature.hpp"
#include "tvesim/tensor.hpp"

namespace tvesim {

using SpMat = Eigen::SparseMatrix<double>;

// Scalar P1 operators on the full node set (natural boundary conditions).
SpMat stiffness_scalar(const Mesh& mesh, kernels::Exec exec = kernels::Exec::parallel);
SpMat mass_scalar(const Mesh& mesh, kernels::Exec exec = kernels::Exec::parallel);
Eigen::VectorXd lumped_mass_scalar(const Mesh& mesh);

// Vector P1 operators; dofs interleaved as (ux_0, uy_0, ux_1, uy_1, ...).
SpMat stiffness_elastic(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
                        kernels::Exec exec = kernels::Exec::parallel);
SpMat mass_vector(const Mesh& mesh, kernels::Exec exec = kernels::Exec::parallel);

// Condensation of homogeneous Dirichlet dofs.
struct DofMap {
  std::vector<int> full_to_red;  // -1 for constrained dofs
  std::vector<int> red_to_full;
  int n_red = 0;
};

DofMap interior_scalar_map(const Mesh& mesh);
DofMap interior_vector_map(const Mesh& mesh);

SpMat restrict_matrix(const SpMat& a, const DofMap& map);
Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, const DofMap& map);
Eigen::VectorXd prolong_vector(const Eigen::VectorXd& v, const DofMap& map);

// Load vectors by element quadrature of pointwise callables.
Eigen::VectorXd load_scalar(const Mesh& mesh, const TriangleRule& rule,
                            const std::function<double(double, double)>& f);
Eigen::VectorXd load_vector(const Mesh& mesh, const TriangleRule& rule,
                            const std::function<std::array<double, 2>(double, double)>& f);

// Boundary flux load: integral of g against the P1 trace along all boundary
// edges with a two point Gauss rule per edge.
Eigen::VectorXd boundary_flux_load(const Mesh& mesh,
                                   const std::function<double(double, double)>& g);

// P0 strain of an interleaved vector nodal field; plane strain fills the full
// symmetric 3x3 tensor with zero out-of-plane entries.
SymTensor3 element_strain(const Mesh& mesh, int e, const Eigen::VectorXd& u);

// P1 interpolation of a scalar nodal field at barycentric (l1, l2) of element e.
double eval_p1(const Mesh& mesh, const Eigen::VectorXd& f, int e, double l1, double l2);

// Constant gradient of a scalar nodal field on element e.
std::array<double, 2> grad_p1(const Mesh& mesh, const Eigen::VectorXd& f, int e);

}  // namespace tvesim
