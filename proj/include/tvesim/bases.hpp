#pragma once

#include <Eigen/Dense>

#include <vector>

#include "tvesim/eigensolve.hpp"
#include "tvesim/fem.hpp"
#include "tvesim/material.hpp"
#include "tvesim/mesh.hpp"
#include "tvesim/orlicz.hpp"
#include "tvesim/quadrature.hpp"
#include "tvesim/tensor.hpp"

namespace tvesim {

// Element-integrated moduli: entry e acts like the integral of D(x) over
// element e on piecewise-constant tensors. Every D-weighted inner product of
// P0 fields in the basis construction goes through this table, which keeps
// the Gram identities exact with respect to the assembly quadrature.
std::vector<ElasticModuli> integrated_moduli(const Mesh& mesh, const MaterialField& mat,
                                             const TriangleRule& rule);

double d_inner(const std::vector<ElasticModuli>& dint, const std::vector<SymTensor3>& a,
               const std::vector<SymTensor3>& b);

// Neumann Laplacian eigenpairs: L2-orthonormal modes, ascending eigenvalues,
// first eigenvalue zero with a constant mode.
struct TempBasis {
  Eigen::MatrixXd v;   // n_nodes x count
  Eigen::VectorXd mu;  // ascending
  int count() const { return static_cast<int>(mu.size()); }
};

TempBasis neumann_eigenbasis(const Mesh& mesh, int count, const EigenOptions& opt = {});

// Elasto-static eigenpairs with zero Dirichlet boundary: L2-orthonormal
// displacement modes; the strain table then satisfies
// (strain_i, strain_j)_D = lambda_i delta_ij.
struct DispBasis {
  Eigen::MatrixXd w;        // 2 n_nodes x count, zero on the boundary
  Eigen::VectorXd lambda;   // ascending, strictly positive
  std::vector<std::vector<SymTensor3>> strain;  // [mode][element]
  int count() const { return static_cast<int>(lambda.size()); }
};

DispBasis elastostatic_eigenbasis(const Mesh& mesh, const MaterialField& mat,
                                  const TriangleRule& rule, int count,
                                  const EigenOptions& opt = {});

// D-orthonormal basis of the orthogonal complement of span{strain(w_n)}
// inside the piecewise-constant tensor space. Modes are grown from canonical
// elementwise indicator tensors ordered by descending projection residual
// (ties broken by candidate index), Gram-Schmidt with re-orthogonalization.
struct ComplementBasis {
  std::vector<std::vector<SymTensor3>> zeta;  // [mode][element]
  int count() const { return static_cast<int>(zeta.size()); }
};

ComplementBasis complement_basis(const Mesh& mesh, const std::vector<ElasticModuli>& dint,
                                 const DispBasis& disp, int count);

// Coefficients of the D-orthogonal projection of a quadrature-point tensor
// field onto the displacement strains (gamma, scaled by 1/lambda) and the
// complement modes (delta).
struct StrainProjection {
  Eigen::VectorXd gamma;
  Eigen::VectorXd delta;
};

StrainProjection project_strain(const Mesh& mesh, const MaterialField& mat, const TriangleRule& rule,
                                const DispBasis& disp, const ComplementBasis& comp,
                                const QpTensorFn& field);

// L2 projection coefficients of a nodal scalar field onto the temperature modes.
Eigen::VectorXd project_temperature(const Mesh& mesh, const TempBasis& temp,
                                    const Eigen::VectorXd& nodal);

}  // namespace tvesim
